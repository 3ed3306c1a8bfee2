import random

import pytest
from hypothesis import given, settings, strategies as st

from flowspace import corpus
from flowspace.flows import DiscreteFlow, FlowMap, GlobAttachment, make_glob, pushout_glob_oracle
from flowspace.pathspace import (
    NotInjective,
    NotLoopFree,
    ObjectOutsideContext,
    build_df,
    compare_with_oracle,
    latching_object,
    latching_via_cube,
    match_latching,
    pathspace_via_reedy,
    relative_latching_map,
    support_dot,
    tower_pathspace_check,
    unrestricted_colimit_size,
)
from flowspace.reedy import parse_tuple as T

ONE = corpus.one_cell_glob()
THREE = corpus.three_state()


def test_support_one_cell_glob():
    df = build_df(ONE.flow, ONE.attachment)
    assert set(df.support) == {T("(0 0 1)"), T("(0 1 1)")}
    assert df.diagram.values[T("(0 0 1)")] == {("c",)}
    assert len(df.diagram.values[T("(0 1 1)")]) == 2


def test_support_empty_paths():
    inst = corpus.empty_paths()
    df = build_df(inst.flow, inst.attachment)
    assert df.support == (T("(0 1 1)"),)


def test_support_three_state():
    df = build_df(THREE.flow, THREE.attachment)
    for text in ("(0 0 2)", "(0 0 1)(1 0 2)", "(0 0 1)(1 1 2)"):
        assert T(text) in df.support


def test_loop_rejected():
    a = DiscreteFlow((0, 1), {"p": (0, 1)}, {})
    with pytest.raises(NotLoopFree):
        build_df(a, GlobAttachment(1, 0, (), ("z",), {}, {}))


def test_pathspace_examples():
    res = pathspace_via_reedy(ONE.flow, ONE.attachment)
    assert res.flow.block_counts() == {(0, 1): 2}
    res = pathspace_via_reedy(THREE.flow, THREE.attachment)
    assert res.flow.block_counts() == {(0, 1): 1, (0, 2): 2, (1, 2): 2}
    # r and the concatenation p.q land in one class
    r = res.base_map.path_map["r"]
    pq = res.flow.compose[(res.base_map.path_map["p"], res.base_map.path_map["q"])]
    assert r == pq
    iso = corpus.trivial_attachment()
    res = pathspace_via_reedy(iso.flow, iso.attachment)
    assert len(res.flow.paths) == len(iso.flow.paths) and res.base_map.injective_on_paths()


@pytest.mark.parametrize("inst", corpus.named_instances(), ids=lambda i: i.name)
def test_compare_named(inst):
    cmp = compare_with_oracle(inst.flow, inst.attachment)
    assert cmp.ok, cmp.witness


def test_empty_paths_both_sides_give_cells():
    inst = corpus.empty_paths()
    cmp = compare_with_oracle(inst.flow, inst.attachment)
    assert cmp.ok
    assert len(cmp.oracle.flow.hom(0, 1)) == len(inst.attachment.cells)


def test_latching_examples():
    df = build_df(ONE.flow, ONE.attachment)
    assert latching_object(df, T("(0 0 1)")).apex == ()
    lat = latching_object(df, T("(0 1 1)"))
    assert len(lat.apex) == 1
    assert list(lat.comparison.values()) == [(df.cells.from_path["c"],)]
    df3 = build_df(THREE.flow, THREE.attachment)
    n = T("(0 0 1)(1 1 2)")
    lat = latching_object(df3, n)
    assert len(lat.apex) == 1
    cube = latching_via_cube(THREE.flow, THREE.attachment, n)
    assert set(cube.comparison.values()) == {("p", df3.cells.from_path["q"])}
    assert match_latching(df3, n, lat, cube) is not None
    with pytest.raises(ObjectOutsideContext):
        latching_object(df3, T("(0 1 1)"))


def test_cube_single_map_and_empty_case():
    cube = latching_via_cube(ONE.flow, ONE.attachment, T("(0 1 1)"))
    assert len(cube.apex) == 1
    for text in ("(0 0 1)", "(0 0 1)(1 0 2)"):
        inst = THREE if "2" in text else ONE
        assert latching_via_cube(inst.flow, inst.attachment, T(text)).apex == ()


def test_relative_latching_examples():
    rel = relative_latching_map(ONE.flow, ONE.attachment, T("(0 0 1)"))
    assert rel.case == "a" and rel.bijective
    rel = relative_latching_map(ONE.flow, ONE.attachment, T("(0 1 1)"))
    assert rel.case == "b" and rel.identified and len(rel.domain) == 1
    rel = relative_latching_map(THREE.flow, THREE.attachment, T("(0 0 1)(1 1 2)"))
    assert rel.case == "b" and rel.identified and len(rel.domain) == 1


def test_tower_examples():
    glob = make_glob({"c"})
    constant = [(glob, None), (glob, FlowMap.identity(glob)), (glob, FlowMap.identity(glob))]
    assert tower_pathspace_check(constant)
    states = corpus.state_tower()
    assert tower_pathspace_check(states)
    assert all(x.paths == states[0][0].paths for x, _ in states)
    assert tower_pathspace_check(corpus.globe_tower(4, 4))


def test_tower_rejects_non_injective():
    a = DiscreteFlow((0, 1), {"p": (0, 1), "q": (0, 1)}, {})
    att = GlobAttachment(0, 1, ("s", "t"), ("z",), {"s": "p", "t": "q"}, {"s": "z", "t": "z"})
    res = pushout_glob_oracle(a, att)
    with pytest.raises(NotInjective):
        tower_pathspace_check([(a, None), (res.flow, res.base_map)])


def test_support_dot_highlights_latching():
    df = build_df(THREE.flow, THREE.attachment)
    dot = support_dot(df, T("(0 0 1)(1 1 2)"))
    assert dot.startswith("digraph support {") and dot.count("->") == len(df.diagram.index.covers)
    assert dot.count("lightblue") == 1


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_reedy_matches_oracle(seed):
    inst = corpus.random_instance(random.Random(seed))
    cmp = compare_with_oracle(inst.flow, inst.attachment)
    assert cmp.ok, cmp.witness


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_latching_laws(seed):
    inst = corpus.random_instance(random.Random(seed))
    df = build_df(inst.flow, inst.attachment)
    for n in df.support:
        lat = latching_object(df, n)
        cube = latching_via_cube(inst.flow, inst.attachment, n)
        assert match_latching(df, n, lat, cube) is not None
        if n.height == 0:
            assert lat.apex == ()
        rel = relative_latching_map(inst.flow, inst.attachment, n, df)
        assert rel.case == ("a" if n.height == 0 else "b")
        assert rel.bijective if rel.case == "a" else rel.identified


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_support_truncation_lemma(seed):
    rng = random.Random(seed)
    a = corpus.random_flow(rng, max_states=3)
    att = corpus.random_attachment(rng, a)
    res = pathspace_via_reedy(a, att)
    if not res.df.support:
        return
    cap = max(n.degree for n in res.df.support) + 1
    assert unrestricted_colimit_size(a, att, cap) == res.flow.block_counts()
