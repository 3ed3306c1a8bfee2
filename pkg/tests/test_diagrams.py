import random

import pytest
from hypothesis import given, settings, strategies as st

from flowspace import corpus
from flowspace.order import sort_key
from flowspace.diagrams import (
    CyclicIndex,
    DiagramError,
    FinitePoset,
    NotACocone,
    NotFunctorial,
    SetDiagram,
    coequalizes,
    cocone_factorization,
    colimit,
    constant_diagram,
    is_minimal,
    product_comparison,
    product_diagram,
    sum_comparison,
    sum_diagrams,
)


def components(d: SetDiagram) -> list[set]:
    """Connected components of the element graph, by depth-first search."""
    adj = {(o, x): set() for o in d.index.objects for x in d.values[o]}
    for (lo, hi), fn in d.maps.items():
        for x, y in fn.items():
            adj[(lo, x)].add((hi, y))
            adj[(hi, y)].add((lo, x))
    seen, out = set(), []
    for v in adj:
        if v in seen:
            continue
        comp, stack = set(), [v]
        while stack:
            w = stack.pop()
            if w in comp:
                continue
            comp.add(w)
            stack.extend(adj[w] - comp)
        seen |= comp
        out.append(comp)
    return out


def test_coproduct_example():
    d = SetDiagram(FinitePoset.discrete(["i", "j"]), {"i": {1, 2}, "j": {3}}, {})
    assert len(colimit(d)) == 3


def test_constant_map_collapses():
    d = SetDiagram(FinitePoset(("i", "j"), {("i", "j")}), {"i": {"x", "y"}, "j": {"z"}},
                   {("i", "j"): {"x": "z", "y": "z"}})
    res = colimit(d)
    assert len(res) == 1
    assert res.inject("i", "x") == res.inject("i", "y") == res.inject("j", "z")


def test_span_pushout_of_points():
    d = SetDiagram(FinitePoset(("a", "b", "c"), {("a", "b"), ("a", "c")}),
                   {"a": {"s"}, "b": {"p"}, "c": {"q"}},
                   {("a", "b"): {"s": "p"}, ("a", "c"): {"s": "q"}})
    assert len(colimit(d)) == 1


def test_class_ids_are_least_members():
    d = SetDiagram(FinitePoset((1, 2), {(1, 2)}), {1: {"b", "a"}, 2: {"z"}}, {(1, 2): {"a": "z", "b": "z"}})
    assert colimit(d).apex == ((1, "a"),)


def test_cyclic_index_rejected():
    with pytest.raises(CyclicIndex):
        FinitePoset(("a", "b"), {("a", "b"), ("b", "a")})


def test_non_functorial_rejected_with_witness():
    index = FinitePoset(("a", "b", "c", "d"), {("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")})
    values = {"a": {0}, "b": {0}, "c": {0}, "d": {0, 1}}
    maps = {("a", "b"): {0: 0}, ("a", "c"): {0: 0}, ("b", "d"): {0: 0}, ("c", "d"): {0: 1}}
    with pytest.raises(NotFunctorial, match="disagree"):
        SetDiagram(index, values, maps)


def test_bad_maps_rejected():
    index = FinitePoset(("a", "b"), {("a", "b")})
    with pytest.raises(DiagramError):
        SetDiagram(index, {"a": {0}, "b": {1}}, {("a", "b"): {0: 2}})
    with pytest.raises(DiagramError):
        SetDiagram(index, {"a": {0}, "b": {1}}, {})


def test_cocone_examples():
    d = SetDiagram(FinitePoset(("i", "j"), {("i", "j")}), {"i": {1, 2}, "j": {3, 4}},
                   {("i", "j"): {1: 3, 2: 3}})
    res = colimit(d)
    h = cocone_factorization(d, {"i": lambda x: "k", "j": lambda x: "k"}, res)
    assert set(h.values()) == {"k"}
    ident = cocone_factorization(d, {o: (lambda x, o=o: res.inject(o, x)) for o in ("i", "j")}, res)
    assert ident == {c: c for c in res.apex}
    with pytest.raises(NotACocone):
        cocone_factorization(d, {"i": {1: 0, 2: 0}, "j": {3: 1, 4: 1}}, res)


def test_sum_examples():
    one = SetDiagram(FinitePoset.discrete(["x"]), {"x": {1, 2}}, {})
    two = SetDiagram(FinitePoset.discrete(["y"]), {"y": {1, 2, 3}}, {})
    assert len(colimit(sum_diagrams([one]))) == len(colimit(one))
    assert len(colimit(sum_diagrams([one, two]))) == 5
    assert sum_comparison([one, two])[1]


def test_product_examples():
    a = SetDiagram(FinitePoset.discrete(["a1", "a2"]), {"a1": {0, 1}, "a2": {2}}, {})
    b = SetDiagram(FinitePoset.discrete(["b1", "b2"]), {"b1": {0}, "b2": {1, 2}}, {})
    assert len(colimit(product_diagram(a, b))) == 9 == len(colimit(a)) * len(colimit(b))
    point = constant_diagram(FinitePoset.discrete(["*"]), {"pt"})
    assert len(colimit(product_diagram(a, point))) == len(colimit(a))
    assert product_comparison(a, b)[1]


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_colimit_matches_components(seed):
    d = corpus.random_diagram(random.Random(seed))
    res = colimit(d)
    comps = components(d)
    assert len(res) == len(comps)
    for comp in comps:
        assert len({res.injection[v] for v in comp}) == 1
        assert res.injection[next(iter(comp))] == min(comp, key=sort_key)
    assert coequalizes(d, res)
    assert is_minimal(d, res)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_universal_property(seed, size):
    rng = random.Random(seed)
    d = corpus.random_diagram(rng)
    res = colimit(d)
    h = {c: rng.randrange(size) for c in res.apex}
    legs = {o: {x: h[res.inject(o, x)] for x in d.values[o]} for o in d.index.objects}
    assert cocone_factorization(d, legs, res) == h


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_sum_and_product_comparisons_biject(seed):
    rng = random.Random(seed)
    a = corpus.random_diagram(rng, max_objects=4)
    b = corpus.random_diagram(rng, max_objects=4)
    assert sum_comparison([a, b])[1]
    assert product_comparison(a, b)[1]
