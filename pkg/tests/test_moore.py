import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from flowspace import checks
from flowspace.moore import (
    ASSOCIATOR,
    EndpointsMismatch,
    MooreError,
    NotAReparametrization,
    PLPath,
    PLReparam,
    act,
    associator,
    blend,
    compose_reparam,
    format_path,
    invert_reparam,
    moore_compose,
    normalized_compose,
    parse_path,
    rescale,
)

ID = PLReparam.identity()


def test_moore_compose_example():
    f = PLPath.linear(0, 1)
    g = PLPath.linear(1, 3)
    h = moore_compose(f, g)
    assert h.duration == 2 and h(F(3, 2)) == 2


def test_compose_with_constant():
    f = PLPath(F(1, 2), [(0, 0), (F(1, 2), 1)])
    c = PLPath.constant(1, 3)
    h = moore_compose(f, c)
    assert h.duration == F(7, 2)
    assert h.points == ((0, 0), (F(1, 2), 1), (F(7, 2), 1))


def test_endpoint_mismatch():
    with pytest.raises(EndpointsMismatch):
        moore_compose(PLPath.linear(0, 1), PLPath.linear(2, 3))


def test_rescale_examples():
    g = PLPath.linear(0, 5)
    assert rescale(g) == g
    ramp = PLPath(2, [(0, 0), (2, 2)])
    assert rescale(ramp) == PLPath(1, [(0, 0), (1, 2)])
    assert rescale(moore_compose(ramp, PLPath.linear(2, 0, 3))).duration == 1


def test_normalized_compose_examples():
    a, b, c = PLPath.linear(0, 1), PLPath.linear(1, 2), PLPath.linear(2, 3)
    ab = normalized_compose(a, b)
    assert ab(F(1, 2)) == a(1) == b(0)
    left = normalized_compose(ab, c)
    # a is traversed on [0, 1/4] in the left-nested composite
    assert left(F(1, 4)) == 1 and left(F(1, 8)) == F(1, 2)
    right = normalized_compose(a, normalized_compose(b, c))
    assert right(F(1, 4)) == F(1, 2)
    assert left != right


def test_associator_examples():
    assert ASSOCIATOR(F(1, 4)) == F(1, 2) and ASSOCIATOR(F(1, 2)) == F(3, 4)
    k = PLPath.constant(7)
    assert normalized_compose(normalized_compose(k, k), k) == normalized_compose(k, normalized_compose(k, k))
    assert associator(k, k, k) == ASSOCIATOR


def test_blend_examples():
    phi = PLReparam([(0, 0), (F(1, 2), F(1, 4)), (1, 1)])
    assert blend(phi, ID, 0) == phi and blend(phi, ID, 1) == ID
    assert blend(phi, ID, F(1, 2)).points == ((0, 0), (F(1, 2), F(3, 8)), (1, 1))
    with pytest.raises(MooreError):
        blend(phi, ID, 2)


def test_group_examples():
    phi = PLReparam([(0, 0), (F(1, 3), F(2, 3)), (1, 1)])
    assert invert_reparam(ID) == ID
    assert compose_reparam(phi, invert_reparam(phi)) == ID
    assert invert_reparam(phi).points == ((0, 0), (F(2, 3), F(1, 3)), (1, 1))


def test_reparam_invariants():
    with pytest.raises(NotAReparametrization):
        PLReparam([(0, 0), (F(1, 2), F(1, 2)), (F(3, 4), F(1, 2)), (1, 1)])
    with pytest.raises(NotAReparametrization):
        PLReparam([(0, F(1, 8)), (1, 1)])


def test_collinear_points_dropped():
    assert PLPath(2, [(0, 0), (1, 1), (2, 2)]).points == ((0, 0), (2, 2))


def test_literal_roundtrip():
    g = parse_path("dur=3/2; pts=(0,1),(1/2,-2),(3/2,0)")
    assert g.duration == F(3, 2) and g(F(1, 2)) == -2
    assert parse_path(format_path(g)) == g
    for bad in ("dur=1 pts=(0,0),(1,1)", "dur=1; pts=(0,0)(1,1)x", "dur=0; pts=(0,0)"):
        with pytest.raises(MooreError):
            parse_path(bad)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_moore_strictly_associative(seed):
    a, b, c = checks.random_triple(random.Random(seed))
    assert moore_compose(moore_compose(a, b), c) == moore_compose(a, moore_compose(b, c))


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_associator_repairs(seed):
    a, b, c = checks.random_triple(random.Random(seed), unit=True)
    left = normalized_compose(normalized_compose(a, b), c)
    right = normalized_compose(a, normalized_compose(b, c))
    assert act(right, associator(a, b, c)) == left
    # pointwise at every breakpoint of both sides
    for t in sorted({t for t, _ in left.points} | {t for t, _ in right.points}):
        assert left(t) == right(ASSOCIATOR(t))


@settings(max_examples=80, deadline=None)
@given(seeds, st.fractions(0, 1))
def test_blend_stays_in_group(seed, s):
    rng = random.Random(seed)
    phi, psi = checks.random_reparam(rng), checks.random_reparam(rng)
    out = blend(phi, psi, s)
    assert out(0) == 0 and out(1) == 1
    assert all(a[1] < b[1] for a, b in zip(out.points, out.points[1:]))
    for t in (F(1, 7), F(1, 2), F(5, 6)):
        assert out(t) == (1 - s) * phi(t) + s * psi(t)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_action_laws(seed):
    rng = random.Random(seed)
    g = checks.random_path(rng, duration=1)
    phi, psi = checks.random_reparam(rng), checks.random_reparam(rng)
    assert act(g, ID) == g
    assert act(act(g, phi), psi) == act(g, compose_reparam(phi, psi))
    moved = act(g, phi)
    assert (moved(0), moved(1)) == (g(0), g(1))
    chi = checks.random_reparam(rng)
    assert compose_reparam(compose_reparam(phi, psi), chi) == compose_reparam(phi, compose_reparam(psi, chi))
    assert compose_reparam(invert_reparam(phi), phi) == ID
