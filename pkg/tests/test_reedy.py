import itertools

import pytest
from hypothesis import given, settings, strategies as st

from flowspace import reedy
from flowspace.reedy import (
    Cell,
    Compose,
    Include,
    PosetContext,
    TupleObject,
    parse_tuple,
)

T = parse_tuple


def ctx_of(states, u, v):
    return PosetContext(frozenset(states), u, v)


AB = ctx_of("ab", "a", "b")
ABC = ctx_of("abc", "a", "b")
UV = ctx_of("uv", "u", "v")
A = ctx_of("a", "a", "a")


def test_parse_and_format_roundtrip():
    n = T("(a 0 b)(b 1 c)")
    assert n.cells == (Cell("a", 0, "b"), Cell("b", 1, "c"))
    assert str(n) == "(a 0 b)(b 1 c)"
    assert (n.length, n.height, n.degree) == (2, 1, 3)
    assert T("(0 1 1)").cells[0].src == 0


@pytest.mark.parametrize("bad", ["", "(a 0 b)(c 0 d)", "(a 2 b)", "(a 0 b", "a 0 b"])
def test_parse_rejects(bad):
    with pytest.raises(reedy.ReedyError):
        T(bad)


def test_context_rejects_missing_endpoints():
    with pytest.raises(reedy.ReedyError):
        ctx_of("a", "a", "b")
    with pytest.raises(reedy.ReedyError):
        ctx_of("", "a", "a")


def test_compose_example():
    assert reedy.apply_generator(ABC, T("(a 0 b)(b 0 c)"), Compose(1)) == T("(a 0 c)")


def test_include_examples():
    assert reedy.apply_generator(UV, T("(u 0 v)"), Include(1)) == T("(u 1 v)")
    with pytest.raises(reedy.NotApplicable):
        reedy.apply_generator(UV, T("(u 1 v)"), Include(1))
    with pytest.raises(reedy.NotApplicable):
        reedy.apply_generator(UV, T("(v 0 u)"), Include(1))
    with pytest.raises(reedy.NotApplicable):
        reedy.apply_generator(UV, T("(u 1 v)(v 0 u)"), Compose(1))


def test_boundary_positions_allowed():
    n = T("(a 0 b)(b 0 a)(a 0 b)")
    assert reedy.apply_generator(AB, n, Compose(1)) == T("(a 0 a)(a 0 b)")
    assert reedy.apply_generator(AB, n, Compose(2)) == T("(a 0 b)(b 0 b)")


def test_simplify_examples():
    S = ctx_of("abcd", "a", "b")
    assert reedy.simplify(S, T("(a 0 b)(b 0 c)")) == T("(a 0 c)")
    n = T("(u 1 v)(v 0 u)(u 1 v)")
    assert reedy.simplify(UV, n) == n
    assert reedy.simplify(S, T("(a 0 b)(b 0 c)(c 0 d)")) == T("(a 0 d)")


def test_latch_base_examples():
    assert reedy.latch_base(UV, T("(u 1 v)")) == T("(u 0 v)")
    assert reedy.latch_base(AB, T("(a 0 b)")) == T("(a 0 b)")
    assert reedy.latch_base(UV, T("(u 1 v)(v 0 u)(u 1 v)")) == T("(u 0 v)(v 0 u)(u 0 v)")


def test_leq_examples():
    assert reedy.leq(AB, T("(a 0 b)"), T("(a 1 b)"))
    assert not reedy.leq(AB, T("(a 1 b)"), T("(a 0 b)"))
    assert reedy.leq(AB, T("(a 0 b)(b 0 a)(a 0 b)"), T("(a 1 b)"))
    with pytest.raises(reedy.MixedContext):
        reedy.leq(AB, T("(a 0 b)"), T("(a 0 z)"))


def test_factorize_examples():
    m, n = T("(a 0 b)(b 0 a)(a 0 b)"), T("(a 1 b)")
    f = reedy.factorize(AB, m, n)
    assert f.middle == T("(a 0 b)")
    assert len(f.minus_word) == 2 and all(g.kind is reedy.Kind.COMPOSE for g in f.minus_word)
    assert [g.position for g in f.minus_word] == sorted(g.position for g in f.minus_word)
    assert f.plus_word == (Include(1),)
    assert f.apply(AB, m) == n
    # generator search confirms the middle is unique for u != v
    assert reedy.word_middles(AB, m, 5)[n] == {f.middle}
    same = reedy.factorize(AB, m, m)
    assert same == reedy.ArrowFactorization((), m, ())
    f = reedy.factorize(UV, T("(u 0 v)"), T("(u 1 v)"))
    assert f.middle == T("(u 0 v)") and f.plus_word == (Include(1),)
    with pytest.raises(reedy.NoArrow):
        reedy.factorize(AB, n, m)


def _brute_objects(states, u, v, max_degree):
    """Every composable flagged chain of degree <= max_degree, by direct enumeration."""
    out = set()
    for length in range(1, max_degree + 1):
        for seq in itertools.product(sorted(states), repeat=length + 1):
            for flags in itertools.product((0, 1), repeat=length):
                if length + sum(flags) > max_degree:
                    continue
                if any(e and (a, b) != (u, v) for a, e, b in zip(seq, flags, seq[1:])):
                    continue
                out.add(TupleObject.from_states(seq, flags))
    return out


@pytest.mark.parametrize("states,u,v,d", [("a", "a", "a", 2), ("ab", "a", "b", 1), ("ab", "a", "b", 4),
                                          ("abc", "c", "c", 3), ("ab", "b", "b", 5)])
def test_enumerate_matches_brute_force(states, u, v, d):
    ctx = ctx_of(states, u, v)
    trunc = reedy.enumerate_up_to(ctx, d)
    assert set(trunc.objects) == _brute_objects(states, u, v, d)
    assert len(trunc.objects) == len(set(trunc.objects))
    for lo, hi, g in trunc.covers:
        assert reedy.apply_generator(ctx, lo, g) == hi


def test_enumerate_examples():
    objs = reedy.enumerate_up_to(A, 2).objects
    assert set(objs) == {T("(a 0 a)"), T("(a 1 a)"), T("(a 0 a)(a 0 a)")}
    assert len(reedy.enumerate_up_to(AB, 1).objects) == 4
    assert len(reedy.enumerate_up_to(ctx_of("abc", "a", "a"), 1).objects) == 9


def test_latching_category_examples():
    assert set(reedy.latching_category(UV, T("(u 1 v)")).objects) == {T("(u 0 v)")}
    assert len(reedy.latching_category(AB, T("(a 0 b)"))) == 0
    cat = reedy.latching_category(UV, T("(u 1 v)(v 0 u)(u 1 v)"))
    assert len(cat) == 3
    assert T("(u 0 v)(v 0 u)(u 0 v)") in cat


def test_matching_category_examples():
    S = ctx_of("abc", "a", "b")
    assert set(reedy.matching_category(S, T("(a 0 b)(b 0 c)")).objects) == {T("(a 0 c)")}
    assert len(reedy.matching_category(UV, T("(u 1 v)"))) == 0
    n = T("(a 0 b)(b 0 a)(a 0 b)(b 0 c)")
    cat = reedy.matching_category(S, n)
    s = reedy.simplify(S, n)
    assert s in cat and all(reedy.leq(S, m, s) for m in cat.objects)


def test_non_unique_middle_when_u_equals_v():
    # two generator words with different middles reach the same target
    m = T("(a 0 a)(a 0 a)(a 1 a)(a 0 a)(a 0 a)")
    n = T("(a 0 a)(a 1 a)(a 1 a)(a 0 a)")
    w1 = reedy.apply_word(A, m, [Compose(1), Include(3)])
    w2 = reedy.apply_word(A, m, [Compose(4), Include(2)])
    assert w1 == w2 == n
    assert len(reedy.word_middles(A, m, 6)[n]) == 2


# properties

contexts = st.sampled_from([A, AB, ctx_of("ab", "a", "a"), ABC, ctx_of("abc", "b", "b")])


@st.composite
def objects_in(draw, max_length=5):
    ctx = draw(contexts)
    length = draw(st.integers(1, max_length))
    seq = draw(st.lists(st.sampled_from(sorted(ctx.states)), min_size=length + 1, max_size=length + 1))
    flags = [draw(st.integers(0, 1)) if (a, b) == (ctx.u, ctx.v) else 0 for a, b in zip(seq, seq[1:])]
    return ctx, TupleObject.from_states(seq, flags)


@settings(max_examples=150, deadline=None)
@given(objects_in())
def test_generator_degree_shift(data):
    ctx, n = data
    for g, m in reedy.successors(ctx, n):
        assert m.degree - n.degree == (-1 if g.kind is reedy.Kind.COMPOSE else 1)
        assert reedy.apply_generator(ctx, n, g) == m


@settings(max_examples=150, deadline=None)
@given(objects_in())
def test_simplify_is_the_unique_fixpoint(data):
    ctx, n = data
    s = reedy.simplify(ctx, n)
    assert reedy.simplify(ctx, s) == s
    assert not any(a == b == 0 for a, b in zip(s.flags, s.flags[1:]))
    # exhaustive compose-only search: every order of merging ends at s
    seen, stack, fix = {n}, [n], set()
    while stack:
        x = stack.pop()
        nxt = [y for g, y in reedy.successors(ctx, x) if g.kind is reedy.Kind.COMPOSE]
        if not nxt:
            fix.add(x)
        for y in nxt:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    assert fix == {s}
    assert seen == reedy.minus_reach(ctx, n)


@settings(max_examples=150, deadline=None)
@given(objects_in())
def test_latch_base_is_least(data):
    ctx, n = data
    base = reedy.latch_base(ctx, n)
    assert (base == n) == (n.height == 0)
    assert reedy.leq(ctx, base, n)
    for m in reedy.latching_category(ctx, n).objects:
        assert reedy.leq(ctx, base, m)


@settings(max_examples=60, deadline=None)
@given(objects_in(max_length=4), st.integers(0, 2))
def test_leq_matches_generator_bfs(data, extra):
    ctx, m = data
    bound = m.degree + extra
    reach = reedy.generator_reach(ctx, m, bound)
    assert reedy.up_set(ctx, m, bound) == reach
    for n in reach:
        f = reedy.factorize(ctx, m, n)
        assert f.apply(ctx, m) == n


@settings(max_examples=100, deadline=None)
@given(objects_in())
def test_relations_hold(data):
    ctx, n = data
    assert list(reedy.relation_witnesses(ctx, n)) == []


@settings(max_examples=100, deadline=None)
@given(objects_in())
def test_text_roundtrip(data):
    _, n = data
    assert parse_tuple(str(n)) == n
