"""The poset of flagged cell chains over a set of states.

An object is a nonempty chain of cells ``(x, e, y)`` with consecutive cells
sharing an endpoint; the flag ``e`` may be 1 only on the distinguished pair
``(u, v)``. Two kinds of generating arrows act on chains:

* ``Compose`` at position i merges cells i and i+1 when both flags are 0;
* ``Include`` at position i raises the flag of cell i from 0 to 1.

Positions are 1-based and name the first affected cell. Composes lower the
degree ``length + height`` by one and includes raise it by one.

Every arrow factors as a run of composes followed by a run of includes, which
gives a terminating decision procedure for the order (:func:`leq`) that is
checked against plain reachability in the generator graph
(:func:`generator_reach`).
"""

from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, Iterator, NamedTuple

from .diagrams import FinitePoset
from .order import sort_key, sorted_labels


class ReedyError(ValueError):
    pass


class NotApplicable(ReedyError):
    pass


class NoArrow(ReedyError):
    pass


class MixedContext(ReedyError):
    pass


class Cell(NamedTuple):
    src: Hashable
    flag: int
    tgt: Hashable

    def __str__(self) -> str:
        return f"({self.src} {self.flag} {self.tgt})"


class TupleObject:
    """A nonempty chain of adjacent cells. Immutable and hashable."""

    __slots__ = ("cells", "_hash", "degree", "_states", "_flags")

    def __init__(self, cells: Iterable):
        cells = tuple(Cell(*c) for c in cells)
        if not cells:
            raise ReedyError("a chain needs at least one cell")
        for c in cells:
            if c.flag not in (0, 1):
                raise ReedyError(f"flag must be 0 or 1, got {c.flag!r}")
        for left, right in zip(cells, cells[1:]):
            if left.tgt != right.src:
                raise ReedyError(f"cells {left} and {right} are not adjacent")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "_hash", hash(cells))
        object.__setattr__(self, "degree", len(cells) + sum(c.flag for c in cells))

    @classmethod
    def _raw(cls, cells: tuple, degree: int | None = None) -> "TupleObject":
        obj = object.__new__(cls)
        setattr_ = object.__setattr__
        setattr_(obj, "cells", cells)
        setattr_(obj, "_hash", hash(cells))
        if degree is None:
            degree = len(cells) + sum(c[1] for c in cells)
        setattr_(obj, "degree", degree)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("TupleObject is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TupleObject):
            return NotImplemented
        return self._hash == other._hash and self.cells == other.cells

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (TupleObject, (self.cells,))

    @classmethod
    def of(cls, *cells) -> "TupleObject":
        return cls(tuple(cells))

    @classmethod
    def from_states(cls, states: Iterable, flags: Iterable[int]) -> "TupleObject":
        st = tuple(states)
        return cls(tuple(Cell(a, e, b) for a, e, b in zip(st, flags, st[1:])))

    @property
    def length(self) -> int:
        return len(self.cells)

    @property
    def height(self) -> int:
        return self.degree - len(self.cells)

    @property
    def states(self) -> tuple:
        try:
            return self._states
        except AttributeError:
            st = (self.cells[0][0],) + tuple(c[2] for c in self.cells)
            object.__setattr__(self, "_states", st)
            return st

    @property
    def flags(self) -> tuple[int, ...]:
        try:
            return self._flags
        except AttributeError:
            fl = tuple(c[1] for c in self.cells)
            object.__setattr__(self, "_flags", fl)
            return fl

    @property
    def source(self):
        return self.cells[0].src

    @property
    def target(self):
        return self.cells[-1].tgt

    def __add__(self, other: "TupleObject") -> "TupleObject":
        if self.target != other.source:
            raise ReedyError(f"cannot concatenate {self} and {other}")
        return TupleObject._raw(self.cells + other.cells)

    def __str__(self) -> str:
        return "".join(str(c) for c in self.cells)

    def __repr__(self) -> str:
        return f"TupleObject({self})"

    def _sort_key(self):
        return sort_key(tuple(tuple(c) for c in self.cells))


def parse_tuple(text: str) -> TupleObject:
    """Parse the text form ``(a 0 b)(b 1 c)``; labels that look like ints become ints."""
    cells = []
    rest = text.strip()
    while rest:
        if not rest.startswith("("):
            raise ReedyError(f"expected '(' at {rest!r}")
        close = rest.find(")")
        if close < 0:
            raise ReedyError(f"unclosed cell in {text!r}")
        parts = rest[1:close].split()
        if len(parts) != 3 or parts[1] not in ("0", "1"):
            raise ReedyError(f"malformed cell {rest[:close + 1]!r}")
        a, e, b = parts
        cells.append(Cell(parse_label(a), int(e), parse_label(b)))
        rest = rest[close + 1:].strip()
    return TupleObject(tuple(cells))


def parse_label(s: str):
    try:
        return int(s)
    except ValueError:
        return s


@dataclass(frozen=True)
class PosetContext:
    states: frozenset
    u: Hashable
    v: Hashable

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        if not self.states:
            raise ReedyError("the state set must be nonempty")
        if self.u not in self.states or self.v not in self.states:
            raise ReedyError(f"u={self.u!r} and v={self.v!r} must be states")

    def contains(self, obj: TupleObject) -> bool:
        for c in obj.cells:
            if c.src not in self.states or c.tgt not in self.states:
                return False
            if c.flag == 1 and (c.src, c.tgt) != (self.u, self.v):
                return False
        return True

    def check(self, *objs: TupleObject) -> None:
        for obj in objs:
            if not self.contains(obj):
                raise MixedContext(f"{obj} is not an object over states "
                                   f"{sorted_labels(self.states)} with (u, v) = ({self.u}, {self.v})")

    def is_distinguished(self, cell: Cell) -> bool:
        return (cell.src, cell.tgt) == (self.u, self.v)


class Kind(Enum):
    COMPOSE = "c"
    INCLUDE = "I"


class GeneratorArrow(NamedTuple):
    kind: Kind
    position: int

    def __str__(self) -> str:
        return f"{self.kind.value}{self.position}"


def Compose(i: int) -> GeneratorArrow:
    return GeneratorArrow(Kind.COMPOSE, i)


def Include(i: int) -> GeneratorArrow:
    return GeneratorArrow(Kind.INCLUDE, i)


class _Table(dict):
    def __init__(self, kind):
        super().__init__()
        self.kind = kind

    def __missing__(self, i):
        g = self[i] = GeneratorArrow(self.kind, i)
        return g


_COMPOSE = _Table(Kind.COMPOSE)
_INCLUDE = _Table(Kind.INCLUDE)


def applicable(ctx: PosetContext, obj: TupleObject, gen: GeneratorArrow) -> bool:
    i = gen.position - 1
    cells = obj.cells
    if gen.kind is Kind.COMPOSE:
        return 0 <= i < len(cells) - 1 and cells[i].flag == 0 and cells[i + 1].flag == 0
    return 0 <= i < len(cells) and cells[i].flag == 0 and ctx.is_distinguished(cells[i])


def apply_generator(ctx: PosetContext, obj: TupleObject, gen: GeneratorArrow) -> TupleObject:
    if not applicable(ctx, obj, gen):
        raise NotApplicable(f"{gen} does not apply to {obj}")
    i = gen.position - 1
    cells = obj.cells
    if gen.kind is Kind.COMPOSE:
        merged = Cell(cells[i].src, 0, cells[i + 1].tgt)
        return TupleObject._raw(cells[:i] + (merged,) + cells[i + 2:])
    raised = Cell(cells[i].src, 1, cells[i].tgt)
    return TupleObject._raw(cells[:i] + (raised,) + cells[i + 1:])


def generators(ctx: PosetContext, obj: TupleObject) -> Iterator[GeneratorArrow]:
    """All generators applicable to ``obj``, composes first."""
    n = obj.length
    for i in range(1, n):
        g = Compose(i)
        if applicable(ctx, obj, g):
            yield g
    for i in range(1, n + 1):
        g = Include(i)
        if applicable(ctx, obj, g):
            yield g


def successors(ctx: PosetContext, obj: TupleObject) -> Iterator[tuple[GeneratorArrow, TupleObject]]:
    """Pairs ``(gen, apply_generator(ctx, obj, gen))`` for every applicable generator."""
    cells = obj.cells
    n = len(cells)
    d = obj.degree
    for i in range(n - 1):
        if cells[i][1] == 0 and cells[i + 1][1] == 0:
            merged = Cell(cells[i][0], 0, cells[i + 1][2])
            yield _COMPOSE[i + 1], TupleObject._raw(cells[:i] + (merged,) + cells[i + 2:], d - 1)
    u, v = ctx.u, ctx.v
    for i in range(n):
        c = cells[i]
        if c[1] == 0 and c[0] == u and c[2] == v:
            yield _INCLUDE[i + 1], TupleObject._raw(cells[:i] + (Cell(u, 1, v),) + cells[i + 1:], d + 1)


def apply_word(ctx: PosetContext, obj: TupleObject, word: Iterable[GeneratorArrow]) -> TupleObject:
    """Apply generators in the order given (leftmost first)."""
    for g in word:
        obj = apply_generator(ctx, obj, g)
    return obj


def simplify(ctx: PosetContext, n: TupleObject) -> TupleObject:
    """Merge every maximal run of flag-0 cells into a single cell."""
    out: list[Cell] = []
    for c in n.cells:
        if out and c.flag == 0 and out[-1].flag == 0:
            out[-1] = Cell(out[-1].src, 0, c.tgt)
        else:
            out.append(c)
    return TupleObject(tuple(out))


def is_simplifiable(n: TupleObject) -> bool:
    return any(a.flag == 0 and b.flag == 0 for a, b in zip(n.cells, n.cells[1:]))


def latch_base(ctx: PosetContext, n: TupleObject) -> TupleObject:
    return TupleObject(tuple(Cell(c.src, 0, c.tgt) for c in n.cells))


@functools.lru_cache(maxsize=4096)
def _segmentations(flags: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Cut points ``0 = i_0 < ... < i_k = n`` whose multi-cell segments hold only 0 flags."""
    return tuple(_iter_segmentations(flags))


def _iter_segmentations(flags: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    n = len(flags)

    def rec(start):
        if start == n:
            yield ()
            return
        yield from ((start + 1,) + rest for rest in rec(start + 1))
        if flags[start] == 0:
            end = start + 1
            while end < n and flags[end] == 0:
                end += 1
                for rest in rec(end):
                    yield (end,) + rest

    for cuts in rec(0):
        yield (0,) + cuts


def _contract(obj: TupleObject, cuts: tuple[int, ...]) -> TupleObject:
    cells = obj.cells
    out = []
    degree = 0
    for a, b in zip(cuts, cuts[1:]):
        if b - a == 1:
            out.append(cells[a])
            degree += 1 + cells[a][1]
        else:
            out.append(Cell(cells[a][0], 0, cells[b - 1][2]))
            degree += 1
    return TupleObject._raw(tuple(out), degree)


def _removed(cuts: tuple[int, ...], length: int) -> tuple[int, ...]:
    kept = set(cuts)
    return tuple(i for i in range(1, length) if i not in kept)


def minus_reach(ctx: PosetContext, m: TupleObject) -> set[TupleObject]:
    """All targets of compose-only arrows out of ``m`` (``m`` included)."""
    return {_contract(m, cuts) for cuts in _segmentations(m.flags)}


def plus_leq(m: TupleObject, n: TupleObject) -> bool:
    """An include-only arrow ``m -> n`` exists."""
    return m.states == n.states and all(a <= b for a, b in zip(m.flags, n.flags))


def leq(ctx: PosetContext, m: TupleObject, n: TupleObject) -> bool:
    ctx.check(m, n)
    if n.length > m.length or m.source != n.source or m.target != n.target:
        return False
    return any(plus_leq(k, n) for k in minus_reach(ctx, m))


def up_set(ctx: PosetContext, m: TupleObject, max_degree: int | None = None) -> set[TupleObject]:
    """Every ``n`` with ``leq(m, n)``, optionally limited to degree <= max_degree."""
    out = set()
    raised = Cell(ctx.u, 1, ctx.v)
    for k in minus_reach(ctx, m):
        free = [i for i, c in enumerate(k.cells) if c.flag == 0 and ctx.is_distinguished(c)]
        for r in range(len(free) + 1):
            if max_degree is not None and k.degree + r > max_degree:
                break
            for chosen in itertools.combinations(free, r):
                cells = list(k.cells)
                for i in chosen:
                    cells[i] = raised
                out.add(TupleObject._raw(tuple(cells), k.degree + r))
    return out


class ArrowFactorization(NamedTuple):
    """``m -> n`` as composes followed by includes.

    ``minus_word`` lists compose positions in strictly increasing order, read
    as a composite: the rightmost generator acts first, so no position needs
    shifting. ``plus_word`` lists the flag positions raised on ``middle``.
    """

    minus_word: tuple[GeneratorArrow, ...]
    middle: TupleObject
    plus_word: tuple[GeneratorArrow, ...]

    def apply_minus(self, ctx: PosetContext, m: TupleObject) -> TupleObject:
        return apply_word(ctx, m, reversed(self.minus_word))

    def apply(self, ctx: PosetContext, m: TupleObject) -> TupleObject:
        return apply_word(ctx, self.apply_minus(ctx, m), self.plus_word)


def middles(ctx: PosetContext, m: TupleObject, n: TupleObject) -> dict[TupleObject, tuple[int, ...]]:
    """Each possible middle object of an arrow m -> n, with its least removed-state tuple."""
    ctx.check(m, n)
    found: dict[TupleObject, tuple[int, ...]] = {}
    k = n.length
    if k > m.length or m.source != n.source or m.target != n.target:
        return found
    m_states = m.states
    n_states = n.states
    m_flags = m.flags
    n_flags = n.flags
    for cuts in _segmentations(m_flags):
        if len(cuts) != k + 1:
            continue
        if any(m_states[c] != t for c, t in zip(cuts, n_states)):
            continue
        flags = tuple(m_flags[a] if b - a == 1 else 0 for a, b in zip(cuts, cuts[1:]))
        if any(e > f for e, f in zip(flags, n_flags)):
            continue
        middle = _contract(m, cuts)
        removed = _removed(cuts, m.length)
        if middle not in found or removed < found[middle]:
            found[middle] = removed
    return found


def factorize(ctx: PosetContext, m: TupleObject, n: TupleObject) -> ArrowFactorization:
    """Canonical factorization of the arrow ``m -> n``.

    If several middle objects are possible (only when u == v), the one reached
    by the lexicographically least set of removed states is returned.
    """
    found = middles(ctx, m, n)
    if not found:
        raise NoArrow(f"no arrow {m} -> {n}")
    middle, removed = min(found.items(), key=lambda kv: kv[1])
    minus = tuple(Compose(i) for i in removed)
    plus = tuple(Include(i + 1) for i, (a, b) in enumerate(zip(middle.flags, n.flags)) if a < b)
    return ArrowFactorization(minus, middle, plus)


def generator_reach(ctx: PosetContext, m: TupleObject, max_degree: int) -> set[TupleObject]:
    """Brute-force reachability in the raw generator graph, bounded by degree."""
    seen = {m}
    queue = deque([m])
    while queue:
        x = queue.popleft()
        for _, y in successors(ctx, x):
            if y.degree <= max_degree and y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def word_middles(ctx: PosetContext, m: TupleObject, max_degree: int) -> dict[TupleObject, set[TupleObject]]:
    """For each target reachable from ``m``, the middles of every generator word.

    A word is tracked by the segmentation of the cells of ``m`` it has merged;
    rewriting the word into composes-then-includes merges exactly those
    segments, so the segmentation determines the middle object.
    """
    start = (m, tuple((i,) for i in range(m.length)))
    seen = {start}
    queue = deque([start])
    while queue:
        obj, segs = queue.popleft()
        for g, nxt in successors(ctx, obj):
            if nxt.degree > max_degree:
                continue
            if g.kind is Kind.COMPOSE:
                i = g.position - 1
                nsegs = segs[:i] + (segs[i] + segs[i + 1],) + segs[i + 2:]
            else:
                nsegs = segs
            state = (nxt, nsegs)
            if state not in seen:
                seen.add(state)
                queue.append(state)
    out: dict[TupleObject, set[TupleObject]] = {}
    for obj, segs in seen:
        cells = tuple(
            Cell(m.cells[s[0]].src, m.cells[s[0]].flag if len(s) == 1 else 0, m.cells[s[-1]].tgt)
            for s in segs
        )
        out.setdefault(obj, set()).add(TupleObject(cells))
    return out


class Truncation(NamedTuple):
    objects: tuple[TupleObject, ...]
    covers: tuple[tuple[TupleObject, TupleObject, GeneratorArrow], ...]

    def poset(self) -> FinitePoset:
        return FinitePoset(self.objects, frozenset((a, b) for a, b, _ in self.covers))


def object_key(obj: TupleObject):
    return (obj.degree, obj._sort_key())


def enumerate_up_to(ctx: PosetContext, max_degree: int) -> Truncation:
    """All objects of degree <= max_degree with their single-generator covers."""
    if max_degree < 1:
        raise ReedyError("max_degree must be at least 1")
    states = sorted_labels(ctx.states)
    objs = []
    for n in range(1, max_degree + 1):
        for chain in itertools.product(states, repeat=n + 1):
            free = [i for i in range(n) if (chain[i], chain[i + 1]) == (ctx.u, ctx.v)]
            for r in range(min(len(free), max_degree - n) + 1):
                for chosen in itertools.combinations(free, r):
                    flags = [0] * n
                    for i in chosen:
                        flags[i] = 1
                    objs.append(TupleObject.from_states(chain, flags))
    objs.sort(key=object_key)
    covers = []
    for x in objs:
        for g, y in successors(ctx, x):
            if y.degree <= max_degree:
                covers.append((x, y, g))
    return Truncation(tuple(objs), tuple(covers))


def latching_category(ctx: PosetContext, n: TupleObject) -> FinitePoset:
    """Objects with an include-only arrow into ``n``, ``n`` excluded."""
    ctx.check(n)
    raised = [i for i, e in enumerate(n.flags) if e == 1]
    objs = []
    for r in range(len(raised)):
        for kept in itertools.combinations(raised, r):
            flags = [0 if (e == 1 and i not in kept) else e for i, e in enumerate(n.flags)]
            objs.append(TupleObject.from_states(n.states, flags))
    covers = set()
    members = set(objs)
    for x in objs:
        for i, c in enumerate(x.cells):
            if c.flag == 0 and ctx.is_distinguished(c):
                y = apply_generator(ctx, x, Include(i + 1))
                if y in members:
                    covers.add((x, y))
    return FinitePoset(tuple(objs), frozenset(covers))


def matching_category(ctx: PosetContext, n: TupleObject) -> FinitePoset:
    """Proper targets of compose-only arrows out of ``n``."""
    ctx.check(n)
    objs = minus_reach(ctx, n) - {n}
    covers = set()
    for x in objs:
        for g in generators(ctx, x):
            if g.kind is Kind.COMPOSE:
                covers.add((x, apply_generator(ctx, x, g)))
    return FinitePoset(tuple(objs), frozenset(covers))


def relation_witnesses(ctx: PosetContext, obj: TupleObject) -> Iterator[str]:
    """Yield a description of every failed instance of the defining relations at ``obj``.

    Composites are written right-to-left: ``c_i.c_j`` applies ``c_j`` first.
    Group A: ``c_i.c_j = c_{j-1}.c_i`` for i < j.
    Group B: ``I_i.I_j = I_j.I_i`` for i != j.
    Group C: ``c_i.I_j = I_{j-1}.c_i`` for j >= i+2 and ``I_j.c_i`` for j <= i-1.
    """

    def run(*gens):
        x = obj
        for g in reversed(gens):
            if not applicable(ctx, x, g):
                return None
            x = apply_generator(ctx, x, g)
        return x

    # each composite is enumerated from its first-applied generator
    for first, x1 in successors(ctx, obj):
        j = first.position
        for second, lhs in successors(ctx, x1):
            i = second.position
            if first.kind is Kind.COMPOSE and second.kind is Kind.COMPOSE and i < j:
                if lhs != run(Compose(j - 1), Compose(i)):
                    yield f"A: c{i}.c{j} != c{j - 1}.c{i} at {obj}"
            elif first.kind is Kind.INCLUDE and second.kind is Kind.INCLUDE and i != j:
                if lhs != run(Include(j), Include(i)):
                    yield f"B: I{i}.I{j} != I{j}.I{i} at {obj}"
            elif first.kind is Kind.INCLUDE and second.kind is Kind.COMPOSE:
                if j >= i + 2:
                    rhs = run(Include(j - 1), Compose(i))
                elif j <= i - 1:
                    rhs = run(Include(j), Compose(i))
                else:
                    yield f"C: c{i}.I{j} should never be composable, at {obj}"
                    continue
                if lhs != rhs:
                    yield f"C: c{i}.I{j} rewrite fails at {obj}"
