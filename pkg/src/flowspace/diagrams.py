"""Diagrams of finite sets indexed by finite posets, and their colimits.

A diagram assigns a finite set to every object of the index poset and a
function to every cover ``lo -> hi``. Functions along longer chains are the
composites of the cover functions; the diagram is functorial when all chains
between the same two objects compose to the same function. This is checked
when the diagram is built.

Colimits are computed as the disjoint union of all values modulo the
equivalence generated by ``(i, x) ~ (j, f(x))`` over the covers. Every class is
named by its least ``(object, element)`` pair under :func:`sort_key`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Any, Callable, Hashable, Iterable, Mapping

from .order import UnionFind, sort_key, sorted_labels


class DiagramError(ValueError):
    pass


class NotFunctorial(DiagramError):
    pass


class NotACocone(DiagramError):
    pass


class CyclicIndex(DiagramError):
    pass


@dataclass(frozen=True)
class FinitePoset:
    objects: tuple
    covers: frozenset = frozenset()
    _order: tuple = field(init=False, repr=False, compare=False)
    _up: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        objs = tuple(sorted_labels(set(self.objects)))
        object.__setattr__(self, "objects", objs)
        object.__setattr__(self, "covers", frozenset(self.covers))
        known = set(objs)
        preds: dict = {o: set() for o in objs}
        for lo, hi in self.covers:
            if lo not in known or hi not in known:
                raise DiagramError(f"cover {lo!r} -> {hi!r} leaves the object set")
            if lo == hi:
                raise CyclicIndex(f"loop at {lo!r}")
            preds[hi].add(lo)
        try:
            order = tuple(TopologicalSorter(preds).static_order())
        except CycleError as exc:
            raise CyclicIndex(f"covers contain a cycle: {exc.args[1]!r}") from None
        object.__setattr__(self, "_order", order)
        up: dict = {o: [] for o in objs}
        for lo, hi in sorted(self.covers, key=sort_key):
            up[lo].append(hi)
        object.__setattr__(self, "_up", up)

    def __len__(self) -> int:
        return len(self.objects)

    def __contains__(self, x) -> bool:
        return x in self._up

    def topological(self) -> tuple:
        return self._order

    def successors(self, x) -> list:
        return self._up[x]

    def up_set(self, x) -> set:
        seen = {x}
        stack = [x]
        while stack:
            for y in self._up[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def leq(self, x, y) -> bool:
        return y in self.up_set(x)

    @classmethod
    def discrete(cls, objects: Iterable) -> "FinitePoset":
        return cls(tuple(objects), frozenset())


@dataclass(frozen=True)
class SetDiagram:
    """A functor from a finite poset to finite sets.

    ``values`` maps objects to collections of hashable elements; ``maps`` maps
    each cover ``(lo, hi)`` to a dict from ``values[lo]`` to ``values[hi]``.
    """

    index: FinitePoset
    values: Mapping[Hashable, frozenset]
    maps: Mapping[tuple, Mapping]
    check: bool = True

    def __post_init__(self):
        vals = {o: frozenset(self.values.get(o, ())) for o in self.index.objects}
        extra = set(self.values) - set(vals)
        if extra:
            raise DiagramError(f"values given for objects outside the index: {sorted_labels(extra)[:3]!r}")
        maps = {}
        for lo, hi in self.index.covers:
            given = self.maps.get((lo, hi))
            if given is None:
                if vals[lo]:
                    raise DiagramError(f"no function for cover {lo!r} -> {hi!r}")
                given = {}
            fn = dict(given)
            for x in vals[lo]:
                if x not in fn:
                    raise DiagramError(f"function {lo!r} -> {hi!r} undefined at {x!r}")
                if fn[x] not in vals[hi]:
                    raise DiagramError(f"function {lo!r} -> {hi!r} sends {x!r} outside the codomain")
            maps[(lo, hi)] = {x: fn[x] for x in vals[lo]}
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "maps", maps)
        if self.check:
            witness = functoriality_witness(self)
            if witness is not None:
                raise NotFunctorial(witness)

    def value(self, obj) -> frozenset:
        return self.values[obj]

    def map(self, lo, hi) -> dict:
        return self.maps[(lo, hi)]

    def elements(self):
        for o in self.index.objects:
            for x in sorted_labels(self.values[o]):
                yield o, x

    def restrict(self, objects: Iterable) -> "SetDiagram":
        """The full subdiagram on ``objects``."""
        keep = set(objects)
        index = FinitePoset(
            tuple(keep),
            frozenset((lo, hi) for lo, hi in self.index.covers if lo in keep and hi in keep),
        )
        return SetDiagram(
            index,
            {o: self.values[o] for o in keep},
            {c: self.maps[c] for c in index.covers},
            check=False,
        )


def functoriality_witness(d: SetDiagram) -> str | None:
    """Return a description of two disagreeing chains, or None if functorial.

    For each source object, the transported function to every object above it
    is computed once per incoming cover; any disagreement is a witness.
    """
    index = d.index
    order = index.topological()
    position = {o: k for k, o in enumerate(order)}
    incoming: dict = {o: [] for o in order}
    for lo, hi in index.covers:
        incoming[hi].append(lo)
    for src in order:
        if not d.values[src]:
            continue
        reach = index.up_set(src)
        transported = {src: {x: x for x in d.values[src]}}
        for obj in sorted(reach, key=position.__getitem__):
            if obj == src:
                continue
            result = None
            via = None
            for lo in incoming[obj]:
                if lo not in transported:
                    continue
                f = d.maps[(lo, obj)]
                candidate = {x: f[y] for x, y in transported[lo].items()}
                if result is None:
                    result, via = candidate, lo
                elif candidate != result:
                    bad = next(x for x in result if result[x] != candidate[x])
                    return (
                        f"chains {src!r} -> ... -> {via!r} -> {obj!r} and "
                        f"{src!r} -> ... -> {lo!r} -> {obj!r} disagree at {bad!r}"
                    )
            transported[obj] = result
    return None


@dataclass(frozen=True)
class ColimitResult:
    """The colimit apex and the injections of every ``(object, element)``.

    Class identifiers are the least ``(object, element)`` pair of each class.
    """

    apex: tuple
    injection: Mapping[tuple, tuple]

    def inject(self, obj, x) -> tuple:
        return self.injection[(obj, x)]

    def members(self) -> dict:
        out: dict = {c: [] for c in self.apex}
        for pair, c in self.injection.items():
            out[c].append(pair)
        for c in out:
            out[c].sort(key=sort_key)
        return out

    def __len__(self) -> int:
        return len(self.apex)


def colimit(d: SetDiagram) -> ColimitResult:
    uf = UnionFind(d.elements())
    for (lo, hi), fn in d.maps.items():
        for x, y in fn.items():
            uf.union((lo, x), (hi, y))
    rep = uf.classes()
    return ColimitResult(tuple(sorted_labels(set(rep.values()))), rep)


def cocone_factorization(
    d: SetDiagram,
    legs: Mapping[Hashable, Mapping | Callable],
    result: ColimitResult | None = None,
) -> dict:
    """The unique function ``h`` on the apex with ``h(inject(i, x)) = legs[i](x)``."""
    if result is None:
        result = colimit(d)

    def leg(obj, x):
        f = legs[obj]
        return f(x) if callable(f) else f[x]

    for (lo, hi), fn in d.maps.items():
        for x, y in fn.items():
            if leg(lo, x) != leg(hi, y):
                raise NotACocone(f"leg at {lo!r} and leg at {hi!r} disagree on {x!r}")
    h: dict = {}
    for obj, x in d.elements():
        c = result.inject(obj, x)
        v = leg(obj, x)
        if h.setdefault(c, v) != v:
            raise NotACocone(f"legs disagree inside class {c!r}")
    return h


def sum_diagrams(ds: list[SetDiagram]) -> SetDiagram:
    """Disjoint sum: objects are ``(k, obj)`` for the k-th summand."""
    objects = []
    covers = set()
    values = {}
    maps = {}
    for k, d in enumerate(ds):
        for o in d.index.objects:
            objects.append((k, o))
            values[(k, o)] = d.values[o]
        for (lo, hi), fn in d.maps.items():
            covers.add(((k, lo), (k, hi)))
            maps[((k, lo), (k, hi))] = fn
    return SetDiagram(FinitePoset(tuple(objects), frozenset(covers)), values, maps, check=False)


def product_diagram(a: SetDiagram, b: SetDiagram) -> SetDiagram:
    """Pointwise product over the product poset; maps act coordinatewise."""
    objects = [(i, j) for i in a.index.objects for j in b.index.objects]
    covers = set()
    maps = {}
    for (lo, hi), fn in a.maps.items():
        for j in b.index.objects:
            covers.add(((lo, j), (hi, j)))
            maps[((lo, j), (hi, j))] = {(x, y): (fn[x], y) for x in a.values[lo] for y in b.values[j]}
    for (lo, hi), fn in b.maps.items():
        for i in a.index.objects:
            covers.add(((i, lo), (i, hi)))
            maps[((i, lo), (i, hi))] = {(x, y): (x, fn[y]) for x in a.values[i] for y in b.values[lo]}
    values = {
        (i, j): frozenset((x, y) for x in a.values[i] for y in b.values[j])
        for i, j in objects
    }
    return SetDiagram(FinitePoset(tuple(objects), frozenset(covers)), values, maps, check=False)


def product_comparison(a: SetDiagram, b: SetDiagram) -> tuple[dict, bool]:
    """The canonical map colim(a x b) -> colim(a) x colim(b) and whether it is bijective."""
    ca, cb = colimit(a), colimit(b)
    p = product_diagram(a, b)
    cp = colimit(p)
    phi: dict = {}
    well_defined = True
    for (i, j), (x, y) in p.elements():
        c = cp.inject((i, j), (x, y))
        image = (ca.inject(i, x), cb.inject(j, y))
        if phi.setdefault(c, image) != image:
            well_defined = False
    target = {(s, t) for s in ca.apex for t in cb.apex}
    bijective = well_defined and len(set(phi.values())) == len(phi) and set(phi.values()) == target
    return phi, bijective


def sum_comparison(ds: list[SetDiagram]) -> tuple[dict, bool]:
    """The canonical map colim(sum) -> disjoint union of the colimits, and bijectivity."""
    total = colimit(sum_diagrams(ds))
    parts = [colimit(d) for d in ds]
    phi: dict = {}
    well_defined = True
    for k, d in enumerate(ds):
        for o, x in d.elements():
            c = total.inject((k, o), x)
            image = (k, parts[k].inject(o, x))
            if phi.setdefault(c, image) != image:
                well_defined = False
    target = {(k, c) for k, part in enumerate(parts) for c in part.apex}
    bijective = well_defined and len(set(phi.values())) == len(phi) and set(phi.values()) == target
    return phi, bijective


def is_minimal(d: SetDiagram, result: ColimitResult) -> bool:
    """Check that no two apex classes can be merged without losing a witness.

    Two elements lie in one class only when a zigzag of cover maps joins them;
    recomputing the classes from scratch with a fresh union-find and comparing
    partitions confirms the equivalence is the generated one and not coarser.
    """
    uf = UnionFind(d.elements())
    for (lo, hi), fn in d.maps.items():
        for x, y in fn.items():
            uf.union((lo, x), (hi, y))
    for pair, c in result.injection.items():
        if uf.find(pair) != uf.find(c):
            return False
    roots = {uf.find(c) for c in result.apex}
    return len(roots) == len(result.apex)


def coequalizes(d: SetDiagram, result: ColimitResult) -> bool:
    for (lo, hi), fn in d.maps.items():
        for x, y in fn.items():
            if result.inject(lo, x) != result.inject(hi, y):
                return False
    return set(result.injection.values()) == set(result.apex)


def constant_diagram(index: FinitePoset, value: Iterable[Any]) -> SetDiagram:
    vs = frozenset(value)
    return SetDiagram(
        index,
        {o: vs for o in index.objects},
        {c: {x: x for x in vs} for c in index.covers},
        check=False,
    )
