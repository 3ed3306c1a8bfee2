"""Finite flows: states, finite path sets and an associative composition.

Paths are opaque hashable identifiers, each with a source and target state;
``compose[(p, q)]`` is defined exactly when ``tgt(p) == src(q)``. A flow built
by a truncated computation (a word-length cap on a flow with loops) may leave
some composites undefined and is marked ``truncated``.

Pushouts are computed by brute force: every composable word of letters up to
a length bound is listed and the congruence generated by the defining
relations is closed with a union-find. For loop-free inputs the bound
``|states| - 1`` is exact because no composable word can be longer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Any, Hashable, Iterable, Mapping, NamedTuple

from .order import UnionFind, sort_key, sorted_labels


class FlowError(ValueError):
    pass


class NotAssociative(FlowError):
    pass


class NotLoopFreeAndNoCap(FlowError):
    pass


class CapTooSmallToClose(FlowError):
    pass


class NotAFlowMap(FlowError):
    pass


@dataclass(frozen=True)
class DiscreteFlow:
    states: tuple
    paths: Mapping[Hashable, tuple]
    compose: Mapping[tuple, Hashable] = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(sorted_labels(set(self.states))))
        object.__setattr__(self, "paths", {p: tuple(e) for p, e in self.paths.items()})
        object.__setattr__(self, "compose", dict(self.compose))
        problem = self.defect()
        if problem is not None:
            cls = NotAssociative if problem.startswith("associativity") else FlowError
            raise cls(problem)

    def defect(self) -> str | None:
        states = set(self.states)
        for p, (s, t) in self.paths.items():
            if s not in states or t not in states:
                return f"path {p!r} has an endpoint outside the states"
        by_src = self.outgoing()
        for p, (_, t) in self.paths.items():
            for q in by_src.get(t, ()):
                r = self.compose.get((p, q))
                if r is None:
                    if not self.truncated:
                        return f"composite of {p!r} and {q!r} is missing"
                    continue
                if r not in self.paths:
                    return f"composite of {p!r} and {q!r} is not a path"
                if self.paths[r] != (self.paths[p][0], self.paths[q][1]):
                    return f"composite of {p!r} and {q!r} has the wrong endpoints"
        for (p, q) in self.compose:
            if p not in self.paths or q not in self.paths or self.paths[p][1] != self.paths[q][0]:
                return f"compose defined on the non-composable pair ({p!r}, {q!r})"
        for (p, q), pq in self.compose.items():
            for r in by_src.get(self.paths[q][1], ()):
                qr = self.compose.get((q, r))
                left = self.compose.get((pq, r))
                right = self.compose.get((p, qr)) if qr is not None else None
                if left is None or right is None:
                    continue
                if left != right:
                    return f"associativity fails at ({p!r}, {q!r}, {r!r}): {left!r} != {right!r}"
        return None

    def src(self, p):
        return self.paths[p][0]

    def tgt(self, p):
        return self.paths[p][1]

    def outgoing(self) -> dict:
        out: dict = {}
        for p in sorted_labels(self.paths):
            out.setdefault(self.paths[p][0], []).append(p)
        return out

    def hom(self, alpha, beta) -> list:
        return sorted_labels(p for p, e in self.paths.items() if e == (alpha, beta))

    def hom_sets(self) -> dict:
        out: dict = {}
        for p, e in self.paths.items():
            out.setdefault(e, []).append(p)
        return {e: sorted_labels(ps) for e, ps in out.items()}

    def block_counts(self) -> dict:
        return {e: len(ps) for e, ps in self.hom_sets().items()}


@dataclass(frozen=True)
class FlowMap:
    state_map: Mapping
    path_map: Mapping

    def __post_init__(self):
        object.__setattr__(self, "state_map", dict(self.state_map))
        object.__setattr__(self, "path_map", dict(self.path_map))

    @classmethod
    def identity(cls, x: DiscreteFlow) -> "FlowMap":
        return cls({s: s for s in x.states}, {p: p for p in x.paths})

    def then(self, other: "FlowMap") -> "FlowMap":
        return FlowMap(
            {s: other.state_map[t] for s, t in self.state_map.items()},
            {p: other.path_map[q] for p, q in self.path_map.items()},
        )

    def injective_on_paths(self) -> bool:
        return len(set(self.path_map.values())) == len(self.path_map)


def flow_map_defect(src: DiscreteFlow, dst: DiscreteFlow, f: FlowMap) -> str | None:
    for s in src.states:
        if f.state_map.get(s, _MISSING) not in dst.states:
            return f"state {s!r} is not sent to a state"
    for p, (s, t) in src.paths.items():
        q = f.path_map.get(p, _MISSING)
        if q not in dst.paths:
            return f"path {p!r} is not sent to a path"
        if dst.paths[q] != (f.state_map[s], f.state_map[t]):
            return f"path {p!r} changes endpoints"
    for (p, q), r in src.compose.items():
        image = dst.compose.get((f.path_map[p], f.path_map[q]))
        if image != f.path_map[r]:
            return f"composite of {p!r} and {q!r} is not preserved"
    return None


_MISSING = object()


def verify_flow_map(src: DiscreteFlow, dst: DiscreteFlow, f: FlowMap) -> bool:
    return flow_map_defect(src, dst, f) is None


@dataclass(frozen=True)
class GlobAttachment:
    """Attach the globe on ``cells`` to the flow along ``boundary``.

    ``attach`` sends each boundary element to a path from ``g0`` to ``g1``;
    ``incl`` sends it into ``cells``. Neither needs to be injective.
    """

    g0: Hashable
    g1: Hashable
    boundary: tuple
    cells: tuple
    attach: Mapping
    incl: Mapping

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(sorted_labels(set(self.boundary))))
        object.__setattr__(self, "cells", tuple(sorted_labels(set(self.cells))))
        object.__setattr__(self, "attach", dict(self.attach))
        object.__setattr__(self, "incl", dict(self.incl))
        for s in self.boundary:
            if s not in self.attach or s not in self.incl:
                raise FlowError(f"boundary element {s!r} lacks attach or incl data")
            if self.incl[s] not in self.cells:
                raise FlowError(f"incl sends {s!r} outside the cells")

    def check_against(self, a: DiscreteFlow) -> None:
        if self.g0 not in a.states or self.g1 not in a.states:
            raise FlowError("attachment endpoints are not states of the flow")
        for s in self.boundary:
            p = self.attach[s]
            if p not in a.paths or a.paths[p] != (self.g0, self.g1):
                raise FlowError(f"attach sends {s!r} to {p!r}, not a path from g0 to g1")


def identity_attachment(a: DiscreteFlow, g0, g1) -> GlobAttachment:
    """The attachment with boundary = cells = the paths from g0 to g1 and identity maps."""
    ps = a.hom(g0, g1)
    return GlobAttachment(g0, g1, tuple(ps), tuple(ps), {p: p for p in ps}, {p: p for p in ps})


class AttachedCellSet(NamedTuple):
    """The set pushout of ``attach`` along ``incl``.

    Classes are named by their least tagged member ``("A", path)`` or
    ``("Z", cell)``; old paths sort first.
    """

    classes: tuple
    from_path: dict
    from_cell: dict


def attached_cells(a: DiscreteFlow, att: GlobAttachment) -> AttachedCellSet:
    att.check_against(a)
    olds = [("A", p) for p in a.hom(att.g0, att.g1)]
    news = [("Z", z) for z in att.cells]
    uf = UnionFind(olds + news)
    for s in att.boundary:
        uf.union(("A", att.attach[s]), ("Z", att.incl[s]))
    rep = uf.classes()
    return AttachedCellSet(
        tuple(sorted_labels(set(rep.values()))),
        {p: rep[("A", p)] for _, p in olds},
        {z: rep[("Z", z)] for _, z in news},
    )


def make_glob(z: Iterable) -> DiscreteFlow:
    return DiscreteFlow((0, 1), {c: (0, 1) for c in z}, {})


def _acyclic(states: Iterable, edges: Iterable[tuple]) -> bool:
    graph: dict = {s: set() for s in states}
    for a, b in edges:
        if a == b:
            return False
        graph.setdefault(b, set()).add(a)
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError:
        return False
    return True


def is_loop_free(a: DiscreteFlow, att: GlobAttachment | None = None) -> bool:
    edges = set(a.paths.values())
    if att is not None and att.cells:
        edges.add((att.g0, att.g1))
    return _acyclic(a.states, edges)


def word_key(w: tuple):
    return (len(w), sort_key(w))


class WordCongruence:
    """Composable words over ``letters`` up to ``bound`` letters, modulo relations.

    ``contractions[(x, y)] = z`` relates the word ``x y`` to ``z``;
    ``equations`` lists pairs of single letters to identify. Both are closed
    under left and right multiplication by words.
    """

    def __init__(
        self,
        letters: Mapping[Hashable, tuple],
        contractions: Mapping[tuple, Hashable],
        equations: Iterable[tuple],
        bound: int,
        capped: bool = False,
    ):
        self.letters = dict(letters)
        self.contractions = dict(contractions)
        self.bound = bound
        self.capped = capped
        self.partners: dict = {}
        for x, y in equations:
            if self.letters[x] != self.letters[y]:
                raise FlowError(f"equation {x!r} = {y!r} relates letters with different endpoints")
            self.partners.setdefault(x, set()).add(y)
            self.partners.setdefault(y, set()).add(x)
        for (x, y), z in self.contractions.items():
            if self.letters[x][1] != self.letters[y][0]:
                raise FlowError(f"contraction of non-composable letters {x!r}, {y!r}")
            if self.letters[z] != (self.letters[x][0], self.letters[y][1]):
                raise FlowError(f"contraction {x!r}.{y!r} -> {z!r} changes endpoints")
        self.words = self._enumerate()
        self._close()

    def _enumerate(self) -> list[tuple]:
        by_src: dict = {}
        for x in sorted_labels(self.letters):
            by_src.setdefault(self.letters[x][0], []).append(x)
        words = []
        frontier = [(x,) for x in sorted_labels(self.letters)]
        length = 1
        while frontier:
            words.extend(frontier)
            if length == self.bound:
                break
            frontier = [w + (y,) for w in frontier for y in by_src.get(self.letters[w[-1]][1], ())]
            length += 1
        return words

    def _union_find(self, words: list[tuple]) -> UnionFind:
        uf = UnionFind(words)
        known = set(words)
        for w in words:
            for i in range(len(w) - 1):
                z = self.contractions.get((w[i], w[i + 1]))
                if z is not None:
                    uf.union(w, w[:i] + (z,) + w[i + 2:])
            for i, x in enumerate(w):
                for y in self.partners.get(x, ()):
                    v = w[:i] + (y,) + w[i + 1:]
                    if v in known:
                        uf.union(w, v)
        return uf

    def _close(self) -> None:
        uf = self._union_find(self.words)
        if self.capped:
            self._check_stable(uf)
        groups: dict = {}
        for w in self.words:
            groups.setdefault(uf.find(w), []).append(w)
        self.cls: dict = {}
        self.members: dict = {}
        for ws in groups.values():
            ws.sort(key=word_key)
            rep = ws[0]
            self.members[rep] = ws
            for w in ws:
                self.cls[w] = rep
        for rep, ws in self.members.items():
            ends = {self.endpoints(w) for w in ws}
            if len(ends) != 1:
                raise FlowError(f"class of {rep!r} mixes endpoints {sorted_labels(ends)!r}")

    def _check_stable(self, uf: UnionFind) -> None:
        """Raise if one more letter of room would merge two classes of bounded words."""
        by_src: dict = {}
        for x in sorted_labels(self.letters):
            by_src.setdefault(self.letters[x][0], []).append(x)
        longer = [w + (y,) for w in self.words if len(w) == self.bound
                  for y in by_src.get(self.letters[w[-1]][1], ())]
        wide = self._union_find(self.words + longer)
        roots: dict = {}
        for w in self.words:
            r = uf.find(w)
            if roots.setdefault(wide.find(w), r) != r:
                raise CapTooSmallToClose(
                    f"words {roots[wide.find(w)]!r} and {w!r} are identified only through "
                    f"words longer than the cap {self.bound}")

    def endpoints(self, w: tuple) -> tuple:
        return (self.letters[w[0]][0], self.letters[w[-1]][1])

    def classes(self) -> list[tuple]:
        return sorted(self.members, key=word_key)

    def to_flow(self) -> DiscreteFlow:
        paths = {rep: self.endpoints(rep) for rep in self.members}
        compose = {}
        by_src: dict = {}
        for rep in self.members:
            by_src.setdefault(paths[rep][0], []).append(rep)
        for p in self.members:
            for q in by_src.get(paths[p][1], ()):
                r = self.cls.get(p + q)
                if r is None and self.capped:
                    r = next(
                        (self.cls[x + y] for x in self.members[p] for y in self.members[q]
                         if x + y in self.cls),
                        None,
                    )
                if r is not None:
                    compose[(p, q)] = r
        states = {s for e in self.letters.values() for s in e}
        return DiscreteFlow(tuple(states), paths, compose, truncated=self.capped)


def _word_bound(states: Iterable, edges: Iterable[tuple], cap: int | None) -> tuple[int, bool]:
    states = list(states)
    if _acyclic(states, edges):
        return max(1, len(states) - 1), False
    if cap is None:
        raise NotLoopFreeAndNoCap("the flow has loops; pass a word-length cap")
    if cap < 1:
        raise FlowError("cap must be at least 1")
    return cap, True


class GlobPushout(NamedTuple):
    flow: DiscreteFlow
    base_map: FlowMap
    cell_map: dict


def pushout_glob_oracle(a: DiscreteFlow, att: GlobAttachment, cap: int | None = None) -> GlobPushout:
    """The pushout of ``a`` along the globe attachment, by word congruence.

    Letters are ``("A", p)`` for paths of ``a`` and ``("T", t)`` for classes of
    the attached cell set. Result paths are the least word of each class.
    """
    cells = attached_cells(a, att)
    letters = {("A", p): e for p, e in a.paths.items()}
    for t in cells.classes:
        letters[("T", t)] = (att.g0, att.g1)
    contractions = {(("A", p), ("A", q)): ("A", r) for (p, q), r in a.compose.items()}
    equations = [(("T", cells.from_path[q]), ("A", q)) for q in cells.from_path]
    edges = set(a.paths.values())
    if att.cells:
        edges.add((att.g0, att.g1))
    bound, capped = _word_bound(a.states, edges, cap)
    engine = WordCongruence(letters, contractions, equations, bound, capped)
    flow = engine.to_flow()
    flow = _with_states(flow, a.states)
    base = FlowMap({s: s for s in a.states}, {p: engine.cls[(("A", p),)] for p in a.paths})
    cell_map = {z: engine.cls[(("T", cells.from_cell[z]),)] for z in att.cells}
    return GlobPushout(flow, base, cell_map)


def _with_states(x: DiscreteFlow, states: Iterable) -> DiscreteFlow:
    return DiscreteFlow(tuple(set(x.states) | set(states)), x.paths, x.compose, x.truncated)


def fresh_state(states: Iterable):
    taken = set(states)
    ints = [s for s in taken if isinstance(s, int) and not isinstance(s, bool)]
    k = max(ints) + 1 if ints else 0
    while k in taken:
        k += 1
    if all(isinstance(s, str) for s in taken) and taken:
        k = 0
        while f"s{k}" in taken:
            k += 1
        return f"s{k}"
    return k


class StatePushout(NamedTuple):
    flow: DiscreteFlow
    base_map: FlowMap
    new_paths: tuple


def pushout_add_state(a: DiscreteFlow) -> StatePushout:
    """Pushout along the inclusion of the empty flow into a point."""
    s = fresh_state(a.states)
    x = DiscreteFlow(a.states + (s,), a.paths, a.compose, a.truncated)
    return StatePushout(x, FlowMap.identity(a), ())


def pushout_merge_states(a: DiscreteFlow, s, t, cap: int | None = None) -> StatePushout:
    """Pushout along the map identifying the two states of {0, 1}, sent to ``s`` and ``t``."""
    if s not in a.states or t not in a.states:
        raise FlowError(f"{s!r} and {t!r} must be states")
    if s == t:
        return StatePushout(a, FlowMap.identity(a), ())
    keep, drop = sorted_labels([s, t])
    smap = {x: (keep if x == drop else x) for x in a.states}
    letters = {("A", p): (smap[u], smap[v]) for p, (u, v) in a.paths.items()}
    contractions = {(("A", p), ("A", q)): ("A", r) for (p, q), r in a.compose.items()}
    new_states = sorted_labels(set(smap.values()))
    bound, capped = _word_bound(new_states, letters.values(), cap)
    engine = WordCongruence(letters, contractions, (), bound, capped)
    flow = _with_states(engine.to_flow(), new_states)
    base = FlowMap(smap, {p: engine.cls[(("A", p),)] for p in a.paths})
    old = set(base.path_map.values())
    new_paths = tuple(c for c in engine.classes() if c not in old)
    return StatePushout(flow, base, new_paths)


def mediating_map(
    x: DiscreteFlow,
    legs: Iterable[tuple[FlowMap, FlowMap]],
    target: DiscreteFlow,
) -> FlowMap | None:
    """The unique flow map ``x -> target`` through which every leg factors, if any.

    ``legs`` pairs a canonical map into ``x`` with the corresponding cocone map
    into ``target``. Values are propagated from the legs and closed under
    composition; returns None on a conflict or when some path of ``x`` is not
    reached (so a mediating map, if one exists, would not be unique).
    """
    smap: dict = {}
    pmap: dict = {}
    for into_x, into_t in legs:
        for s, xs in into_x.state_map.items():
            if smap.setdefault(xs, into_t.state_map[s]) != into_t.state_map[s]:
                return None
        for p, xp in into_x.path_map.items():
            if pmap.setdefault(xp, into_t.path_map[p]) != into_t.path_map[p]:
                return None
    changed = True
    while changed:
        changed = False
        for (p, q), r in x.compose.items():
            if p in pmap and q in pmap:
                image = target.compose.get((pmap[p], pmap[q]))
                if image is None:
                    return None
                if r in pmap:
                    if pmap[r] != image:
                        return None
                else:
                    pmap[r] = image
                    changed = True
    if set(pmap) != set(x.paths):
        return None
    for s in x.states:
        if s not in smap:
            return None
    f = FlowMap(smap, pmap)
    return f if verify_flow_map(x, target, f) else None


def glob_flow_map(att: GlobAttachment, x: DiscreteFlow, cell_map: Mapping) -> tuple[DiscreteFlow, FlowMap]:
    """The globe on the cells and its map into ``x``."""
    g = make_glob(att.cells)
    return g, FlowMap({0: att.g0, 1: att.g1}, dict(cell_map))


def boundary_square_commutes(a: DiscreteFlow, att: GlobAttachment, result: GlobPushout) -> bool:
    for s in att.boundary:
        if result.base_map.path_map[att.attach[s]] != result.cell_map[att.incl[s]]:
            return False
    return True


def find_isomorphism(x: DiscreteFlow, y: DiscreteFlow, seed: Mapping) -> FlowMap | None:
    """Extend a partial path bijection ``seed`` to an isomorphism with identity on states."""
    if set(x.states) != set(y.states):
        return None
    pmap = dict(seed)
    if set(pmap) != set(x.paths):
        return None
    if len(set(pmap.values())) != len(pmap) or set(pmap.values()) != set(y.paths):
        return None
    f = FlowMap({s: s for s in x.states}, pmap)
    return f if verify_flow_map(x, y, f) else None


def path_label(p) -> str:
    """A compact text rendering of a path identifier."""
    if isinstance(p, tuple) and p and all(isinstance(l, tuple) and len(l) == 2 for l in p) \
            and all(l[0] in ("A", "T") for l in p):
        return ".".join(_letter_label(l) for l in p)
    return _plain(p)


def _letter_label(letter) -> str:
    tag, body = letter
    if tag == "A":
        return _plain(body)
    return "[" + _plain(body[1]) + "]"


def _plain(x) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(_plain(y) for y in x) + ")"
    return str(x)


def load_flow(data: Mapping[str, Any]) -> DiscreteFlow:
    try:
        states = list(data["states"])
        paths = {p["id"]: (p["src"], p["tgt"]) for p in data.get("paths", [])}
        compose = {}
        for entry in data.get("compose", []):
            p, q, r = entry
            compose[(p, q)] = r
    except (KeyError, TypeError, ValueError) as exc:
        raise FlowError(f"malformed flow description: {exc}") from None
    if len(paths) != len(data.get("paths", [])):
        raise FlowError("duplicate path identifiers")
    return DiscreteFlow(tuple(states), paths, compose)


def load_attachment(data: Mapping[str, Any]) -> GlobAttachment:
    try:
        boundary = list(data.get("boundary", []))
        raw_attach, raw_incl = dict(data.get("attach", {})), dict(data.get("incl", {}))
        # JSON object keys are strings even when the boundary labels are not
        attach = {s: raw_attach[s if s in raw_attach else str(s)] for s in boundary}
        incl = {s: raw_incl[s if s in raw_incl else str(s)] for s in boundary}
        return GlobAttachment(
            data["g0"], data["g1"], tuple(boundary), tuple(data.get("cells", [])), attach, incl,
        )
    except (KeyError, TypeError) as exc:
        raise FlowError(f"malformed attachment description: {exc}") from None


def dump_flow(x: DiscreteFlow) -> dict:
    label = {p: path_label(p) for p in x.paths}
    return {
        "states": list(x.states),
        "paths": [{"id": label[p], "src": s, "tgt": t} for p, (s, t) in
                  sorted(x.paths.items(), key=lambda kv: sort_key(kv[0]))],
        "compose": [[label[p], label[q], label[r]] for (p, q), r in
                    sorted(x.compose.items(), key=lambda kv: sort_key(kv[0]))],
    }


def dump_attachment(att: GlobAttachment) -> dict:
    return {
        "g0": att.g0, "g1": att.g1,
        "boundary": list(att.boundary), "cells": list(att.cells),
        "attach": dict(att.attach), "incl": dict(att.incl),
    }


def read_json(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
