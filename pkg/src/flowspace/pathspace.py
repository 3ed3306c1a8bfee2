"""Path spaces of globe pushouts as colimits of chain diagrams.

For a flow ``A`` and a globe attachment with attached cell set ``T``, the
chain diagram sends a flagged chain ``(u0 e1 u1)...(u_{n-1} e_n u_n)`` to the
product of ``P_{u_{i-1}, u_i} A`` (flag 0) or ``T`` (flag 1). Compose arrows act
by composing adjacent paths of ``A``; include arrows push a path into ``T``.
Its colimit, block by block over the endpoints, is the path set of the
pushout, and concatenation of chains gives the composition.

Only chains with a nonempty value are kept (the support). Because a map can
only leave an empty set, the support is closed upwards and the colimit is
unchanged by the restriction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

from . import reedy
from .diagrams import ColimitResult, FinitePoset, SetDiagram, colimit
from .flows import (
    AttachedCellSet,
    DiscreteFlow,
    FlowMap,
    GlobAttachment,
    WordCongruence,
    _acyclic,
    attached_cells,
    find_isomorphism,
    identity_attachment,
    is_loop_free,
    pushout_glob_oracle,
    verify_flow_map,
)
from .order import UnionFind, sort_key, sorted_labels
from .reedy import Cell, PosetContext, TupleObject


class PathspaceError(ValueError):
    pass


class NotLoopFree(PathspaceError):
    pass


class ObjectOutsideContext(PathspaceError):
    pass


class NotInjective(PathspaceError):
    pass


@dataclass(frozen=True)
class DfDiagram:
    flow: DiscreteFlow
    attachment: GlobAttachment
    cells: AttachedCellSet
    context: PosetContext
    support: tuple
    diagram: SetDiagram

    def factor(self, cell: Cell) -> list:
        if cell.flag == 1:
            return list(self.cells.classes)
        return self.flow.hom(cell.src, cell.tgt)

    def value(self, n: TupleObject) -> frozenset:
        """The value at any chain of the context, in or out of the support."""
        self.check(n)
        if n in self.diagram.values:
            return self.diagram.values[n]
        return frozenset(itertools.product(*(self.factor(c) for c in n.cells)))

    def check(self, n: TupleObject) -> None:
        if not self.context.contains(n):
            raise ObjectOutsideContext(f"{n} is not an object of this diagram's index")

    def apply_generator(self, n: TupleObject, gen: reedy.GeneratorArrow, x: tuple) -> tuple:
        i = gen.position - 1
        if gen.kind is reedy.Kind.COMPOSE:
            return x[:i] + (self.flow.compose[(x[i], x[i + 1])],) + x[i + 2:]
        return x[:i] + (self.cells.from_path[x[i]],) + x[i + 1:]

    def transport(self, m: TupleObject, n: TupleObject, x: tuple) -> tuple:
        """The image of ``x`` under the function attached to the arrow m -> n."""
        f = reedy.factorize(self.context, m, n)
        obj = m
        for g in reversed(f.minus_word):
            x = self.apply_generator(obj, g, x)
            obj = reedy.apply_generator(self.context, obj, g)
        for g in f.plus_word:
            x = self.apply_generator(obj, g, x)
            obj = reedy.apply_generator(self.context, obj, g)
        return x


def _support(a: DiscreteFlow, cells: AttachedCellSet, att: GlobAttachment) -> list[TupleObject]:
    hom = a.hom_sets()
    edges: dict = {}
    for (s, t) in hom:
        edges.setdefault(s, []).append((t, 0))
    if cells.classes:
        edges.setdefault(att.g0, []).append((att.g1, 1))
    for s in edges:
        edges[s] = sorted(set(edges[s]), key=sort_key)
    out = []
    stack = [((s, e, t),) for s in sorted_labels(edges) for t, e in edges[s]]
    while stack:
        chain = stack.pop()
        out.append(TupleObject._raw(tuple(Cell(*c) for c in chain)))
        for t, e in edges.get(chain[-1][2], ()):
            stack.append(chain + ((chain[-1][2], e, t),))
    return sorted(out, key=reedy.object_key)


def build_df(a: DiscreteFlow, att: GlobAttachment, check: bool = True) -> DfDiagram:
    if not is_loop_free(a, att):
        raise NotLoopFree("the flow with its attached globe has a loop")
    cells = attached_cells(a, att)
    ctx = PosetContext(frozenset(a.states), att.g0, att.g1)
    support = _support(a, cells, att)
    keep = set(support)
    values = {}
    for n in support:
        factors = [cells.classes if c.flag else a.hom(c.src, c.tgt) for c in n.cells]
        values[n] = frozenset(itertools.product(*factors))
    covers = set()
    maps = {}
    for n in support:
        for g, m in reedy.successors(ctx, n):
            if m not in keep:
                raise PathspaceError(f"support is not closed upwards at {n} -> {m}")
            covers.add((n, m))
            i = g.position - 1
            if g.kind is reedy.Kind.COMPOSE:
                maps[(n, m)] = {x: x[:i] + (a.compose[(x[i], x[i + 1])],) + x[i + 2:] for x in values[n]}
            else:
                maps[(n, m)] = {x: x[:i] + (cells.from_path[x[i]],) + x[i + 1:] for x in values[n]}
    diagram = SetDiagram(FinitePoset(tuple(support), frozenset(covers)), values, maps, check=check)
    return DfDiagram(a, att, cells, ctx, tuple(support), diagram)


def build_identity_df(a: DiscreteFlow, g0, g1) -> DfDiagram:
    return build_df(a, identity_attachment(a, g0, g1))


def block(df: DfDiagram, alpha, beta) -> SetDiagram:
    return df.diagram.restrict(n for n in df.support if n.source == alpha and n.target == beta)


def block_colimits(df: DfDiagram) -> dict:
    ends = sorted_labels({(n.source, n.target) for n in df.support})
    return {e: colimit(block(df, *e)) for e in ends}


class ReedyPushout(NamedTuple):
    flow: DiscreteFlow
    base_map: FlowMap
    cell_map: dict
    df: DfDiagram
    blocks: dict


def pathspace_via_reedy(a: DiscreteFlow, att: GlobAttachment) -> ReedyPushout:
    """The pushout flow with path sets computed as colimits of the chain diagram."""
    df = build_df(a, att)
    blocks = block_colimits(df)
    inject = {}
    members: dict = {}
    paths = {}
    for (alpha, beta), result in blocks.items():
        for pair, c in result.injection.items():
            inject[pair] = c
            members.setdefault(c, []).append(pair)
        for c in result.apex:
            paths[c] = (alpha, beta)
    by_src: dict = {}
    for c, (s, _) in paths.items():
        by_src.setdefault(s, []).append(c)
    compose = {}
    for c1 in sorted_labels(paths):
        for c2 in by_src.get(paths[c1][1], ()):
            (n1, x1), (n2, x2) = c1, c2
            r = inject[(n1 + n2, x1 + x2)]
            for m1, y1 in members[c1]:
                for m2, y2 in members[c2]:
                    if inject[(m1 + m2, y1 + y2)] != r:
                        raise PathspaceError(
                            f"concatenation is not well defined on classes {c1!r}, {c2!r}")
            compose[(c1, c2)] = r
    flow = DiscreteFlow(a.states, paths, compose)
    base = FlowMap(
        {s: s for s in a.states},
        {p: inject[(TupleObject._raw((Cell(s, 0, t),)), (p,))] for p, (s, t) in a.paths.items()},
    )
    top = TupleObject._raw((Cell(att.g0, 1, att.g1),))
    cell_map = {z: inject[(top, (df.cells.from_cell[z],))] for z in att.cells}
    return ReedyPushout(flow, base, cell_map, df, blocks)


def letters_of(df: DfDiagram, n: TupleObject, x: tuple) -> tuple:
    """The word of the chain element ``x`` in the oracle's alphabet."""
    return tuple(("T", y) if c.flag else ("A", y) for c, y in zip(n.cells, x))


class Comparison(NamedTuple):
    ok: bool
    bijection: dict
    reedy: ReedyPushout | None
    oracle: object
    witness: str | None


def compare_with_oracle(a: DiscreteFlow, att: GlobAttachment) -> Comparison:
    """Match the two pushout computations class by class.

    Every element of every chain value is sent to the oracle class of its
    word; the induced map on classes must be well defined, bijective, a flow
    map, and compatible with both canonical maps.
    """
    try:
        via = pathspace_via_reedy(a, att)
    except PathspaceError as exc:
        return Comparison(False, {}, None, None, f"chain construction failed: {exc}")
    oracle = pushout_glob_oracle(a, att)
    engine_cls = _oracle_classes(a, att)
    phi: dict = {}
    for (alpha_beta, result) in via.blocks.items():
        for (n, x), c in result.injection.items():
            image = engine_cls.get(letters_of(via.df, n, x))
            if image is None:
                return Comparison(False, phi, via, oracle, f"word of {n}, {x!r} missing from the oracle")
            if phi.setdefault(c, image) != image:
                return Comparison(False, phi, via, oracle,
                                  f"class {c!r} meets oracle classes {phi[c]!r} and {image!r}")
    iso = find_isomorphism(via.flow, oracle.flow, phi)
    if iso is None:
        return Comparison(False, phi, via, oracle, _iso_defect(via.flow, oracle.flow, phi))
    for p in a.paths:
        if phi[via.base_map.path_map[p]] != oracle.base_map.path_map[p]:
            return Comparison(False, phi, via, oracle, f"maps from A disagree at {p!r}")
    for z in att.cells:
        if phi[via.cell_map[z]] != oracle.cell_map[z]:
            return Comparison(False, phi, via, oracle, f"maps from the globe disagree at {z!r}")
    return Comparison(True, phi, via, oracle, None)


def _oracle_classes(a: DiscreteFlow, att: GlobAttachment) -> dict:
    cells = attached_cells(a, att)
    letters = {("A", p): e for p, e in a.paths.items()}
    for t in cells.classes:
        letters[("T", t)] = (att.g0, att.g1)
    contractions = {(("A", p), ("A", q)): ("A", r) for (p, q), r in a.compose.items()}
    equations = [(("T", cells.from_path[q]), ("A", q)) for q in cells.from_path]
    engine = WordCongruence(letters, contractions, equations, max(1, len(a.states) - 1))
    return engine.cls


def _iso_defect(x: DiscreteFlow, y: DiscreteFlow, phi: dict) -> str:
    if set(phi) != set(x.paths):
        return "some chain class has no image"
    if len(set(phi.values())) != len(phi):
        return "two chain classes go to one oracle class"
    if set(phi.values()) != set(y.paths):
        missing = sorted_labels(set(y.paths) - set(phi.values()))
        return f"oracle classes not reached: {missing[:3]!r}"
    return "class bijection does not preserve composition"


class Latching(NamedTuple):
    apex: tuple
    comparison: dict
    colimit: ColimitResult


def latching_object(df: DfDiagram, n: TupleObject) -> Latching:
    """Colimit over the proper include-only arrows into ``n``, with its map to the value at ``n``."""
    df.check(n)
    cat = reedy.latching_category(df.context, n)
    values = {m: df.value(m) for m in cat.objects}
    maps = {}
    for lo, hi in cat.covers:
        i = next(k for k, (e, f) in enumerate(zip(lo.flags, hi.flags)) if e != f)
        g = reedy.Include(i + 1)
        maps[(lo, hi)] = {x: df.apply_generator(lo, g, x) for x in values[lo]}
    d = SetDiagram(cat, values, maps)
    result = colimit(d)
    comparison = {}
    for (m, x), c in result.injection.items():
        comparison.setdefault(c, df.transport(m, n, x))
    return Latching(result.apex, comparison, result)


class CubeFactor(NamedTuple):
    domain: tuple
    codomain: tuple
    fn: dict


def cube_factors(a: DiscreteFlow, cells: AttachedCellSet, n: TupleObject) -> list[CubeFactor]:
    out = []
    for c in n.cells:
        if c.flag == 1:
            dom = tuple(sorted_labels(cells.from_path))
            out.append(CubeFactor(dom, cells.classes, dict(cells.from_path)))
        else:
            out.append(CubeFactor((), tuple(a.hom(c.src, c.tgt)), {}))
    return out


def pushout_product(factors: list[CubeFactor]) -> Latching:
    """The map from the colimit over proper subsets of the cube into the full product."""
    p = len(factors)
    full = frozenset(range(p))
    subsets = [frozenset(s) for r in range(p) for s in itertools.combinations(range(p), r)]

    def value(s):
        return frozenset(itertools.product(
            *((f.codomain if i in s else f.domain) for i, f in enumerate(factors))))

    values = {s: value(s) for s in subsets}
    covers = set()
    maps = {}
    for s in subsets:
        for k in range(p):
            t = s | {k}
            if k in s or t == full:
                continue
            covers.add((s, t))
            fk = factors[k].fn
            maps[(s, t)] = {x: x[:k] + (fk[x[k]],) + x[k + 1:] for x in values[s]}
    d = SetDiagram(FinitePoset(tuple(subsets), frozenset(covers)), values, maps)
    result = colimit(d)
    comparison = {}
    for (s, x), c in result.injection.items():
        y = tuple(x[i] if i in s else factors[i].fn[x[i]] for i in range(p))
        comparison.setdefault(c, y)
    return Latching(result.apex, comparison, result)


def latching_via_cube(a: DiscreteFlow, att: GlobAttachment, n: TupleObject) -> Latching:
    ctx = PosetContext(frozenset(a.states), att.g0, att.g1)
    if not ctx.contains(n):
        raise ObjectOutsideContext(f"{n} is not an object over the states of the flow")
    return pushout_product(cube_factors(a, attached_cells(a, att), n))


def match_latching(df: DfDiagram, n: TupleObject, direct: Latching, cube: Latching) -> dict | None:
    """The canonical bijection direct -> cube commuting with both comparison maps, or None.

    A chain below ``n`` corresponds to the cube subset holding the flag-0
    positions of ``n`` and the flag-1 positions of the chain.
    """
    zeros = {i for i, e in enumerate(n.flags) if e == 0}
    phi: dict = {}
    for (m, x), c in direct.colimit.injection.items():
        s = frozenset(zeros | {i for i, e in enumerate(m.flags) if e == 1})
        image = cube.colimit.injection.get((s, x))
        if image is None or phi.setdefault(c, image) != image:
            return None
    if len(set(phi.values())) != len(phi) or set(phi.values()) != set(cube.apex):
        return None
    if set(phi) != set(direct.apex):
        return None
    for c, image in phi.items():
        if direct.comparison[c] != cube.comparison[image]:
            return None
    return phi


class RelativeLatching(NamedTuple):
    case: str
    domain: tuple
    fn: dict
    bijective: bool
    identified: bool


def relative_latching_map(a: DiscreteFlow, att: GlobAttachment, n: TupleObject,
                          df: DfDiagram | None = None, df_id: DfDiagram | None = None) -> RelativeLatching:
    """The map out of the pushout of the latching map of the identity-attachment diagram.

    Case ``"a"`` (all flags 0): the map must be a bijection. Case ``"b"``: the
    latching map of the identity diagram is a bijection, so the relative map
    is identified with the latching map of ``df``; ``identified`` records that
    the inclusion of the latching object into the pushout is a bijection
    under which the two maps agree.
    """
    df = df or build_df(a, att)
    df_id = df_id or build_identity_df(a, att.g0, att.g1)
    df.check(n)
    lat = latching_object(df, n)
    lat_id = latching_object(df_id, n)
    id_value = df_id.value(n)
    cells = df.cells

    def to_f(m: TupleObject, x: tuple) -> tuple:
        # the map of diagrams from the identity attachment: flag-1 letters are old paths
        return tuple(cells.from_path[y[1]] if c.flag else y for c, y in zip(m.cells, x))

    uf = UnionFind([("L", c) for c in lat.apex] + [("V", x) for x in id_value])
    for (m, x), c_id in lat_id.colimit.injection.items():
        uf.union(("L", lat.colimit.inject(m, to_f(m, x))), ("V", lat_id.comparison[c_id]))
    rep = uf.classes()
    domain = tuple(sorted_labels(set(rep.values())))
    fn: dict = {}
    consistent = True
    for tag_x, c in rep.items():
        tag, x = tag_x
        y = lat.comparison[x] if tag == "L" else to_f(n, x)
        if fn.setdefault(c, y) != y:
            consistent = False
    target = df.value(n)
    bijective = consistent and len(set(fn.values())) == len(fn) and set(fn.values()) == set(target)
    if n.height == 0:
        return RelativeLatching("a", domain, fn, bijective, bijective)
    into = {c: rep[("L", c)] for c in lat.apex}
    identified = (
        consistent
        and len(set(into.values())) == len(into) == len(domain)
        and all(fn[into[c]] == lat.comparison[c] for c in lat.apex)
    )
    return RelativeLatching("b", domain, fn, bijective, identified)


def chain_colimit_paths(chain: list[tuple[DiscreteFlow, FlowMap | None]]) -> tuple[UnionFind, dict]:
    uf = UnionFind((k, p) for k, (x, _) in enumerate(chain) for p in x.paths)
    for k, (x, f) in enumerate(chain):
        if f is None:
            continue
        for p, q in f.path_map.items():
            uf.union((k - 1, p), (k, q))
    return uf, uf.classes()


def chain_colimit_flow(chain: list[tuple[DiscreteFlow, FlowMap | None]], cap: int | None = None):
    """The colimit of a chain of flows, presented by words over all its paths."""
    suf = UnionFind((k, s) for k, (x, _) in enumerate(chain) for s in x.states)
    for k, (x, f) in enumerate(chain):
        if f is None:
            continue
        for s, t in f.state_map.items():
            suf.union((k - 1, s), (k, t))
    srep = suf.classes()
    letters = {}
    contractions = {}
    equations = []
    for k, (x, f) in enumerate(chain):
        for p, (s, t) in x.paths.items():
            letters[(k, p)] = (srep[(k, s)], srep[(k, t)])
        for (p, q), r in x.compose.items():
            contractions[((k, p), (k, q))] = (k, r)
        if f is not None:
            equations.extend(((k - 1, p), (k, q)) for p, q in f.path_map.items())
    states = set(srep.values())
    if _acyclic(states, letters.values()):
        bound, capped = max(1, len(states) - 1), False
    elif cap is not None:
        bound, capped = cap, True
    else:
        raise NotLoopFree("the chain colimit has loops; pass a cap")
    return WordCongruence(letters, contractions, equations, bound, capped), srep


def tower_pathspace_check(chain: list[tuple[DiscreteFlow, FlowMap | None]], cap: int | None = None) -> bool:
    """Compare the Set colimit of the path sets with the paths of the colimit flow.

    ``chain[k] = (X_k, f_k)`` with ``f_k: X_{k-1} -> X_k`` and ``f_0 = None``.
    """
    for k, (x, f) in enumerate(chain):
        if (f is None) != (k == 0):
            raise PathspaceError("only the first entry of the chain has no incoming map")
        if f is not None:
            if not verify_flow_map(chain[k - 1][0], x, f):
                raise PathspaceError(f"map into entry {k} is not a flow map")
            if not f.injective_on_paths():
                raise NotInjective(f"map into entry {k} is not injective on paths")
    _, path_rep = chain_colimit_paths(chain)
    engine, _ = chain_colimit_flow(chain, cap)
    phi: dict = {}
    for (k, p), c in path_rep.items():
        image = engine.cls[((k, p),)]
        if phi.setdefault(c, image) != image:
            return False
    classes = set(engine.members)
    return len(set(phi.values())) == len(phi) and set(phi.values()) == classes


def support_dot(df: DfDiagram, highlight: TupleObject | None = None) -> str:
    """DOT rendering of the support poset; the latching category of ``highlight`` is filled."""
    marked: set = set()
    if highlight is not None:
        marked = set(reedy.latching_category(df.context, highlight).objects)
    ids = {n: f"n{k}" for k, n in enumerate(df.support)}
    lines = ["digraph support {", "  rankdir=BT;"]
    for n in df.support:
        attrs = [f'label="{n}\\n|D|={len(df.diagram.values[n])}"']
        if n in marked:
            attrs.append('style=filled fillcolor="lightblue"')
        if n == highlight:
            attrs.append("peripheries=2")
        lines.append(f"  {ids[n]} [{' '.join(attrs)}];")
    for lo, hi in sorted(df.diagram.index.covers, key=lambda e: (ids[e[0]], ids[e[1]])):
        lines.append(f"  {ids[lo]} -> {ids[hi]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def unrestricted_colimit_size(a: DiscreteFlow, att: GlobAttachment, max_degree: int) -> dict:
    """Per-block colimit sizes over every chain of degree <= max_degree, empty values included."""
    cells = attached_cells(a, att)
    ctx = PosetContext(frozenset(a.states), att.g0, att.g1)
    trunc = reedy.enumerate_up_to(ctx, max_degree)
    values = {}
    for n in trunc.objects:
        factors = [cells.classes if c.flag else a.hom(c.src, c.tgt) for c in n.cells]
        values[n] = frozenset(itertools.product(*factors))
    maps = {}
    for lo, hi, g in trunc.covers:
        i = g.position - 1
        if g.kind is reedy.Kind.COMPOSE:
            maps[(lo, hi)] = {x: x[:i] + (a.compose[(x[i], x[i + 1])],) + x[i + 2:] for x in values[lo]}
        else:
            maps[(lo, hi)] = {x: x[:i] + (cells.from_path[x[i]],) + x[i + 1:] for x in values[lo]}
    d = SetDiagram(trunc.poset(), values, maps, check=False)
    result = colimit(d)
    sizes: dict = {}
    for c in result.apex:
        n = c[0]
        sizes[(n.source, n.target)] = sizes.get((n.source, n.target), 0) + 1
    return sizes
