"""Property suites over seeded corpora.

Each check returns a :class:`Verdict`; suites collect them into plain dicts
that serialize to deterministic JSON (no timings, sorted keys).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from . import corpus, moore, reedy
from .diagrams import (
    NotACocone,
    NotFunctorial,
    SetDiagram,
    coequalizes,
    cocone_factorization,
    colimit,
    is_minimal,
    product_comparison,
    sum_comparison,
)
from .flows import (
    DiscreteFlow,
    FlowMap,
    GlobAttachment,
    boundary_square_commutes,
    glob_flow_map,
    mediating_map,
    pushout_glob_oracle,
    verify_flow_map,
)
from .pathspace import (
    block_colimits,
    compare_with_oracle,
    latching_object,
    latching_via_cube,
    match_latching,
    relative_latching_map,
    build_identity_df,
    tower_pathspace_check,
    unrestricted_colimit_size,
)
from .reedy import PosetContext

SCHEMA = "flowspace.verify/1"
SUITES = ("poset", "diagrams", "pushout", "moore")


@dataclass
class Verdict:
    name: str
    cases: int = 0
    failures: int = 0
    witnesses: list = field(default_factory=list)
    skipped: str | None = None

    def record(self, ok: bool, witness=None) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.witnesses) < 3:
                self.witnesses.append(str(witness))

    @property
    def status(self) -> str:
        if self.skipped is not None:
            return "skipped"
        return "pass" if self.failures == 0 else "fail"

    def as_dict(self) -> dict:
        out = {"name": self.name, "status": self.status, "cases": self.cases, "failures": self.failures}
        if self.witnesses:
            out["witnesses"] = self.witnesses
        if self.skipped is not None:
            out["reason"] = self.skipped
        return out


# poset suite

POSET_CONTEXTS = (("a", "a", "a"), ("ab", "a", "b"), ("ab", "a", "a"), ("abc", "a", "b"), ("abc", "a", "a"))


def make_context(states: Iterable[str], u, v) -> PosetContext:
    return PosetContext(frozenset(states), u, v)


def context_label(ctx: PosetContext) -> str:
    return f"S={''.join(sorted(map(str, ctx.states)))} u={ctx.u} v={ctx.v}"


def generator_closure(trunc: reedy.Truncation) -> tuple[dict, list]:
    """Reachability in the raw generator graph of a truncation, as bitsets.

    Compose shortens a chain and include keeps the length while raising the
    height, so sorting by (length, -height) puts every target before its source.
    """
    index = {x: k for k, x in enumerate(trunc.objects)}
    succ: list = [[] for _ in trunc.objects]
    for lo, hi, _ in trunc.covers:
        succ[index[lo]].append(index[hi])
    reach = [0] * len(trunc.objects)
    for x in sorted(trunc.objects, key=lambda o: (o.length, -o.height)):
        k = index[x]
        bits = 1 << k
        for j in succ[k]:
            bits |= reach[j]
        reach[k] = bits
    return index, reach


def _bits(index: dict, objs: Iterable) -> int:
    out = 0
    for o in objs:
        k = index.get(o)
        if k is not None:
            out |= 1 << k
    return out


def check_order(ctx: PosetContext, max_degree: int) -> list[Verdict]:
    """Order axioms, agreement with the generator graph, relations and degree shifts."""
    trunc = reedy.enumerate_up_to(ctx, max_degree)
    index, reach = generator_closure(trunc)
    label = context_label(ctx)
    agree = Verdict(f"leq-matches-generator-reachability [{label}]")
    refl = Verdict(f"leq-reflexive [{label}]")
    anti = Verdict(f"leq-antisymmetric [{label}]")
    trans = Verdict(f"leq-transitive [{label}]")
    ups = {}
    for x in trunc.objects:
        up = reedy.up_set(ctx, x, max_degree)
        bits = _bits(index, up)
        ups[x] = bits
        agree.record(bits == reach[index[x]], f"up-set of {x} differs from generator reach")
        refl.record(x in up, x)
    objs = trunc.objects
    for x in objs:
        k = index[x]
        bits = ups[x] & ~(1 << k)
        # antisymmetry: nothing strictly above x lies below x
        bad = None
        b = bits
        while b:
            low = b & -b
            j = low.bit_length() - 1
            if ups[objs[j]] >> k & 1:
                bad = j
                break
            b ^= low
        anti.record(bad is None, f"{x} and {objs[bad]} are mutually related" if bad is not None else None)
        b = bits
        ok = True
        while b:
            low = b & -b
            j = low.bit_length() - 1
            if ups[objs[j]] & ~ups[x]:
                ok = False
                break
            b ^= low
        trans.record(ok, f"up-set of {x} is not closed" if not ok else None)
    relations = Verdict(f"relation-groups-ABC [{label}]")
    degree = Verdict(f"degree-shift [{label}]")
    for x in objs:
        problems = list(reedy.relation_witnesses(ctx, x))
        relations.record(not problems, problems[:1])
    for lo, hi, g in trunc.covers:
        shift = -1 if g.kind is reedy.Kind.COMPOSE else 1
        degree.record(hi.degree - lo.degree == shift, f"{g} on {lo}")
    return [refl, anti, trans, agree, relations, degree]


def check_normal_forms(ctx: PosetContext, max_degree: int) -> list[Verdict]:
    trunc = reedy.enumerate_up_to(ctx, max_degree)
    label = context_label(ctx)
    confluence = Verdict(f"simplify-confluent [{label}]")
    latch = Verdict(f"latch-base-minimum [{label}]")
    lat_size = Verdict(f"latching-category-size [{label}]")
    matching = Verdict(f"matching-terminal [{label}]")
    for n in trunc.objects:
        fixpoints = {m for m in reedy.minus_reach(ctx, n) if not reedy.is_simplifiable(m)}
        s = reedy.simplify(ctx, n)
        confluence.record(fixpoints == {s}, f"{n}: fixpoints {sorted(map(str, fixpoints))}")
        base = reedy.latch_base(ctx, n)
        lat = reedy.latching_category(ctx, n)
        lat_size.record(len(lat) == 2 ** n.height - 1, n)
        below = set(lat.objects) | {n}
        ok = reedy.leq(ctx, base, n) and (n.height == 0 or all(reedy.leq(ctx, base, m) for m in below))
        latch.record(ok, n)
        mat = reedy.matching_category(ctx, n)
        if reedy.is_simplifiable(n):
            ok = s in mat and all(reedy.leq(ctx, m, s) for m in mat.objects)
        else:
            ok = len(mat) == 0
        matching.record(ok, n)
    return [confluence, latch, lat_size, matching]


def check_factorization(ctx: PosetContext, max_degree: int) -> Verdict:
    """Every generator word between two objects passes through the factorization middle."""
    trunc = reedy.enumerate_up_to(ctx, max_degree)
    v = Verdict(f"factorization-middle-unique [{context_label(ctx)}]")
    for m in trunc.objects:
        by_target = reedy.word_middles(ctx, m, max_degree)
        up = reedy.up_set(ctx, m, max_degree)
        v.record(set(by_target) == up, f"{m}: word targets differ from the up-set")
        for n in sorted(by_target, key=reedy.object_key):
            try:
                f = reedy.factorize(ctx, m, n)
            except reedy.NoArrow:
                v.record(False, f"factorize({m}, {n}) found no arrow")
                continue
            mids = by_target[n]
            ok = mids == {f.middle} and f.apply(ctx, m) == n
            v.record(ok, f"{m} -> {n}: middles {sorted(map(str, mids))}")
    return v


def poset_suite(max_degree: int = 5, contexts=POSET_CONTEXTS) -> list[Verdict]:
    out = []
    for states, u, v in contexts:
        ctx = make_context(states, u, v)
        out.extend(check_order(ctx, max_degree))
        out.extend(check_normal_forms(ctx, min(max_degree, 5)))
        out.append(check_factorization(ctx, max_degree))
    return out


# diagrams suite

def _random_cocone(rng: random.Random, d: SetDiagram, size: int) -> tuple[dict, dict]:
    res = colimit(d)
    h = {c: rng.randrange(size) for c in res.apex}
    legs = {o: {x: h[res.inject(o, x)] for x in d.values[o]} for o in d.index.objects}
    return h, legs


def diagrams_suite(seed: int, count: int) -> list[Verdict]:
    rng = random.Random(seed)
    ds = [corpus.random_diagram(rng) for _ in range(count)]
    coeq = Verdict("colimit-coequalizes")
    minimal = Verdict("colimit-minimal")
    universal = Verdict("cocone-factorization")
    rejects = Verdict("non-cocone-rejected")
    sums = Verdict("sum-decomposition")
    products = Verdict("product-comparison-bijective")
    functorial = Verdict("non-functorial-rejected")
    for k, d in enumerate(ds):
        res = colimit(d)
        coeq.record(coequalizes(d, res), f"diagram {k}")
        minimal.record(is_minimal(d, res), f"diagram {k}")
        h, legs = _random_cocone(rng, d, 3)
        try:
            got = cocone_factorization(d, legs, res)
            universal.record(got == h, f"diagram {k}: mediating map differs")
        except NotACocone as exc:
            universal.record(False, f"diagram {k}: {exc}")
        broken = _break_cocone(d, legs)
        if broken is not None:
            try:
                cocone_factorization(d, broken, res)
                rejects.record(False, f"diagram {k}: broken cocone accepted")
            except NotACocone:
                rejects.record(True)
        bad = _break_functoriality(rng, d)
        if bad is not None:
            try:
                SetDiagram(d.index, d.values, bad)
                functorial.record(False, f"diagram {k}: broken maps accepted")
            except NotFunctorial:
                functorial.record(True)
        other = ds[(k + 1) % len(ds)]
        _, ok = sum_comparison([d, other])
        sums.record(ok, f"diagrams {k}, {(k + 1) % len(ds)}")
        small = corpus.random_diagram(rng, max_objects=4, max_size=3)
        _, ok = product_comparison(d, small)
        products.record(ok, f"diagram {k} times a random small diagram")
    return [coeq, minimal, universal, rejects, functorial, sums, products]


def _break_cocone(d: SetDiagram, legs: dict):
    for (lo, hi), fn in sorted(d.maps.items(), key=lambda kv: repr(kv[0])):
        for x in sorted(fn, key=repr):
            broken = {o: dict(f) for o, f in legs.items()}
            broken[lo][x] = legs[lo][x] + 100
            return broken
    return None


def _break_functoriality(rng: random.Random, d: SetDiagram):
    """Change one value of one map so that two chains with the same ends disagree, if possible."""
    for (lo, hi) in sorted(d.maps, key=repr):
        fn = d.maps[(lo, hi)]
        if not fn or len(d.values[hi]) < 2:
            continue
        x = sorted(fn, key=repr)[0]
        other = sorted((y for y in d.values[hi] if y != fn[x]), key=repr)[0]
        maps = {c: dict(f) for c, f in d.maps.items()}
        maps[(lo, hi)][x] = other
        try:
            SetDiagram(d.index, d.values, maps)
        except NotFunctorial:
            return maps
    return None


# pushout suite

def codiscrete_flow(states: Iterable) -> DiscreteFlow:
    states = tuple(states)
    paths = {("u", s, t): (s, t) for s in states for t in states}
    compose = {(("u", s, t), ("u", t, r)): ("u", s, r) for s in states for t in states for r in states}
    return DiscreteFlow(states, paths, compose)


def _cocones(rng: random.Random, a: DiscreteFlow, att: GlobAttachment):
    """Commuting squares out of the attachment data into small test flows."""
    out = []
    y = codiscrete_flow(a.states)
    base = FlowMap({s: s for s in a.states}, {p: ("u", *a.paths[p]) for p in a.paths})
    cells = {z: ("u", att.g0, att.g1) for z in att.cells}
    out.append(("codiscrete", y, base, cells))
    if att.cells:
        image = [f"w{k}" for k in range(rng.randint(1, len(att.cells)))]
        q = {z: rng.choice(image) for z in att.cells}
        coarse = GlobAttachment(att.g0, att.g1, att.boundary, tuple(sorted(set(q.values()))),
                                att.attach, {s: q[att.incl[s]] for s in att.boundary})
        res = pushout_glob_oracle(a, coarse)
        out.append(("coarser-cells", res.flow, res.base_map, {z: res.cell_map[q[z]] for z in att.cells}))
    return out


def check_universal(rng: random.Random, a: DiscreteFlow, att: GlobAttachment, x, base: FlowMap,
                    cell_map: dict, v: Verdict, neg: Verdict) -> None:
    _, into_x = glob_flow_map(att, x, cell_map)
    for name, y, base_y, cells_y in _cocones(rng, a, att):
        _, into_y = glob_flow_map(att, y, cells_y)
        h = mediating_map(x, [(base, base_y), (into_x, into_y)], y)
        ok = h is not None and all(h.path_map[base.path_map[p]] == base_y.path_map[p] for p in a.paths)
        v.record(ok, f"no mediating map into the {name} cocone")
        if att.boundary:
            s = att.boundary[0]
            z = att.incl[s]
            alternatives = [p for p in y.hom(att.g0, att.g1) if p != cells_y[z]]
            if alternatives:
                bad = dict(cells_y)
                bad[z] = alternatives[0]
                _, into_bad = glob_flow_map(att, y, bad)
                neg.record(mediating_map(x, [(base, base_y), (into_x, into_bad)], y) is None,
                           f"non-commuting {name} square was factored")


def check_instance(rng: random.Random, inst: corpus.Instance, verdicts: dict, lemma: bool = False) -> None:
    a, att = inst.flow, inst.attachment
    cmp = compare_with_oracle(a, att)
    verdicts["oracle-equivalence"].record(cmp.ok, f"{inst.name}: {cmp.witness}")
    if cmp.reedy is None:
        return
    via, oracle = cmp.reedy, cmp.oracle
    verdicts["canonical-maps-are-flow-maps"].record(
        verify_flow_map(a, oracle.flow, oracle.base_map) and verify_flow_map(a, via.flow, via.base_map),
        inst.name)
    verdicts["boundary-square-commutes"].record(
        boundary_square_commutes(a, att, oracle) and boundary_square_commutes(a, att, via), inst.name)
    check_universal(rng, a, att, oracle.flow, oracle.base_map, oracle.cell_map,
                    verdicts["universal-property"], verdicts["non-commuting-square-rejected"])
    df = via.df
    blocks = block_colimits(df)
    whole = colimit(df.diagram)
    verdicts["block-decomposition"].record(
        len(whole) == sum(len(r) for r in blocks.values())
        and all(len({whole.inject(*pair) for pair in r.injection}) == len(r) for r in blocks.values()),
        inst.name)
    df_id = build_identity_df(a, att.g0, att.g1)
    for n in df.support:
        lat = latching_object(df, n)
        cube = latching_via_cube(a, att, n)
        verdicts["latching-matches-cube"].record(match_latching(df, n, lat, cube) is not None,
                                                  f"{inst.name} at {n}")
        verdicts["latching-empty-at-height-zero"].record(n.height > 0 or not lat.apex, f"{inst.name} at {n}")
        if n.height > 0:
            verdicts["latching-nonempty-iff-old-paths"].record(
                bool(lat.apex) == bool(a.hom(att.g0, att.g1)), f"{inst.name} at {n}")
        rel = relative_latching_map(a, att, n, df, df_id)
        expected = "a" if n.height == 0 else "b"
        ok = rel.case == expected and (rel.bijective if expected == "a" else rel.identified)
        verdicts["relative-latching-dichotomy"].record(ok, f"{inst.name} at {n}: {rel.case}")
    if lemma and len(a.states) <= 3 and df.support:
        cap = max(n.degree for n in df.support) + 1
        sizes = unrestricted_colimit_size(a, att, cap)
        restricted = {e: len(r) for e, r in blocks.items()}
        verdicts["support-truncation"].record(sizes == restricted, f"{inst.name}: {sizes} vs {restricted}")


PUSHOUT_CHECKS = (
    "oracle-equivalence", "canonical-maps-are-flow-maps", "boundary-square-commutes",
    "universal-property", "non-commuting-square-rejected", "block-decomposition",
    "latching-matches-cube", "latching-empty-at-height-zero", "latching-nonempty-iff-old-paths", "relative-latching-dichotomy",
    "support-truncation",
)


def pushout_suite(seed: int, count: int) -> list[Verdict]:
    rng = random.Random(seed)
    verdicts = {name: Verdict(name) for name in PUSHOUT_CHECKS}
    instances = corpus.named_instances() + corpus.random_instances(seed, count)
    for k, inst in enumerate(instances):
        check_instance(rng, inst, verdicts, lemma=k % 5 == 0)
    tower = Verdict("tower-commutation")
    chains = [("globe-tower", corpus.globe_tower()), ("state-tower", corpus.state_tower())]
    chains += [(f"chain-{k}", c) for k, c in enumerate(corpus.random_chains(seed, max(1, count // 10)))]
    for name, chain in chains:
        tower.record(tower_pathspace_check(chain), name)
    return list(verdicts.values()) + [tower]


# moore suite

def _rat(rng: random.Random, lo: int = -4, hi: int = 4, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_path(rng: random.Random, start: Fraction | None = None, duration=None) -> moore.PLPath:
    dur = Fraction(duration) if duration is not None else Fraction(rng.randint(1, 8), rng.randint(1, 4))
    k = rng.randint(0, 3)
    times = sorted({Fraction(rng.randint(1, 15), 16) * dur for _ in range(k)})
    ys = [start if start is not None else _rat(rng)] + [_rat(rng) for _ in range(len(times) + 1)]
    return moore.PLPath(dur, zip([Fraction(0)] + times + [dur], ys))


def random_triple(rng: random.Random, unit: bool = False):
    d = 1 if unit else None
    a = random_path(rng, duration=d)
    b = random_path(rng, a.end, duration=d)
    c = random_path(rng, b.end, duration=d)
    return a, b, c


def random_reparam(rng: random.Random) -> moore.PLReparam:
    k = rng.randint(0, 3)
    xs = sorted({Fraction(rng.randint(1, 15), 16) for _ in range(k)})
    ys = sorted({Fraction(rng.randint(1, 15), 16) for _ in range(len(xs))})
    while len(ys) < len(xs):
        xs = xs[:-1]
    return moore.PLReparam([(0, 0)] + list(zip(xs, ys)) + [(1, 1)])


def moore_suite(seed: int, count: int = 50) -> list[Verdict]:
    rng = random.Random(seed)
    assoc = Verdict("moore-associative")
    witness = Verdict("normalized-not-associative")
    repair = Verdict("associator-repairs")
    closure = Verdict("blend-in-G")
    group = Verdict("reparam-group-axioms")
    action = Verdict("action-laws")
    for _ in range(count):
        a, b, c = random_triple(rng)
        left = moore.moore_compose(moore.moore_compose(a, b), c)
        right = moore.moore_compose(a, moore.moore_compose(b, c))
        assoc.record(left.points == right.points and left.duration == right.duration, (a, b, c))
        a, b, c = random_triple(rng, unit=True)
        left = moore.normalized_compose(moore.normalized_compose(a, b), c)
        right = moore.normalized_compose(a, moore.normalized_compose(b, c))
        try:
            phi = moore.associator(a, b, c)
            repair.record(moore.act(right, phi) == left, (a, b, c))
        except moore.MooreError as exc:
            repair.record(False, exc)
    a, b, c = moore.PLPath.linear(0, 1), moore.PLPath.linear(1, 2), moore.PLPath.linear(2, 3)
    left = moore.normalized_compose(moore.normalized_compose(a, b), c)
    right = moore.normalized_compose(a, moore.normalized_compose(b, c))
    quarter = Fraction(1, 4)
    witness.record(left != right and left(quarter) != right(quarter),
                   "ramps 0->1, 1->2, 2->3 agree after normalized composition")
    witness.witnesses.append(f"at t=1/4: left={left(quarter)} right={right(quarter)}")
    ident = moore.PLReparam.identity()
    for _ in range(2 * count):
        phi, psi, chi = random_reparam(rng), random_reparam(rng), random_reparam(rng)
        s = Fraction(rng.randint(0, 12), 12)
        try:
            moore.blend(phi, psi, s)
            closure.record(True)
        except moore.MooreError as exc:
            closure.record(False, exc)
        cr = moore.compose_reparam
        ok = (cr(cr(phi, psi), chi) == cr(phi, cr(psi, chi)) and cr(phi, ident) == phi
              and cr(ident, phi) == phi and cr(phi, moore.invert_reparam(phi)) == ident
              and cr(moore.invert_reparam(phi), phi) == ident)
        group.record(ok, (phi, psi, chi))
        g = random_path(rng, duration=1)
        ok = (moore.act(g, ident) == g
              and moore.act(moore.act(g, phi), psi) == moore.act(g, cr(phi, psi))
              and moore.act(g, phi).start == g.start and moore.act(g, phi).end == g.end)
        action.record(ok, (g, phi, psi))
    return [assoc, witness, repair, closure, group, action]


def run_suites(names: Iterable[str], seed: int, count: int, max_degree: int = 5) -> dict:
    runners: dict[str, Callable[[], list[Verdict]]] = {
        "poset": lambda: poset_suite(max_degree),
        "diagrams": lambda: diagrams_suite(seed, count),
        "pushout": lambda: pushout_suite(seed, count),
        "moore": lambda: moore_suite(seed, min(count, 50)),
    }
    suites = {}
    for name in names:
        suites[name] = [v.as_dict() for v in runners[name]()]
    status = "pass" if all(v["status"] != "fail" for vs in suites.values() for v in vs) else "fail"
    return {"schema": SCHEMA, "seed": seed, "count": count, "max_degree": max_degree,
            "status": status, "suites": suites}


def expand_suite(name: str) -> tuple[str, ...]:
    return SUITES if name == "all" else (name,)

