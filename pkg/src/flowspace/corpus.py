"""Seeded random instances and the named worked examples."""

from __future__ import annotations

import itertools
import random
from typing import NamedTuple

from .diagrams import FinitePoset, SetDiagram, colimit
from .flows import (
    DiscreteFlow,
    FlowMap,
    GlobAttachment,
    is_loop_free,
    make_glob,
    pushout_add_state,
    pushout_glob_oracle,
    pushout_merge_states,
)
from .order import sort_key, sorted_labels

MAX_STATES = 5
MAX_PATHS = 20


class Instance(NamedTuple):
    name: str
    flow: DiscreteFlow
    attachment: GlobAttachment


def _reachability(n: int, edges: set) -> set:
    reach = set(edges)
    for k in range(n):
        for i in range(n):
            if (i, k) in reach:
                reach |= {(i, j) for j in range(n) if (k, j) in reach}
    return reach


def free_flow(rng: random.Random, n: int, max_paths: int = MAX_PATHS) -> DiscreteFlow | None:
    """The free flow on a random multigraph over 0 < 1 < ... < n-1, or None if too large."""
    gens = []
    for i, j in itertools.combinations(range(n), 2):
        for _ in range(rng.choice((0, 0, 1, 1, 2))):
            gens.append((i, j))
    words = [(k,) for k in range(len(gens))]
    frontier = list(words)
    while frontier:
        nxt = []
        for w in frontier:
            for k, (i, _) in enumerate(gens):
                if i == gens[w[-1]][1]:
                    nxt.append(w + (k,))
        words.extend(nxt)
        frontier = nxt
        if len(words) > max_paths:
            return None
    name = {w: "g" + "".join(chr(97 + k) for k in w) for w in words}
    paths = {name[w]: (gens[w[0]][0], gens[w[-1]][1]) for w in words}
    compose = {}
    for w1 in words:
        for w2 in words:
            if gens[w1[-1]][1] == gens[w2[0]][0]:
                compose[(name[w1], name[w2])] = name[w1 + w2]
    return DiscreteFlow(tuple(range(n)), paths, compose)


def modular_flow(rng: random.Random, n: int, max_paths: int = MAX_PATHS) -> DiscreteFlow | None:
    """Paths between related states weighted in Z/k, composed by adding weights."""
    edges = {(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.45}
    rel = _reachability(n, edges)
    if not rel:
        return DiscreteFlow(tuple(range(n)), {}, {})
    k = rng.randint(1, max(1, min(3, max_paths // len(rel))))
    if len(rel) * k > max_paths:
        return None
    paths = {f"m{i}{j}w{w}": (i, j) for i, j in rel for w in range(k)}
    compose = {}
    for (i, j), (j2, l) in itertools.product(sorted(rel), repeat=2):
        if j != j2:
            continue
        for w1, w2 in itertools.product(range(k), repeat=2):
            compose[(f"m{i}{j}w{w1}", f"m{j}{l}w{w2}")] = f"m{i}{l}w{(w1 + w2) % k}"
    return DiscreteFlow(tuple(range(n)), paths, compose)


def random_flow(rng: random.Random, max_states: int = MAX_STATES) -> DiscreteFlow:
    while True:
        n = rng.randint(2, max_states)
        x = (free_flow if rng.random() < 0.5 else modular_flow)(rng, n)
        if x is not None:
            return x


def random_attachment(rng: random.Random, a: DiscreteFlow) -> GlobAttachment:
    n = len(a.states)
    g0, g1 = sorted(rng.sample(range(n), 2))
    homs = a.hom(g0, g1)
    cells = [f"z{k}" for k in range(rng.randint(0, 4))]
    boundary = [f"s{k}" for k in range(rng.randint(0, 2))] if homs and cells else []
    attach = {s: rng.choice(homs) for s in boundary}
    incl = {s: rng.choice(cells) for s in boundary}
    return GlobAttachment(g0, g1, tuple(boundary), tuple(cells), attach, incl)


def random_instance(rng: random.Random, index: int = 0) -> Instance:
    a = random_flow(rng)
    att = random_attachment(rng, a)
    assert is_loop_free(a, att)
    return Instance(f"random-{index}", a, att)


def random_instances(seed: int, count: int) -> list[Instance]:
    rng = random.Random(seed)
    return [random_instance(rng, k) for k in range(count)]


def random_diagram(rng: random.Random, max_objects: int = 6, max_size: int = 5) -> SetDiagram:
    """A random functorial diagram of finite sets over a random finite poset.

    Each object's incoming maps are chosen as one function out of the colimit
    of everything strictly below it, which makes every such diagram
    functorial and reaches every functorial diagram.
    """
    k = rng.randint(1, max_objects)
    objs = list(range(k))
    covers = {(i, j) for i, j in itertools.combinations(objs, 2) if rng.random() < 0.35}
    index = FinitePoset(tuple(objs), frozenset(covers))
    values: dict = {}
    maps: dict = {}
    for j in objs:
        below = [i for i in objs if i != j and index.leq(i, j)]
        size = rng.randint(0, max_size)
        preds = [i for i in below if (i, j) in covers]
        if not below:
            values[j] = frozenset(f"e{j}_{t}" for t in range(size))
            continue
        sub = SetDiagram(_restrict(index, below),
                         {i: values[i] for i in below},
                         {c: maps[c] for c in maps if c[0] in below and c[1] in below}, check=False)
        res = colimit(sub)
        if res.apex and size == 0:
            size = 1
        vals = [f"e{j}_{t}" for t in range(size)]
        values[j] = frozenset(vals)
        choice = {c: rng.choice(vals) for c in res.apex}
        for i in preds:
            maps[(i, j)] = {x: choice[res.inject(i, x)] for x in values[i]}
    return SetDiagram(index, values, maps)


def _restrict(index: FinitePoset, objs: list) -> FinitePoset:
    keep = set(objs)
    return FinitePoset(tuple(objs), frozenset(c for c in index.covers if c[0] in keep and c[1] in keep))


def random_diagrams(seed: int, count: int) -> list[SetDiagram]:
    rng = random.Random(seed)
    return [random_diagram(rng) for _ in range(count)]


def relabel(x: DiscreteFlow, prefix: str = "p") -> tuple[DiscreteFlow, FlowMap]:
    """Rename paths to short tokens in sort order; returns the renamed flow and the renaming."""
    names = {p: f"{prefix}{k}" for k, p in enumerate(sorted_labels(x.paths))}
    y = DiscreteFlow(x.states, {names[p]: e for p, e in x.paths.items()},
                     {(names[p], names[q]): names[r] for (p, q), r in x.compose.items()})
    return y, FlowMap({s: s for s in x.states}, names)


def random_chain(rng: random.Random, length: int = 6) -> list[tuple[DiscreteFlow, FlowMap | None]]:
    """A chain of flows joined by injective maps, each step a state, merge or globe pushout."""
    x = random_flow(rng, max_states=4)
    chain: list = [(x, None)]
    tries = 0
    while len(chain) < length + 1 and tries < 50:
        tries += 1
        step = rng.choice(("C", "R", "glob", "glob"))
        if step == "C":
            res = pushout_add_state(x)
            y, f = res.flow, res.base_map
        elif step == "R":
            pair = _mergeable_pair(rng, x)
            if pair is None:
                continue
            res = pushout_merge_states(x, *pair)
            y, f = res.flow, res.base_map
        else:
            att = _injective_attachment(rng, x)
            if att is None:
                continue
            res = pushout_glob_oracle(x, att)
            y, f = res.flow, res.base_map
        if not f.injective_on_paths() or len(y.paths) > 60:
            continue
        y, names = relabel(y, prefix=f"x{len(chain)}_")
        chain.append((y, f.then(names)))
        x = y
    return chain


def _mergeable_pair(rng: random.Random, x: DiscreteFlow):
    edges = set(x.paths.values())
    states = list(x.states)
    n = len(states)
    pos = {s: k for k, s in enumerate(states)}
    rel = _reachability(n, {(pos[s], pos[t]) for s, t in edges})
    pairs = [(s, t) for s, t in itertools.combinations(states, 2)
             if (pos[s], pos[t]) not in rel and (pos[t], pos[s]) not in rel]
    rng.shuffle(pairs)
    for s, t in pairs:
        merged = {u: (s if u == t else u) for u in states}
        graph_edges = {(merged[u], merged[v]) for u, v in edges}
        relabelled = sorted_labels(set(merged.values()))
        ix = {u: k for k, u in enumerate(relabelled)}
        closure = _reachability(len(relabelled), {(ix[u], ix[v]) for u, v in graph_edges})
        if all(i != j for i, j in closure):
            return (s, t)
    return None


def _injective_attachment(rng: random.Random, x: DiscreteFlow) -> GlobAttachment | None:
    states = list(x.states)
    pos = {s: k for k, s in enumerate(states)}
    rel = _reachability(len(states), {(pos[s], pos[t]) for s, t in x.paths.values()})
    pairs = [(s, t) for s, t in itertools.permutations(states, 2) if (pos[t], pos[s]) not in rel]
    if not pairs:
        return None
    g0, g1 = rng.choice(sorted(pairs, key=sort_key))
    homs = x.hom(g0, g1)
    nb = rng.randint(0, min(2, len(homs)))
    boundary = rng.sample(homs, nb)
    cells = [f"c{k}" for k in range(nb + rng.randint(1, 2))]
    return GlobAttachment(g0, g1, tuple(f"b{k}" for k in range(nb)), tuple(cells),
                          {f"b{k}": p for k, p in enumerate(boundary)},
                          {f"b{k}": cells[k] for k in range(nb)})


def random_chains(seed: int, count: int, length: int = 6) -> list:
    rng = random.Random(seed)
    return [random_chain(rng, length) for _ in range(count)]


def one_cell_glob() -> Instance:
    return Instance("one-cell-glob", make_glob({"c"}),
                    GlobAttachment(0, 1, (), ("z",), {}, {}))


def three_state() -> Instance:
    a = DiscreteFlow((0, 1, 2), {"p": (0, 1), "q": (1, 2), "r": (0, 2)}, {("p", "q"): "r"})
    return Instance("three-state", a, GlobAttachment(1, 2, ("s",), ("s", "z"), {"s": "q"}, {"s": "s"}))


def trivial_attachment() -> Instance:
    a = DiscreteFlow((0, 1, 2), {"p": (0, 1), "q": (1, 2), "q2": (1, 2), "r": (0, 2), "r2": (0, 2)},
                     {("p", "q"): "r", ("p", "q2"): "r2"})
    return Instance("iso-attachment", a,
                    GlobAttachment(1, 2, ("q", "q2"), ("q", "q2"), {"q": "q", "q2": "q2"}, {"q": "q", "q2": "q2"}))


def empty_paths() -> Instance:
    return Instance("empty-paths", DiscreteFlow((0, 1), {}, {}), GlobAttachment(0, 1, (), ("z",), {}, {}))


def linear_flow(n: int) -> DiscreteFlow:
    paths = {f"l{i}{j}": (i, j) for i, j in itertools.combinations(range(n), 2)}
    compose = {(f"l{i}{j}", f"l{j}{k}"): f"l{i}{k}"
               for i, j, k in itertools.combinations(range(n), 3)}
    return DiscreteFlow(tuple(range(n)), paths, compose)


def named_instances() -> list[Instance]:
    return [one_cell_glob(), three_state(), trivial_attachment(), empty_paths(),
            Instance("linear-4", linear_flow(4), GlobAttachment(1, 2, ("s",), ("z",), {"s": "l12"}, {"s": "z"}))]


def globe_tower(n: int = 4, steps: int = 4) -> list[tuple[DiscreteFlow, FlowMap | None]]:
    """Globes attached in turn on consecutive pairs of a linear flow."""
    x = linear_flow(n)
    chain: list = [(x, None)]
    for k in range(steps):
        g0, g1 = k % (n - 1), k % (n - 1) + 1
        att = GlobAttachment(g0, g1, (), (f"c{k}",), {}, {})
        res = pushout_glob_oracle(x, att)
        y, names = relabel(res.flow, prefix=f"x{k + 1}_")
        chain.append((y, res.base_map.then(names)))
        x = y
    return chain


def state_tower(steps: int = 3) -> list[tuple[DiscreteFlow, FlowMap | None]]:
    x = make_glob({"c"})
    chain: list = [(x, None)]
    for _ in range(steps):
        res = pushout_add_state(x)
        chain.append((res.flow, res.base_map))
        x = res.flow
    return chain
