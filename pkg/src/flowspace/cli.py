"""Command-line entry point: ``flowspace <command> ...``.

Exit codes: 0 success, 1 a check failed, 2 malformed input, 3 a
precondition of the requested computation does not hold.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import __version__, checks, moore, reedy
from .flows import (
    CapTooSmallToClose,
    FlowError,
    NotLoopFreeAndNoCap,
    dump_flow,
    is_loop_free,
    load_attachment,
    load_flow,
    path_label,
    pushout_glob_oracle,
    read_json,
)
from .pathspace import NotLoopFree, build_df, compare_with_oracle, pathspace_via_reedy, support_dot

EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


class InputError(Exception):
    pass


class PreconditionError(Exception):
    pass


def _emit(report: dict, out) -> None:
    json.dump(report, out, indent=2, sort_keys=True)
    out.write("\n")


def _block_key(e: tuple) -> str:
    return f"{e[0]}->{e[1]}"


def _counts(flow) -> dict:
    return {_block_key(e): n for e, n in sorted(flow.block_counts().items(), key=lambda kv: repr(kv[0]))}


def _states(text: str) -> list[str]:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    if not parts:
        raise InputError("--states needs at least one label")
    return [reedy.parse_label(p) for p in parts]


def cmd_enumerate(args, out) -> int:
    states = _states(args.states)
    u, v = reedy.parse_label(args.u), reedy.parse_label(args.v)
    if args.max_degree < 1:
        raise InputError("--max-degree must be at least 1")
    try:
        ctx = reedy.PosetContext(frozenset(states), u, v)
    except reedy.ReedyError as exc:
        raise InputError(str(exc)) from None
    trunc = reedy.enumerate_up_to(ctx, args.max_degree)
    if args.dot:
        out.write(hasse_dot(trunc))
        return 0
    out.write("object\tdegree\theight\tsimplify\tlatch_base\n")
    for n in trunc.objects:
        out.write(f"{n}\t{n.degree}\t{n.height}\t{reedy.simplify(ctx, n)}\t{reedy.latch_base(ctx, n)}\n")
    return 0


def hasse_dot(trunc: reedy.Truncation) -> str:
    ids = {n: f"n{k}" for k, n in enumerate(trunc.objects)}
    lines = ["digraph reedy {", "  rankdir=BT;"]
    for n in trunc.objects:
        lines.append(f'  {ids[n]} [label="{n}\\nd={n.degree}"];')
    for lo, hi, g in trunc.covers:
        lines.append(f'  {ids[lo]} -> {ids[hi]} [label="{g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _load_pair(args):
    try:
        a = load_flow(read_json(args.flow))
        att = load_attachment(read_json(args.attachment))
        att.check_against(a)
    except (OSError, json.JSONDecodeError, FlowError) as exc:
        raise InputError(str(exc)) from None
    return a, att


def cmd_pushout(args, out) -> int:
    a, att = _load_pair(args)
    loop_free = is_loop_free(a, att)
    if not loop_free and (args.method != "oracle" or args.cap is None):
        raise PreconditionError("the flow with its attached globe has a loop"
                                + ("" if args.method != "oracle" else "; pass --cap"))
    report: dict = {"schema": "flowspace.pushout/1", "method": args.method, "loop_free": loop_free}
    status = "pass"
    if args.method in ("oracle", "both"):
        try:
            res = pushout_glob_oracle(a, att, cap=args.cap if not loop_free else None)
        except (NotLoopFreeAndNoCap, CapTooSmallToClose) as exc:
            raise PreconditionError(str(exc)) from None
        report["oracle"] = {
            "blocks": _counts(res.flow),
            "flow": dump_flow(res.flow),
            "truncated": res.flow.truncated,
            "cells": {str(z): path_label(p) for z, p in sorted(res.cell_map.items(), key=lambda kv: repr(kv[0]))},
        }
    if args.method in ("reedy", "both"):
        res = pathspace_via_reedy(a, att)
        report["reedy"] = {
            "blocks": _counts(res.flow),
            "support": len(res.df.support),
            "flow": dump_flow(res.flow),
        }
    if args.method == "both":
        cmp = compare_with_oracle(a, att)
        if cmp.ok:
            report["isomorphism"] = sorted(
                [path_label(c), path_label(d)] for c, d in cmp.bijection.items())
        else:
            status = "fail"
            report["counterexample"] = cmp.witness
    report["status"] = status
    _emit(report, out)
    return 0 if status == "pass" else EXIT_FAIL


def cmd_support(args, out) -> int:
    a, att = _load_pair(args)
    df = build_df(a, att)
    highlight = None
    if args.highlight:
        try:
            highlight = reedy.parse_tuple(args.highlight)
        except reedy.ReedyError as exc:
            raise InputError(str(exc)) from None
    out.write(support_dot(df, highlight))
    return 0


def cmd_verify(args, out) -> int:
    seed = args.seed
    env = os.environ.get("FLOWSPACE_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise InputError(f"FLOWSPACE_SEED is not an integer: {env!r}") from None
    if args.count < 1:
        raise InputError("--count must be positive")
    report = checks.run_suites(checks.expand_suite(args.suite), seed, args.count, args.max_degree)
    _emit(report, out)
    return 0 if report["status"] == "pass" else EXIT_FAIL


def cmd_moore(args, out) -> int:
    try:
        paths = [moore.parse_path(p) for p in args.paths]
        if args.op == "compose":
            result = paths[0]
            for p in paths[1:]:
                result = moore.moore_compose(result, p)
        elif args.op == "normalized":
            result = paths[0]
            for p in paths[1:]:
                result = moore.normalized_compose(result, p)
        else:
            if len(paths) != 3:
                raise InputError("associator takes exactly three paths")
            out.write(moore.format_reparam(moore.associator(*paths)) + "\n")
            return 0
    except moore.MooreError as exc:
        raise InputError(str(exc)) from None
    out.write(moore.format_path(result) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowspace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list the chain poset up to a degree")
    p.add_argument("--states", required=True, help="state labels, comma or space separated")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--max-degree", type=int, required=True)
    p.add_argument("--dot", action="store_true", help="print the Hasse diagram as DOT")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("pushout", help="compute a globe pushout")
    p.add_argument("flow")
    p.add_argument("attachment")
    p.add_argument("--method", choices=("oracle", "reedy", "both"), default="both")
    p.add_argument("--cap", type=int, help="word length cap for flows with loops (oracle only)")
    p.set_defaults(func=cmd_pushout)

    p = sub.add_parser("support", help="DOT export of the support of the chain diagram")
    p.add_argument("flow")
    p.add_argument("attachment")
    p.add_argument("--highlight", help="chain whose latching category is filled, e.g. '(0 1 1)'")
    p.set_defaults(func=cmd_support)

    p = sub.add_parser("verify", help="run the property suites on a seeded corpus")
    p.add_argument("--suite", choices=checks.SUITES + ("all",), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-degree", type=int, default=5, help="degree bound for the poset suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("moore", help="compose path literals like 'dur=1; pts=(0,0),(1,1)'")
    p.add_argument("op", choices=("compose", "normalized", "associator"))
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_moore)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except InputError as exc:
        print(f"flowspace: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PreconditionError, NotLoopFree) as exc:
        print(f"flowspace: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())

