import json
from pathlib import Path

import pytest

from flowspace import reedy
from flowspace.cli import main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_rows(capsys):
    code, out, _ = run(capsys, "enumerate", "--states", "a", "--u", "a", "--v", "a", "--max-degree", "2")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert len(rows) == 3
    code, out, _ = run(capsys, "enumerate", "--states", "a,b,c", "--u", "a", "--v", "b", "--max-degree", "1")
    assert len(out.strip().splitlines()[1:]) == 9


def test_enumerate_dot_has_one_edge_per_cover(capsys):
    code, out, _ = run(capsys, "enumerate", "--states", "a b", "--u", "a", "--v", "b", "--max-degree", "3", "--dot")
    assert code == 0 and out.startswith("digraph")
    ctx = reedy.PosetContext(frozenset("ab"), "a", "b")
    assert out.count("->") == len(reedy.enumerate_up_to(ctx, 3).covers)


def test_enumerate_bad_context(capsys):
    code, _, err = run(capsys, "enumerate", "--states", "a", "--u", "a", "--v", "b", "--max-degree", "2")
    assert code == 2 and "input error" in err


def test_pushout_both_one_cell(capsys):
    code, out, _ = run(capsys, "pushout", str(SAMPLES / "glob_flow.json"), str(SAMPLES / "glob_attach.json"))
    report = json.loads(out)
    assert code == 0 and report["status"] == "pass" and report["schema"] == "flowspace.pushout/1"
    assert report["oracle"]["blocks"] == {"0->1": 2} == report["reedy"]["blocks"]


def test_pushout_reedy_three_state(capsys):
    code, out, _ = run(capsys, "pushout", str(SAMPLES / "three_flow.json"), str(SAMPLES / "three_attach.json"),
                       "--method", "reedy")
    assert code == 0
    assert json.loads(out)["reedy"]["blocks"] == {"0->1": 1, "0->2": 2, "1->2": 2}


def test_pushout_cyclic_needs_cap(capsys):
    flow, att = str(SAMPLES / "loop_flow.json"), str(SAMPLES / "glob_attach.json")
    code, _, err = run(capsys, "pushout", flow, att)
    assert code == 3 and "precondition" in err
    code, out, _ = run(capsys, "pushout", flow, att, "--method", "oracle", "--cap", "3")
    assert code == 0 and json.loads(out)["oracle"]["truncated"]


def test_pushout_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "pushout", str(bad), str(SAMPLES / "glob_attach.json"))
    assert code == 2
    code, _, _ = run(capsys, "pushout", str(tmp_path / "missing.json"), str(SAMPLES / "glob_attach.json"))
    assert code == 2
    wrong = tmp_path / "att.json"
    wrong.write_text(json.dumps({"g0": 0, "g1": 1, "boundary": ["s"], "cells": ["z"],
                                 "attach": {"s": "nope"}, "incl": {"s": "z"}}))
    code, _, _ = run(capsys, "pushout", str(SAMPLES / "glob_flow.json"), str(wrong))
    assert code == 2


def test_support_dot(capsys):
    code, out, _ = run(capsys, "support", str(SAMPLES / "three_flow.json"), str(SAMPLES / "three_attach.json"),
                       "--highlight", "(0 0 1)(1 1 2)")
    assert code == 0 and "lightblue" in out


def test_verify_moore_has_witness(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "moore", "--seed", "7", "--count", "20")
    report = json.loads(out)
    assert code == 0 and report["status"] == "pass"
    names = {v["name"]: v for v in report["suites"]["moore"]}
    assert "left=1 right=1/2" in names["normalized-not-associative"]["witnesses"][0]


def test_verify_deterministic_and_env_seed(capsys, monkeypatch):
    args = ("verify", "--suite", "diagrams", "--seed", "3", "--count", "30")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    monkeypatch.setenv("FLOWSPACE_SEED", "11")
    _, third, _ = run(capsys, *args)
    assert json.loads(third)["seed"] == 11


def test_moore_command(capsys):
    code, out, _ = run(capsys, "moore", "compose", "dur=1; pts=(0,0),(1,1)", "dur=1; pts=(0,1),(1,3)")
    assert code == 0 and out.strip() == "dur=2; pts=(0,0),(1,1),(2,3)"
    code, _, _ = run(capsys, "moore", "compose", "dur=1; pts=(0,0),(1,1)", "dur=1; pts=(0,2),(1,3)")
    assert code == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2
