from __future__ import annotations

import json

import pytest

from colornet import protocol
from colornet.cli import BENCH_HEADER, compare_instance, main
from colornet.generators import oriented_ring
from colornet.netmodel import parse_network, serialize_network
from colornet.protocol import LeaderPath, Unsolvable, run_protocol

PATH_TEXT = "n 2\ncolors 1 2\nedge 0 0 1 0\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


def ring_file(write, name, colors):
    return write(name, serialize_network(*oriented_ring(colors)))


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_accepts_and_rejects(capsys, write):
    code, _, err = run_cli(capsys, "validate", write("ok.net", PATH_TEXT))
    assert code == 0 and err.startswith("ok: 2 nodes, 1 edges")
    broken = write("broken.net", "n 3\ncolors 1 1 2\nedge 0 0 1 0\nedge 0 0 2 0\n")
    code, _, err = run_cli(capsys, "validate", broken)
    assert code == 1 and "error" in err
    apart = write("apart.net", "n 4\ncolors 1 1 2 2\nedge 0 0 1 0\nedge 2 0 3 0\n")
    code, _, err = run_cli(capsys, "validate", apart)
    assert code == 1


def test_missing_file(capsys, tmp_path):
    code, _, err = run_cli(capsys, "validate", str(tmp_path / "nope.net"))
    assert code == 1 and "nope.net" in err


def test_simulate_solved_path(capsys, write):
    code, out, _ = run_cli(capsys, "simulate", write("p.net", PATH_TEXT), "--k", "1")
    assert code == 0
    assert json.loads(out) == {
        "outputs": [{"node": 0, "path": []}, {"node": 1, "path": [0]}],
        "rounds": 20,
        "status": "solved",
        "task": "le",
    }


def test_simulate_topology(capsys, write):
    code, out, _ = run_cli(capsys, "simulate", write("p.net", PATH_TEXT), "--k", "1", "--task", "top")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "solved"
    assert [o["self"] for o in doc["outputs"]] == [0, 1]
    assert doc["outputs"][0]["topology"]["classes"] == [{"id": 0, "color": 1}, {"id": 1, "color": 2}]


def test_simulate_unsolvable_ring(capsys, write):
    code, out, _ = run_cli(capsys, "simulate", ring_file(write, "r.net", [1] * 4), "--k", "4")
    assert code == 0
    assert json.loads(out) == {"rounds": json.loads(out)["rounds"], "status": "unsolvable", "task": "le"}


def test_simulate_writes_transcript(capsys, write, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, _, _ = run_cli(capsys, "simulate", write("p.net", PATH_TEXT), "--k", "1", "--transcript", str(trace))
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert code == 0 and len(rows) == 19 + 20  # node 0 outputs in round 19, node 1 in round 20
    assert rows[0]["t"] == 1 and rows[-1]["done"] is True


def test_simulate_k_below_count(capsys, write):
    path = ring_file(write, "r.net", [1, 1, 2])
    code, _, err = run_cli(capsys, "simulate", path, "--k", "1", "--strict")
    assert code == 3 and "warning" in err
    code, out, err = run_cli(capsys, "simulate", path, "--k", "1")
    assert code == 0 and "warning" in err and json.loads(out)["task"] == "le"


def test_simulate_round_limit(capsys, write):
    code, _, err = run_cli(capsys, "simulate", write("p.net", PATH_TEXT), "--k", "1", "--max-rounds", "3")
    assert code == 2 and "round limit" in err


def test_simulate_absent_alpha(capsys, write):
    code, _, err = run_cli(capsys, "simulate", write("p.net", PATH_TEXT), "--k", "1", "--alpha", "5")
    assert code == 1 and "does not occur" in err


def test_oracle_report(capsys, write):
    code, out, _ = run_cli(capsys, "oracle", ring_file(write, "r.net", [1, 2, 1, 2]))
    doc = json.loads(out)
    assert code == 0
    assert doc["classes"] == [0, 1, 0, 1] and doc["sigma"] == 2 and doc["t_star"] == 0
    assert doc["feasible"] is False and doc["k"] == 2


def test_compare_agrees(capsys, write):
    code, out, _ = run_cli(capsys, "compare", write("p.net", PATH_TEXT))
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["rounds"] == {"le": 20, "top": 20}


def test_compare_flags_a_corrupted_protocol(capsys, write, monkeypatch):
    def wrong(state):
        if state.task == "le":
            return LeaderPath(state.path + (0,))
        return Unsolvable()

    monkeypatch.setattr(protocol, "finalize", wrong)
    code, _, err = run_cli(capsys, "compare", write("p.net", PATH_TEXT))
    assert code == 1
    assert '"field":"leader"' in err.replace(" ", "") and '"field":"verdict"' in err.replace(" ", "")


def test_compare_instance_with_a_stub_solver():
    net, col = parse_network(PATH_TEXT)

    def flipped(net, col, k, alpha, task, max_rounds):
        result = run_protocol(net, col, k, alpha, task, max_rounds)
        result.outcomes.reverse()
        return result

    report = compare_instance(net, col, 1, 1, solver=flipped)
    assert not report["ok"]
    assert {d["field"] for d in report["diffs"]} == {"leader", "self"}


def test_compare_directory_writes_csv(capsys, tmp_path):
    (tmp_path / "a.net").write_text(PATH_TEXT)
    (tmp_path / "b.net").write_text(serialize_network(*oriented_ring([1, 2, 2])))
    (tmp_path / "skip.txt").write_text("ignored")
    code, out, _ = run_cli(capsys, "compare", str(tmp_path))
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "file,n,k,alpha,rounds_le,rounds_top,status,diffs"
    assert [line.split(",")[0] for line in lines[1:]] == ["a.net", "b.net"]
    assert all(line.endswith(",ok,0") for line in lines[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["ring", "--colors", "1,2,2"],
        ["ring", "--colors", "1,1,2,2", "--ports", "alternating"],
        ["chordal", "--n", "10", "--d", "3"],
        ["stretch"],
        ["pendant", "--n", "6", "--d", "2", "--k", "3", "--large"],
        ["random", "--n", "7", "--seed", "4", "--extra", "3"],
    ],
)
def test_gen_output_parses(capsys, argv):
    code, out, _ = run_cli(capsys, "gen", *argv)
    assert code == 0
    net, col = parse_network(out)
    assert serialize_network(net, col) == out


def test_gen_rejects_bad_chordal(capsys):
    code, _, err = run_cli(capsys, "gen", "chordal", "--n", "6", "--d", "3")
    assert code == 1 and "error" in err


def test_bench_is_deterministic(capsys):
    argv = ["bench", "--family", "chordal", "--n", "12", "--D", "3,4", "--k", "1-2"]
    code, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert code == 0 and first == second
    lines = first.splitlines()
    assert lines[0] == ",".join(BENCH_HEADER)
    rows = [list(map(int, line.split(","))) for line in lines[1:]]
    assert len(rows) == 4
    for n, D, k, rounds, bound, _ in rows:
        assert n == 12 and bound == 2 * (k + 1) * (D + 1) + D
        assert rounds <= 2 * bound + n + 1


def test_bench_json_and_ring(capsys):
    code, out, _ = run_cli(capsys, "bench", "--family", "ring", "--n", "5", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and set(row) == set(BENCH_HEADER) and row["D"] == 2


def test_bench_needs_diameter_for_chordal(capsys):
    code, _, err = run_cli(capsys, "bench", "--family", "chordal", "--n", "12")
    assert code == 1 and "--D" in err


def test_simulate_is_byte_identical_across_runs(capsys, write):
    path = ring_file(write, "r.net", [1, 2, 2, 3, 3])
    outs = [run_cli(capsys, "simulate", path, "--k", "1", "--task", "top")[1] for _ in range(2)]
    assert outs[0] == outs[1]
