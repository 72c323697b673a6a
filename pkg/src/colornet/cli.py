"""Command-line front end: ``colornet <subcommand> ...``.

Exit codes: 0 success, 1 invalid input or a failed comparison, 2 round
limit exceeded, 3 a k warning escalated by ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import generators, oracle
from .engine import RoundLimitExceeded
from .netmodel import Coloring, NetworkError, PortNetwork, diameter, parse_network, serialize_network
from .protocol import LeaderPath, Topology, Unsolvable, run_protocol

EXIT_OK, EXIT_FAIL, EXIT_ROUNDS, EXIT_K = 0, 1, 2, 3
BENCH_HEADER = ("n", "D", "k", "rounds", "bound", "i")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    path: Optional[str]
    k: Optional[int]
    alpha: int
    task: str
    max_rounds: Optional[int]
    fmt: str
    transcript: Optional[str]

    def __post_init__(self) -> None:
        if self.k is not None and self.k < 1:
            raise ValueError("--k must be at least 1")
        if self.alpha < 1:
            raise ValueError("--alpha must be at least 1")
        if self.task not in ("le", "top"):
            raise ValueError("--task must be le or top")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_FAIL):
        super().__init__(message)
        self.code = code


# -- helpers --------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _load(path: str) -> tuple[PortNetwork, Coloring]:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    try:
        return parse_network(text)
    except NetworkError as exc:
        raise CliError(f"{path}: {exc}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _ints(text: str) -> list[int]:
    """``"3"``, ``"1,2,5"`` or ``"2-6"`` (inclusive), combinable: ``"1-3,8"``."""
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise argparse.ArgumentTypeError(f"empty range {part}")
            values.extend(range(lo_i, hi_i + 1))
        else:
            values.append(int(part))
    return values


def _int_list(text: str) -> list[int]:
    try:
        return _ints(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def outcome_json(task: str, outcomes: Sequence, rounds: int) -> dict:
    """The stable outcome document of ``simulate``."""
    doc: dict = {"task": task, "rounds": rounds}
    if all(isinstance(o, Unsolvable) for o in outcomes):
        doc["status"] = "unsolvable"
        return doc
    doc["status"] = "solved" if not any(isinstance(o, Unsolvable) for o in outcomes) else "inconsistent"
    doc["outputs"] = [{"node": v, **o.to_json()} for v, o in enumerate(outcomes)]
    return doc


def _k_warning(col: Coloring, alpha: int, k: int) -> Optional[str]:
    if alpha not in col.colors:
        raise CliError(f"color {alpha} does not occur in the network")
    if not oracle.validate_k(col, alpha, k):
        return f"warning: k={k} is below the {col.size(alpha)} nodes of color {alpha}; guarantees are void"
    return None


# -- subcommands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    net, col = _load(args.file)
    sys.stderr.write(f"ok: {net.node_count} nodes, {net.edge_count} edges, {col.color_count} colors\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    net, col = _load(args.file)
    k = args.k if args.k is not None else col.size(args.alpha)
    _k_warning(col, args.alpha, k)
    report = oracle.analyze(net, col, k, args.alpha)
    doc = {
        "quotient": report.quotient.to_json(),
        "classes": list(report.class_of),
        "t_star": report.t_star,
        "sigma": report.sigma,
        "feasible": report.feasible,
        "leader": report.leader,
        "k": k,
        "alpha": args.alpha,
    }
    _emit(_dumps(doc) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    net, col = _load(args.file)
    warning = _k_warning(col, args.alpha, args.k)
    if warning:
        sys.stderr.write(warning + "\n")
        if args.strict:
            return EXIT_K
    record = args.transcript is not None
    try:
        result = run_protocol(net, col, args.k, args.alpha, args.task, args.max_rounds, record=record)
    except RoundLimitExceeded as exc:
        if record:
            _write_transcript(args.transcript, exc.transcript)
        sys.stderr.write(f"round limit exceeded: {exc}\n")
        return EXIT_ROUNDS
    if record:
        _write_transcript(args.transcript, result.transcript)
    _emit(_dumps(outcome_json(args.task, result.outcomes, result.rounds)) + "\n", args.out)
    return EXIT_OK


def _write_transcript(path: str, transcript) -> None:
    with open(path, "w") as fh:
        transcript.dump(fh)


def _endpoint(net: PortNetwork, v: int, outcome) -> Optional[int]:
    if not isinstance(outcome, LeaderPath):
        return None
    try:
        return oracle.walk_end(net, v, outcome.ports)
    except IndexError:
        return -1


def compare_instance(
    net: PortNetwork, col: Coloring, k: int, alpha: int, max_rounds: Optional[int] = None, solver=run_protocol
) -> dict:
    """Run protocol and oracle for both tasks; ``report["ok"]`` iff everything agrees."""
    report: dict = {"k": k, "alpha": alpha, "n": net.node_count, "diffs": [], "rounds": {}}
    for task in ("le", "top"):
        got = solver(net, col, k, alpha, task, max_rounds)
        want = oracle.oracle_solve(net, col, k, alpha, task)
        report["rounds"][task] = got.rounds
        for v, (g, w) in enumerate(zip(got.outcomes, want)):
            diff = _diff(net, v, task, g, w)
            if diff:
                report["diffs"].append(diff)
    report["ok"] = not report["diffs"]
    return report


def _diff(net: PortNetwork, v: int, task: str, got, want) -> Optional[dict]:
    base = {"task": task, "node": v}
    if isinstance(got, Unsolvable) != isinstance(want, Unsolvable):
        return {**base, "field": "verdict", "protocol": got.to_json(), "oracle": want.to_json()}
    if isinstance(want, Topology):
        if not isinstance(got, Topology) or got.graph != want.graph:
            return {**base, "field": "topology", "protocol": got.to_json(), "oracle": want.to_json()}
        if got.own != want.own:
            return {**base, "field": "self", "protocol": got.own, "oracle": want.own}
    if isinstance(want, LeaderPath):
        if _endpoint(net, v, got) != _endpoint(net, v, want):
            return {
                **base,
                "field": "leader",
                "protocol": _endpoint(net, v, got),
                "oracle": _endpoint(net, v, want),
            }
        if got != want:
            return {**base, "field": "path", "protocol": got.to_json(), "oracle": want.to_json()}
    return None


def cmd_compare(args) -> int:
    target = Path(args.file)
    files = sorted(target.glob("*.net")) if target.is_dir() else [target]
    if target.is_dir() and not files:
        raise CliError(f"{target}: no .net files")
    rows = []
    reports = []
    failed = False
    for path in files:
        net, col = _load(str(path))
        k = args.k if args.k is not None else col.size(args.alpha)
        warning = _k_warning(col, args.alpha, k)
        if warning:
            sys.stderr.write(f"{path}: {warning}\n")
            if args.strict:
                return EXIT_K
            raise CliError(f"{path}: the oracle needs a true bound k")
        try:
            report = compare_instance(net, col, k, args.alpha, args.max_rounds)
        except RoundLimitExceeded as exc:
            sys.stderr.write(f"{path}: round limit exceeded: {exc}\n")
            return EXIT_ROUNDS
        report["file"] = path.name
        failed |= not report["ok"]
        reports.append(report)
        rows.append(
            (path.name, net.node_count, k, args.alpha, report["rounds"]["le"], report["rounds"]["top"],
             "ok" if report["ok"] else "mismatch", len(report["diffs"]))
        )
    fmt = args.format or ("csv" if target.is_dir() else "json")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("file", "n", "k", "alpha", "rounds_le", "rounds_top", "status", "diffs"))
        writer.writerows(rows)
        _emit(buf.getvalue(), args.out)
    else:
        doc = reports[0] if len(reports) == 1 and not target.is_dir() else reports
        _emit(_dumps(doc) + "\n", args.out)
    if failed:
        for report in reports:
            for diff in report["diffs"]:
                sys.stderr.write(f"{report['file']}: {_dumps(diff)}\n")
    return EXIT_FAIL if failed else EXIT_OK


def _colors(text: str) -> list[int]:
    return [int(c) for c in text.split(",")]


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "ring":
        colors = _colors(args.colors)
        net, col = (
            generators.alternating_ring(colors) if args.ports == "alternating" else generators.oriented_ring(colors)
        )
    elif fam == "chordal":
        net = generators.gen_chordal(args.n, args.d)
        col = Coloring((1,) * args.n) if args.uniform else generators.single_alpha(args.n)
    elif fam == "stretch":
        base = generators.oriented_spec(_colors(args.colors))
        net, col = generators.gen_stretch(base, args.T, _colors(args.x_prime))
    elif fam == "pendant":
        small, large = generators.gen_pendant_family(args.n, args.d, args.k)
        net, col = large if args.large else small
    elif fam == "random":
        import random

        net, col = generators.random_network(random.Random(args.seed), args.n, args.extra, args.colors_max)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown family {fam}")
    _emit(serialize_network(net, col), args.out)
    return EXIT_OK


def bench_rows(family: str, ns: Sequence[int], ds: Sequence[int], ks: Sequence[int], progress: Optional[Callable] = None):
    """Rows ``(n, D, k, rounds, bound, i)``; ``D`` is the measured diameter and ``i`` the largest refinement count."""
    rows = []
    for n in ns:
        for target_d in ds:
            net, col = _bench_network(family, n, target_d)
            diam = diameter(net)
            for k in ks:
                if k < col.size(1):
                    continue
                result = run_protocol(net, col, k, 1, "le")
                bound = 2 * (k + 1) * (diam + 1) + diam
                steps = max(s.refine_steps for s in result.states)
                row = (net.node_count, diam, k, result.rounds, bound, steps)
                rows.append(row)
                if progress:
                    progress(row)
    return rows


def _bench_network(family: str, n: int, target_d: int) -> tuple[PortNetwork, Coloring]:
    if family == "chordal":
        d = max(1, n // target_d)
        if 2 * d >= n:
            raise CliError(f"chordal: n={n}, D={target_d} gives d={d}, need d < n/2")
        return generators.gen_chordal(n, d), generators.single_alpha(n)
    if family == "ring":
        return generators.oriented_ring([1] + [2] * (n - 1))
    if family == "stretch":
        # six-ring base with color sizes 1, 2 and 3, stretched for T = target_d
        base = generators.oriented_spec([1, 2, 2, 3, 3, 3])
        laps = math.ceil(target_d / base.n)
        x_prime = [2 * x * laps + x for x in base.color_sizes()]
        return generators.gen_stretch(base, target_d, x_prime)
    raise CliError(f"unknown family {family}")


def cmd_bench(args) -> int:
    ds = args.D if args.D is not None else [1]
    if args.family == "chordal" and args.D is None:
        raise CliError("chordal bench needs --D")
    if args.family == "stretch" and args.T is not None:
        ds = args.T
    ns = args.n if args.n is not None else [6]
    try:
        rows = bench_rows(args.family, ns, ds, args.k)
    except RoundLimitExceeded as exc:
        sys.stderr.write(f"round limit exceeded: {exc}\n")
        return EXIT_ROUNDS
    if (args.format or "csv") == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = _dumps([dict(zip(BENCH_HEADER, row)) for row in rows]) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colornet", description="Leader election and topology recognition in colored anonymous networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_k: bool):
        p.add_argument("file", help="network file (or a directory of .net files for compare)")
        p.add_argument("--k", type=int, required=need_k, help="upper bound on the size of color alpha")
        p.add_argument("--alpha", type=int, default=1, help="distinguished color (default 1)")
        p.add_argument("--max-rounds", type=int, default=None)
        p.add_argument("--strict", action="store_true", help="exit 3 when k is below the true count")
        p.add_argument("--out", help="write the result here instead of stdout")

    p = sub.add_parser("validate", help="parse and validate a network file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="centralized quotient, t*, sigma, verdict and leader")
    p.add_argument("file")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate", help="run the distributed protocol")
    common(p, need_k=True)
    p.add_argument("--task", choices=("le", "top"), default="le")
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--transcript", help="write a JSONL transcript of every round")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="protocol against oracle, both tasks")
    common(p, need_k=False)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="emit a generated network")
    p.add_argument("family", choices=("ring", "chordal", "stretch", "pendant", "random"))
    p.add_argument("--colors", default="1,2,2,3,3,3", help="ring or stretch base colors")
    p.add_argument("--ports", choices=("oriented", "alternating"), default="oriented")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--T", type=int, default=8)
    p.add_argument("--x-prime", default="5,11,18")
    p.add_argument("--uniform", action="store_true", help="chordal: one color everywhere")
    p.add_argument("--large", action="store_true", help="pendant: emit the large network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extra", type=int, default=1)
    p.add_argument("--colors-max", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="round counts against the analytic envelope")
    p.add_argument("--family", choices=("chordal", "ring", "stretch"), required=True)
    p.add_argument("--n", type=_int_list, help="sizes, e.g. 12-24 or 12,18")
    p.add_argument("--D", type=_int_list, help="target diameters (chordal uses d = n // D)")
    p.add_argument("--T", type=_int_list, help="stretch depths")
    p.add_argument("--k", type=_int_list, default=[1])
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        RunConfig(
            args.command,
            getattr(args, "file", None),
            getattr(args, "k", None) if args.command not in ("gen", "bench") else None,
            getattr(args, "alpha", 1),
            getattr(args, "task", "le"),
            getattr(args, "max_rounds", None),
            getattr(args, "format", None) or "json",
            getattr(args, "transcript", None),
        )
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except (ValueError, NetworkError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
