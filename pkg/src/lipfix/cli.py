"""Batch front-end.

Commands
--------
audit          run the hypothesis audit and the solvability gate
solve          solve and write the sample CSV plus a JSON metadata sidecar
verify         recompute residual and bounds for a previously written CSV
roundtrip      seeded random round trips through the solution operator
corpus-list    list built-in systems
corpus-export  write a built-in system in the JSON input format

Input files are JSON objects:

    {
      "schema": "lipfix/1",           // optional
      "domain": {"lo": 0.0, "hi": 4.0},
      "atoms": [{"weight": 0.6, "g": 1.0, "map": "0.5*x+1"}, ...],
      "F": "x",
      "lambda": 0.4,
      "base_point": 0.0               // optional, defaults to lo
    }

Exit codes: 0 success, 2 audit rejection, 3 input error, 4 budget or domain
closure error.  Reports are deterministic: identical invocations produce
byte-identical files.  The environment variable LIPFIX_THREADS (integer >= 1)
caps internal parallelism; the current implementation is serial, so any valid
value behaves the same.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus
from .errors import (
    BudgetExceeded,
    DomainNotClosed,
    InputError,
    LipfixError,
    NotSolvable,
)
from .exprlang import parse as parse_expr
from .gridfn import GridFunction, from_expr, read_csv, write_csv
from .hypotheses import AuditConfig, audit, require_solvable
from .operator import roundtrip_report
from .reporting import canonical_dumps
from .series import (
    Backend,
    DEFAULT_EPSILON,
    DEFAULT_GRID,
    Solution,
    refinement_difference,
    solve,
    solve_at_info,
)
from .system import Atom, EquationSystem
from .verify import verification_report

__all__ = ["main", "JobConfig"]

SCHEMA = "lipfix/1"


@dataclass(frozen=True)
class JobConfig:
    """Validated per-invocation settings shared by the pipeline commands."""

    command: str
    corpus: str | None
    input: str | None
    epsilon: float
    grid: int
    seed: int
    output: str | None
    format: str
    threads: int

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise InputError(f"epsilon must be > 0, got {self.epsilon!r}")
        if self.grid < 2:
            raise InputError(f"grid must be >= 2, got {self.grid!r}")
        if self.format not in ("csv", "json"):
            raise InputError(f"format must be csv or json, got {self.format!r}")


def _job_config(args) -> JobConfig:
    return JobConfig(
        command=args.command,
        corpus=getattr(args, "corpus", None),
        input=getattr(args, "input", None),
        epsilon=getattr(args, "epsilon", DEFAULT_EPSILON),
        grid=getattr(args, "grid", DEFAULT_GRID),
        seed=getattr(args, "seed", 0),
        output=getattr(args, "output", None),
        format=getattr(args, "format", "csv"),
        threads=_threads_cap(),
    )


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # route usage errors to exit code 3
        raise InputError(f"{self.prog}: {message}")


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="lipfix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--corpus", help="built-in system name")
        group.add_argument("--input", help="JSON system description file")

    p = sub.add_parser("audit", help="audit hypotheses and gate solvability")
    add_source(p)
    p.add_argument("--grid", type=int, default=AuditConfig.grid_count)
    p.add_argument("--seed", type=int, default=AuditConfig.seed)
    p.add_argument("--pairs", type=int, default=AuditConfig.pair_count)
    p.add_argument("-o", "--output", help="report path (default: stdout)")

    p = sub.add_parser("solve", help="solve and write samples plus metadata")
    add_source(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--seed", type=int, default=AuditConfig.seed)
    p.add_argument("-o", "--output", required=True, help="sample CSV path")
    p.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        help="csv: samples CSV + JSON sidecar; json: one JSON file",
    )

    p = sub.add_parser("verify", help="recompute residual and bounds for a CSV")
    add_source(p)
    p.add_argument("--phi", required=True, help="sample CSV written by solve")
    p.add_argument("--probes", type=int, default=4096)
    p.add_argument("--seed", type=int, default=AuditConfig.seed)
    p.add_argument("-o", "--output", help="report path (default: stdout)")

    p = sub.add_parser("roundtrip", help="seeded operator round trips")
    add_source(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("-o", "--output", help="report path (default: stdout)")

    sub.add_parser("corpus-list", help="list built-in systems")

    p = sub.add_parser("corpus-export", help="write a built-in system as JSON input")
    p.add_argument("--corpus", required=True)
    p.add_argument("-o", "--output", help="path (default: stdout)")

    return parser


def _threads_cap() -> int:
    raw = os.environ.get("LIPFIX_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"LIPFIX_THREADS must be an integer >= 1, got {raw!r}")
    if value < 1:
        raise InputError(f"LIPFIX_THREADS must be an integer >= 1, got {raw!r}")
    return value


def _load_input_file(path: str) -> EquationSystem:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read input file {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"input file {path!r} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise InputError(f"input file {path!r} must hold a JSON object")
    schema = raw.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise InputError(f"input file {path!r} declares schema {schema!r}, expected {SCHEMA!r}")
    try:
        domain = raw["domain"]
        atoms_raw = raw["atoms"]
        f_src = raw["F"]
        lam = float(raw["lambda"])
        lo = float(domain["lo"])
        hi = float(domain["hi"])
        atoms = tuple(
            Atom(float(a["weight"]), float(a["g"]), parse_expr(str(a["map"])))
            for a in atoms_raw
        )
        base_point = raw.get("base_point")
        return EquationSystem(
            domain_lo=lo,
            domain_hi=hi,
            atoms=atoms,
            F=parse_expr(str(f_src)),
            declared_lambda=lam,
            base_point=None if base_point is None else float(base_point),
        )
    except KeyError as exc:
        raise InputError(f"input file {path!r} is missing key {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        raise InputError(f"input file {path!r}: {exc}")


def _load_system(args) -> tuple[EquationSystem, corpus.CorpusEntry | None, str]:
    if getattr(args, "corpus", None):
        entry = corpus.load(args.corpus)
        return entry.system, entry, f"corpus:{args.corpus}"
    system = _load_input_file(args.input)
    return system, None, f"file:{args.input}"


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _audit_config(args) -> AuditConfig:
    return AuditConfig(
        grid_count=args.grid if hasattr(args, "grid") else AuditConfig.grid_count,
        pair_count=getattr(args, "pairs", AuditConfig.pair_count),
        seed=args.seed,
    )


def _cmd_audit(args) -> int:
    system, _, source = _load_system(args)
    config = _audit_config(args)
    report = audit(system, config)
    solvable = True
    reason = None
    try:
        require_solvable(report, config.tol_lambda)
    except NotSolvable as exc:
        solvable = False
        reason = str(exc)
    doc = {
        "schema": SCHEMA,
        "command": "audit",
        "source": source,
        "config": {
            "grid": config.grid_count,
            "pairs": config.pair_count,
            "seed": config.seed,
            "tol_gamma": config.tol_gamma,
            "tol_lambda": config.tol_lambda,
        },
        "report": report.to_json_dict(),
        "solvable": solvable,
        "reason": reason,
    }
    _emit(canonical_dumps(doc), args.output)
    if not solvable:
        print(f"lipfix audit: {reason}", file=sys.stderr)
        return 2
    return 0


def _solve_pointwise(system, epsilon, grid_count, report) -> Solution:
    """Fallback when the domain is not closed: exact pointwise recursion at
    every output node.  The reported bound is the worst per-node certificate."""
    nodes = np.linspace(system.domain_lo, system.domain_hi, grid_count)
    values = np.empty(grid_count)
    worst_n = 0
    worst_tail = 0.0
    points = 0
    for j, x in enumerate(nodes):
        values[j], info = solve_at_info(system, float(x), epsilon, report)
        worst_n = max(worst_n, info["N"])
        worst_tail = max(worst_tail, info["tail_bound"])
        points += info["points_visited"]
    return Solution(
        phi=GridFunction(system.domain_lo, system.domain_hi, values),
        N=worst_n,
        tail_bound=worst_tail,
        gamma=report.gamma,
        lambda_used=report.lambda_declared,
        L_used=report.L_observed,
        backend=Backend.RECURSIVE_POINTWISE,
        diagnostics={
            "out_of_range_count": 0,
            "grid_G": grid_count,
            "epsilon_requested": epsilon,
            "certificate_scope": "per-node",
            "points_visited": points,
        },
    )


def _cmd_solve(args) -> int:
    system, entry, source = _load_system(args)
    config = AuditConfig(seed=args.seed)
    report = audit(system, config)
    require_solvable(report, config.tol_lambda)
    try:
        sol = solve(system, args.epsilon, args.grid, report)
    except DomainNotClosed:
        sol = _solve_pointwise(system, args.epsilon, args.grid, report)

    expected = None
    if entry is not None and entry.expected is not None:
        expected = from_expr(
            entry.expected, system.domain_lo, system.domain_hi, args.grid
        )

    meta = {
        "schema": SCHEMA,
        "command": "solve",
        "source": source,
        "epsilon": args.epsilon,
        "grid": args.grid,
        "solution": sol.to_json_dict(),
    }
    if args.format == "csv":
        buf = io.StringIO()
        write_csv(sol.phi, buf, expected)
        _emit(buf.getvalue(), args.output)
        _emit(canonical_dumps(meta), args.output + ".json")
    else:
        meta["x"] = sol.phi.nodes()
        meta["value"] = sol.phi.values
        if expected is not None:
            meta["expected"] = expected.values
        _emit(canonical_dumps(meta), args.output)
    return 0


def _cmd_verify(args) -> int:
    system, _, source = _load_system(args)
    config = AuditConfig(seed=args.seed)
    report = audit(system, config)
    require_solvable(report, config.tol_lambda)
    try:
        with open(args.phi, encoding="utf-8") as fh:
            phi = read_csv(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.phi!r}: {exc}")
    except ValueError as exc:
        raise InputError(f"{args.phi!r}: {exc}")
    if phi.lo != system.domain_lo or phi.hi != system.domain_hi:
        raise InputError(
            f"{args.phi!r} covers [{phi.lo!r}, {phi.hi!r}] but the system domain "
            f"is [{system.domain_lo!r}, {system.domain_hi!r}]"
        )
    # The CSV is treated as a claimed exact solution: no tail certificate.
    claimed = Solution(
        phi=phi,
        N=0,
        tail_bound=0.0,
        gamma=report.gamma,
        lambda_used=report.lambda_declared,
        L_used=report.L_observed,
        backend=Backend.GRID_COLLOCATION,
        diagnostics={"source": "verify"},
    )
    rep = verification_report(system, claimed, report.L_observed, args.probes)
    doc = {
        "schema": SCHEMA,
        "command": "verify",
        "source": source,
        "phi_nodes": phi.size,
        "report": rep.to_json_dict(),
    }
    _emit(canonical_dumps(doc), args.output)
    return 0


def _cmd_roundtrip(args) -> int:
    system, _, source = _load_system(args)
    config = AuditConfig(seed=args.seed)
    report = audit(system, config)
    require_solvable(report, config.tol_lambda)
    grid_slack, _, _ = refinement_difference(system, args.epsilon, args.grid, report)
    rep = roundtrip_report(
        system,
        report,
        count=args.count,
        seed=args.seed,
        epsilon=args.epsilon,
        grid_count=args.grid,
        grid_slack=grid_slack,
    )
    doc = {
        "schema": SCHEMA,
        "command": "roundtrip",
        "source": source,
        "grid": args.grid,
        "epsilon": args.epsilon,
        "grid_slack": grid_slack,
        "report": rep,
    }
    _emit(canonical_dumps(doc), args.output)
    return 0


def _cmd_corpus_list(args) -> int:
    lines = []
    for name in corpus.names():
        entry = corpus.load(name)
        lines.append(f"{name}  {entry.expected_outcome.value}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_corpus_export(args) -> int:
    doc = corpus.export_dict(args.corpus)
    _emit(canonical_dumps(doc), args.output)
    return 0


_COMMANDS = {
    "audit": _cmd_audit,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "roundtrip": _cmd_roundtrip,
    "corpus-list": _cmd_corpus_list,
    "corpus-export": _cmd_corpus_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _job_config(args)  # validates epsilon, grid, format, LIPFIX_THREADS
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except NotSolvable as exc:
        print(f"lipfix {getattr(args, 'command', '?')}: {exc}", file=sys.stderr)
        return 2
    except (DomainNotClosed, BudgetExceeded) as exc:
        print(f"lipfix {getattr(args, 'command', '?')}: {exc}", file=sys.stderr)
        return 4
    except InputError as exc:
        print(f"lipfix: {exc}", file=sys.stderr)
        return 3
    except LipfixError as exc:
        print(f"lipfix: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:  # bad numeric settings reaching a deeper layer
        print(f"lipfix: {exc}", file=sys.stderr)
        return 3


def console_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
