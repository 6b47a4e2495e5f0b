"""Command-line entry point: ``cellgroup solve | export-network | oracle``.

Exit codes: 0 success, 1 solver/oracle disagreement, 2 usage or input
error, 3 solver limit reached. Errors go to stderr and nothing is written
to stdout on an error path.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .cells import CellConfig, run_heuristic, same_grouping, solve_qap, usage_factors
from .dissimilarity import dissimilarity_matrix
from .errors import GroupingError, InstanceTooLargeError, SolverTimeout
from .family import brute_force_families, build_network, solve_family_formation, to_dimacs
from .family.solver import DEFAULT_NODE_LIMIT
from .instance_file import read_instance
from .reporting import build_report, render_table

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_TIMEOUT = 3


class _Failure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load(path: str):
    try:
        return read_instance(path)
    except OSError as exc:
        raise _Failure(f"instance: cannot read {path}: {exc.strerror}", EXIT_INPUT) from None
    except GroupingError as exc:
        raise _Failure(f"instance: {exc}", EXIT_INPUT) from None


def _families(instance, D, node_limit):
    try:
        return solve_family_formation(instance, D, node_limit=node_limit)
    except SolverTimeout as exc:
        raise _Failure(
            f"family_formation: {exc} (lower bound {exc.bound})", EXIT_TIMEOUT
        ) from None


def _oracle(instance, D):
    try:
        return brute_force_families(instance, D)
    except InstanceTooLargeError as exc:
        raise _Failure(f"oracle: {exc}", EXIT_INPUT) from None


def _format_families(families) -> list[str]:
    lines = []
    for r, cycle in enumerate(families.cycles, start=1):
        arcs = ", ".join(f"{a}_b->{b}_a" for a, b in zip(cycle, cycle[1:] + cycle[:1]))
        lines.append(f"family {r}: routes {sorted(cycle)}  cycle {arcs}")
    return lines


def cmd_solve(args) -> tuple[str, int]:
    instance = _load(args.instance)
    D = dissimilarity_matrix(instance)
    _, families = _families(instance, D, args.node_limit)

    cells = args.cells if args.cells is not None else families.family_count
    cap = args.cell_cap if args.cell_cap is not None else math.ceil(instance.machine_count / cells)
    try:
        config = CellConfig(cells, cap)
        config.check(instance.machine_count)
    except GroupingError as exc:
        raise _Failure(f"cell_formation: {exc}", EXIT_INPUT) from None

    methods = ["qap", "heuristic"] if args.method == "both" else [args.method]
    u = usage_factors(instance, families)
    solutions = {}
    for method in methods:
        if method == "qap":
            try:
                solutions[method] = solve_qap(u, config)
            except SolverTimeout as exc:
                raise _Failure(f"cell_formation: {exc}", EXIT_TIMEOUT) from None
        else:
            solutions[method] = run_heuristic(instance, families, config)
    reports = {m: build_report(instance, families, s, D) for m, s in solutions.items()}

    oracle = _oracle(instance, D) if args.seed_check else None
    oracle_equal = oracle is None or oracle.objective == families.objective

    if args.format == "json":
        if len(methods) == 1:
            doc = reports[methods[0]].to_dict()
        else:
            doc = {m: r.to_dict() for m, r in reports.items()}
            doc["match"] = same_grouping(solutions["qap"], solutions["heuristic"], u)
        if oracle is not None:
            doc["oracle_objective"] = oracle.objective
        text = json.dumps(doc, indent=2)
    else:
        blocks = []
        for m, report in reports.items():
            blocks.append(f"== {m} ==\n{render_table(report)}")
        if len(methods) == 2:
            qap, heur = solutions["qap"], solutions["heuristic"]
            if same_grouping(qap, heur, u):
                blocks.append("qap vs heuristic: MATCH")
            else:
                blocks.append(
                    f"qap vs heuristic: MISMATCH (utilization {qap.utilization} vs {heur.utilization})"
                )
        if oracle is not None:
            verdict = "EQUAL" if oracle_equal else "DIFFERENT"
            blocks.append(
                f"oracle objective {oracle.objective}, solver objective "
                f"{families.objective}: {verdict}"
            )
        text = "\n\n".join(blocks)
    return text, EXIT_OK if oracle_equal else EXIT_MISMATCH


def cmd_export_network(args) -> tuple[str, int]:
    instance = _load(args.instance)
    text = to_dimacs(build_network(instance, dissimilarity_matrix(instance)))
    if args.out is None:
        return text.rstrip("\n"), EXIT_OK
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise _Failure(f"export: cannot write {args.out}: {exc.strerror}", EXIT_INPUT) from None
    return f"wrote {args.out}", EXIT_OK


def cmd_oracle(args) -> tuple[str, int]:
    instance = _load(args.instance)
    D = dissimilarity_matrix(instance)
    oracle = _oracle(instance, D)
    lines = [f"oracle objective: {oracle.objective}", *_format_families(oracle)]
    code = EXIT_OK
    if args.compare:
        _, families = _families(instance, D, args.node_limit)
        equal = families.objective == oracle.objective
        lines.append(f"solver objective: {families.objective}")
        lines.append("EQUAL" if equal else "DIFFERENT")
        code = EXIT_OK if equal else EXIT_MISMATCH
    return "\n".join(lines), code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellgroup",
        description="Route selection, part family and machine cell formation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the full grouping pipeline")
    solve.add_argument("--instance", required=True, metavar="PATH")
    solve.add_argument("--cells", type=int, metavar="C", help="maximum number of cells")
    solve.add_argument("--cell-cap", type=int, metavar="MAXC", help="maximum machines per cell")
    solve.add_argument("--method", choices=("qap", "heuristic", "both"), default="both")
    solve.add_argument("--format", choices=("table", "json"), default="table")
    solve.add_argument("--seed-check", action="store_true", help="cross-check against the brute-force oracle")
    solve.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, help=argparse.SUPPRESS)
    solve.set_defaults(func=cmd_solve)

    export = sub.add_parser("export-network", help="write the flow network in DIMACS format")
    export.add_argument("--instance", required=True, metavar="PATH")
    export.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    export.set_defaults(func=cmd_export_network)

    oracle = sub.add_parser("oracle", help="solve family formation by brute force")
    oracle.add_argument("--instance", required=True, metavar="PATH")
    oracle.add_argument("--compare", action="store_true", help="also run the solver and compare")
    oracle.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, help=argparse.SUPPRESS)
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        text, code = args.func(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
