"""Benchmark CLI: load a map/scenario, solve, write artifacts.

Exit codes: 0 solved (optimally or not), 2 no solution exists, 3 timeout
before any solution, 4 input/parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import backend
from .graphs import lower_bound, sum_of_loss, validate_solution
from .io import (
    MapFormatError,
    ScenarioFormatError,
    format_solution,
    parse_map,
    parse_scen,
)
from .search import SolveStatus
from .solver import PRESETS, SolverConfig, solve

EXIT_SOLVED = 0
EXIT_NO_SOLUTION = 2
EXIT_TIMEOUT = 3
EXIT_INPUT_ERROR = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lacamx",
        description="Anytime multi-agent pathfinding on MAPF benchmark grids.",
    )
    p.add_argument("--map", required=True, help="benchmark .map file")
    p.add_argument("--scen", required=True, help="benchmark .scen file")
    p.add_argument("--agents", type=int, required=True, help="number of agents")
    p.add_argument("--time-limit-ms", type=float, default=10_000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=PRESETS, default=None,
                   help="feature preset; individual flags override it")
    p.add_argument("--suo-margin", type=int, default=None,
                   help="scattered-path length margin; -1 disables")
    p.add_argument("--mc-samples", type=int, default=None,
                   help="Monte-Carlo samples per successor generation")
    p.add_argument("--mc-workers", type=int, default=None,
                   help="worker threads for Monte-Carlo sampling (0 = auto)")
    p.add_argument("--refiners", type=int, default=None,
                   help="concurrent refiner workers")
    p.add_argument("--recursive-prob", type=float, default=None)
    p.add_argument("--recursive-timeout-ms", type=float, default=None)
    p.add_argument("--extract-prob", type=float, default=None)
    p.add_argument("--extract-strategy", choices=("random", "restart"), default=None)
    p.add_argument("--reinsert-init-prob", type=float, default=None)
    p.add_argument("--no-swap", action="store_true",
                   help="disable the narrow-passage swap heuristic")
    p.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    p.add_argument("--out-dir", default=".",
                   help="directory for solution.txt and anytime.csv")
    p.add_argument("--solution-name", default="solution.txt")
    p.add_argument("--csv-name", default="anytime.csv")
    return p


def config_from_args(args: argparse.Namespace) -> SolverConfig:
    cfg = SolverConfig.preset(args.preset) if args.preset else SolverConfig()
    overrides = {
        "time_limit_ms": args.time_limit_ms,
        "seed": args.seed,
    }
    for flag, attr in (
        ("suo_margin", "suo_margin"),
        ("mc_samples", "mc_samples"),
        ("mc_workers", "mc_workers"),
        ("refiners", "refiners"),
        ("recursive_prob", "recursive_prob"),
        ("recursive_timeout_ms", "recursive_timeout_ms"),
        ("extract_prob", "extract_prob"),
        ("extract_strategy", "extract_strategy"),
        ("reinsert_init_prob", "reinsert_init_prob"),
    ):
        val = getattr(args, flag)
        if val is not None:
            overrides[attr] = val
    if args.no_swap:
        overrides["swap_enabled"] = False
    from dataclasses import replace

    return replace(cfg, **overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    backend.select(args.backend)
    try:
        gmap = parse_map(Path(args.map).read_text())
        instance = parse_scen(Path(args.scen).read_text(), gmap, args.agents)
    except (OSError, MapFormatError, ScenarioFormatError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    cfg = config_from_args(args)
    result = solve(instance, cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / args.csv_name
    with csv_path.open("w") as f:
        f.write("elapsed_ms,sum_of_loss,flowtime,source\n")
        for rec in result.records:
            f.write(
                f"{rec.elapsed_ms:.3f},{rec.sum_of_loss},{rec.flowtime},{rec.source}\n"
            )

    sol_path = out_dir / args.solution_name
    if result.solution is not None:
        sol_path.write_text(format_solution(result.solution, gmap))
        bad = validate_solution(instance, result.solution)
        if bad is not None:  # defensive; the search re-validates upstream
            print(f"internal error: emitted solution invalid: {bad}", file=sys.stderr)
            return EXIT_INPUT_ERROR

    counters = result.search_result.counters if result.search_result else None
    lb = result.lower_bound
    print(
        "status={} initial_cost={} final_cost={} lb={} initial_ms={} "
        "scatter_ms={:.0f} nodes={} generator_calls={} iterations={} backend={}".format(
            result.status.value,
            result.initial_cost,
            result.final_cost,
            lb,
            f"{result.initial_time_ms:.0f}" if result.initial_time_ms else None,
            result.scatter_ms,
            counters.nodes if counters else 0,
            counters.generator_calls if counters else 0,
            counters.iterations if counters else 0,
            backend.name(),
        )
    )
    if result.status in (SolveStatus.SOLVED, SolveStatus.OPTIMALLY_SOLVED):
        return EXIT_SOLVED
    if result.status is SolveStatus.NO_SOLUTION:
        return EXIT_NO_SOLUTION
    return EXIT_TIMEOUT


if __name__ == "__main__":
    raise SystemExit(main())
