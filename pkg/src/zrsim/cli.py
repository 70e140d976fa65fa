"""Command-line front end.

Verbs:

* ``zrsim sweep <scenario> --out <dir>`` runs the scenario's price grid and
  writes ``grid.csv`` (one row per cell), ``summary.json`` (per-CP
  aggregates), and, in discount-game mode, ``discounts.csv`` (the selected
  discount profile per cell).
* ``zrsim verify <scenario>`` runs the invariant battery and prints one
  pass/fail line per check.
* ``zrsim zre <scenario> --p <prices>`` inspects a single price point:
  all equilibria, the selected one, and the pressure flags.

Exit codes: 0 success, 1 failed verification, 2 invalid scenario or usage,
3 capacity guard exceeded.  Outputs are byte-stable for identical inputs;
grid cells run on a worker pool sized by the ZRSIM_WORKERS environment
variable (default: available parallelism).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from .analysis import (
    DiscountCell,
    SweepRecord,
    aggregate_signs,
    default_worker_count,
    discount_grid_sweep,
    grid_sweep,
)
from .equilibrium import DEFAULT_DELTA_GRID, ZreStatus, enumerate_zre
from .errors import CapacityError
from .scenario import ScenarioError, load_scenario
from .verify import run_battery

WORKERS_ENV = "ZRSIM_WORKERS"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_CAPACITY = 3

_SIGN_WORDS = {1: "up", -1: "down", 0: "zero"}


def fmt_num(x: float) -> str:
    """12-significant-digit decimal form with normalized zero."""
    out = f"{float(x):.12g}"
    return "0" if out == "-0" else out


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return default_worker_count()
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def _grid_header(n_cps: int, n_isps: int) -> list[str]:
    return (
        [f"p_{j + 1}" for j in range(n_isps)]
        + ["theta"]
        + [f"delta_u_{i + 1}" for i in range(n_cps)]
        + [f"delta_share_{i + 1}" for i in range(n_cps)]
        + ["delta_hhi"]
        + [f"pressure_{i + 1}" for i in range(n_cps)]
    )


def _grid_row(record: SweepRecord) -> list[str]:
    theta = record.selected.bitstring() if record.selected is not None else "NOZRE"
    return (
        [fmt_num(p) for p in record.prices]
        + [theta]
        + [fmt_num(v) for v in record.delta_utility]
        + [fmt_num(v) for v in record.delta_share]
        + [fmt_num(record.delta_hhi)]
        + [str(int(flag)) for flag in record.pressure]
    )


def write_grid_csv(records: Sequence[SweepRecord], path: Path, n_cps: int, n_isps: int) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_grid_header(n_cps, n_isps))
        for record in records:
            writer.writerow(_grid_row(record))


def write_summary_json(records: Sequence[SweepRecord], path: Path) -> None:
    signs = aggregate_signs(records)
    summary = {
        "cells": len(records),
        "no_zre_prices": [
            [float(fmt_num(p)) for p in r.prices]
            for r in records
            if r.status is ZreStatus.NO_ZRE
        ],
        "per_cp": [
            {
                "cp": i + 1,
                "avg_delta_utility": float(fmt_num(signs.avg_delta_utility[i])),
                "utility_sign": _SIGN_WORDS[signs.utility_signs[i]],
                "avg_delta_share": float(fmt_num(signs.avg_delta_share[i])),
                "share_sign": _SIGN_WORDS[signs.share_signs[i]],
            }
            for i in range(len(signs.avg_delta_utility))
        ],
    }
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_discounts_csv(
    cells: Sequence[DiscountCell], path: Path, price_grid: Sequence[Sequence[float]]
) -> None:
    """Discount profile per cell; duopolies use a p2-row by p1-column matrix."""
    by_prices = {cell.record.prices: cell for cell in cells}

    def cell_text(cell: DiscountCell) -> str:
        if cell.delta_star is None:
            return "NODEQ"
        return ",".join(fmt_num(d) for d in cell.delta_star)

    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if len(price_grid) == 2:
            axis1, axis2 = price_grid
            writer.writerow(["p2\\p1"] + [fmt_num(p1) for p1 in axis1])
            for p2 in axis2:
                writer.writerow(
                    [fmt_num(p2)]
                    + [cell_text(by_prices[(float(p1), float(p2))]) for p1 in axis1]
                )
        else:
            m = len(price_grid)
            writer.writerow([f"p_{j + 1}" for j in range(m)] + [f"delta_{j + 1}" for j in range(m)])
            for cell in cells:
                row = [fmt_num(p) for p in cell.record.prices]
                if cell.delta_star is None:
                    row += ["NODEQ"] * m
                else:
                    row += [fmt_num(d) for d in cell.delta_star]
                writer.writerow(row)


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = _workers()
    if scenario.mode == "discount-game":
        delta_grid = scenario.delta_grid or DEFAULT_DELTA_GRID
        cells = discount_grid_sweep(
            scenario.config, scenario.price_grid, delta_grid, workers=workers
        )
        records = [cell.record for cell in cells]
        write_discounts_csv(
            cells, out_dir / scenario.output_names["discounts"], scenario.price_grid
        )
    else:
        records = grid_sweep(scenario.config, scenario.price_grid, workers=workers)
    write_grid_csv(
        records,
        out_dir / scenario.output_names["grid"],
        scenario.config.n_cps,
        scenario.config.n_isps,
    )
    write_summary_json(records, out_dir / scenario.output_names["summary"])
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    results = run_battery(scenario)
    width = max(len(r.name) for r in results)
    failed = skipped = 0
    for r in results:
        if r.passed is None:
            status = "SKIP"
            skipped += 1
        elif r.passed:
            status = "PASS"
        else:
            status = "FAIL"
            failed += 1
        print(f"{status}  {r.name:<{width}}  {r.detail}")
    tally = f"{len(results) - failed - skipped}/{len(results) - skipped} checks passed"
    if skipped:
        tally += f", {skipped} skipped"
    if failed:
        tally += f", {failed} failed"
    print(tally)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _cmd_zre(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    config = scenario.config
    if len(args.p) != config.n_isps:
        raise ScenarioError(f"--p needs {config.n_isps} prices, got {len(args.p)}")
    result = enumerate_zre(config.with_prices(args.p))
    print(f"prices: {' '.join(fmt_num(p) for p in args.p)}")
    if result.status is ZreStatus.NO_ZRE:
        print("status: NO_ZRE")
        return EXIT_OK
    print(f"status: {result.status.value}")
    print(f"equilibria ({len(result.all_zre)}): "
          + " ".join(t.bitstring() for t in result.all_zre))
    print(f"selected: {result.selected.bitstring()}")
    print("pressure: " + " ".join(str(int(f)) for f in result.pressure))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zrsim",
        description="Zero-rating market simulator: price-grid sweeps, "
        "equilibrium inspection, and invariant verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a scenario's price grid and write artifacts")
    p_sweep.add_argument("scenario", help="path to a scenario JSON file")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant battery on a scenario")
    p_verify.add_argument("scenario", help="path to a scenario JSON file")
    p_verify.set_defaults(func=_cmd_verify)

    p_zre = sub.add_parser("zre", help="inspect equilibria at a single price point")
    p_zre.add_argument("scenario", help="path to a scenario JSON file")
    p_zre.add_argument(
        "--p", required=True, nargs="+", type=float, help="one price per ISP"
    )
    p_zre.set_defaults(func=_cmd_zre)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    raise SystemExit(main())
