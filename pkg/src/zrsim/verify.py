"""Scenario verification battery.

Runs the executable invariants of the model against one scenario: closed
form vs. brute-force oracle agreement, the Herfindahl identities, the
concentration and utility monotonicity statements, the value-ordering
pruning rule, and (when the scenario records them) the expected
no-equilibrium price cells.  Each check reports pass/fail with a short
detail line; checks whose preconditions the scenario does not meet are
skipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import compare_worlds, grid_sweep, hhi, hhi_variance_identity
from .equilibrium import ZreStatus, enumerate_zre, is_zre
from .market import MarketConfig, StrategyMatrix, allocate
from .oracle import oracle_allocate, oracle_verify_zre
from .scenario import Scenario

ORACLE_TOL = 1e-12
HHI_TOL = 1e-12
VERIFY_SEED = 20240517


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool | None  # None = skipped
    detail: str


def _random_config(rng: np.random.Generator, n_cps: int, n_isps: int) -> MarketConfig:
    phi = rng.uniform(0.05, 1.0, size=1 << n_cps)
    phi /= phi.sum()
    psi = rng.uniform(0.05, 1.0, size=n_isps + 1)
    psi /= psi.sum()
    p = rng.uniform(0.0, 1.0, size=n_isps)
    p[rng.uniform(size=n_isps) < 0.15] = 0.0
    return MarketConfig(
        n_cps=n_cps,
        n_isps=n_isps,
        alpha=float(rng.uniform(0.0, 1.0)),
        c=float(rng.uniform(0.05, 1.0)),
        q=tuple(np.sort(rng.uniform(0.0, 1.0, size=n_cps))),
        p=tuple(p),
        delta=tuple(rng.uniform(0.0, 1.0, size=n_isps)),
        phi=tuple(phi),
        psi=tuple(psi),
    )


def _random_theta(rng: np.random.Generator, config: MarketConfig) -> StrategyMatrix:
    rows = rng.integers(0, 2, size=(config.n_cps, config.n_isps))
    for j in range(config.n_isps):
        if config.p[j] == 0.0:
            rows[:, j] = 1
    return StrategyMatrix(tuple(tuple(int(v) for v in row) for row in rows))


def _grid_results(scenario: Scenario):
    import itertools

    config = scenario.config
    for prices in itertools.product(*scenario.price_grid):
        cell = config.with_prices(prices)
        yield cell, enumerate_zre(cell)


def check_oracle_allocation(scenario: Scenario) -> CheckResult:
    worst = 0.0
    for cell, result in _grid_results(scenario):
        thetas = [StrategyMatrix.zeros(cell.n_cps, cell.n_isps)]
        if result.selected is not None:
            thetas.append(result.selected)
        for theta in thetas:
            diff = np.abs(allocate(cell, theta).rho - oracle_allocate(cell, theta).rho).max()
            worst = max(worst, float(diff))
    ok = worst < ORACLE_TOL
    return CheckResult("oracle-allocation", ok, f"max |rho - oracle rho| = {worst:.3e}")


def check_oracle_equilibrium(scenario: Scenario) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED)
    disagreements = 0
    checked = 0
    for cell, result in _grid_results(scenario):
        for theta in result.all_zre:
            checked += 1
            if not oracle_verify_zre(cell, theta):
                disagreements += 1
        for _ in range(3):
            theta = _random_theta(rng, cell)
            checked += 1
            if is_zre(cell, theta) != oracle_verify_zre(cell, theta):
                disagreements += 1
    ok = disagreements == 0
    return CheckResult(
        "oracle-equilibrium", ok, f"{checked} verdicts compared, {disagreements} disagreements"
    )


def check_hhi_identity(_: Scenario) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED)
    worst = 0.0
    for _ in range(200):
        shares = rng.uniform(0.01, 1.0, size=int(rng.integers(1, 6)))
        a, b = hhi_variance_identity(shares)
        worst = max(worst, abs(a - b))
    ok = worst < HHI_TOL
    return CheckResult("hhi-variance-identity", ok, f"max |forms| gap = {worst:.3e}")


def check_hhi_all_or_none(scenario: Scenario) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED)
    configs = [scenario.config]
    for _ in range(100):
        configs.append(
            _random_config(rng, int(rng.integers(2, 4)), int(rng.integers(1, 4)))
        )
    worst = 0.0
    for cfg in configs:
        zeros = StrategyMatrix.zeros(cfg.n_cps, cfg.n_isps)
        ones = StrategyMatrix.ones(cfg.n_cps, cfg.n_isps)
        worst = max(worst, abs(hhi(cfg, zeros) - hhi(cfg, ones)))
    ok = worst < HHI_TOL
    return CheckResult("hhi-all-or-none", ok, f"max |HHI(0) - HHI(1)| gap = {worst:.3e}")


def _ordered_for_concentration(config: MarketConfig) -> bool:
    singles = [config.phi[1 << i] for i in range(config.n_cps)]
    return all(a <= b for a, b in zip(config.q, config.q[1:])) and all(
        a <= b for a, b in zip(singles, singles[1:])
    )


def check_hhi_nondecreasing(scenario: Scenario) -> CheckResult:
    if not _ordered_for_concentration(scenario.config):
        return CheckResult(
            "hhi-nondecreasing", None, "skipped: values/baselines not co-ordered"
        )
    records = grid_sweep(scenario.config, scenario.price_grid, workers=1)
    worst = min(r.delta_hhi for r in records)
    ok = worst >= -HHI_TOL
    return CheckResult("hhi-nondecreasing", ok, f"min delta HHI = {worst:.3e}")


def check_low_value_utility_drop(scenario: Scenario) -> CheckResult:
    config = scenario.config
    low = int(np.argmin(config.q))
    high = int(np.argmax(config.q))
    if low == high:
        return CheckResult("low-value-utility-drop", None, "skipped: single CP")
    hits = 0
    for cell, result in _grid_results(scenario):
        if result.selected is None:
            continue
        rows = result.selected.rows
        if any(rows[low]) or not any(rows[high]):
            continue
        if any(any(rows[i]) for i in range(config.n_cps) if i not in (low, high)):
            continue
        hits += 1
        record = compare_worlds(cell)
        if not (record.delta_utility[low] < 0.0 and record.delta_utility[high] >= -HHI_TOL):
            return CheckResult(
                "low-value-utility-drop",
                False,
                f"violated at prices {cell.p}: deltas {record.delta_utility}",
            )
    return CheckResult("low-value-utility-drop", True, f"{hits} qualifying cells checked")


def check_value_ordering_pruning(scenario: Scenario) -> CheckResult:
    config = scenario.config
    scanned = 0
    for cell, result in _grid_results(scenario):
        for theta in result.all_zre:
            scanned += 1
            for i in range(config.n_cps):
                for k in range(config.n_cps):
                    if config.q[i] >= config.q[k]:
                        continue
                    for j in range(config.n_isps):
                        if theta.rows[i][j] == 1 and theta.rows[k][j] == 0:
                            return CheckResult(
                                "value-ordering-pruning",
                                False,
                                f"prices {cell.p}: {theta.bitstring()} has a low-value-only relation",
                            )
    return CheckResult("value-ordering-pruning", True, f"{scanned} equilibria scanned")


def check_expected_no_zre(scenario: Scenario) -> CheckResult:
    if scenario.expected_no_zre is None:
        return CheckResult("no-zre-cells", None, "skipped: no expectation recorded")
    observed = {
        cell.p
        for cell, result in _grid_results(scenario)
        if result.status is ZreStatus.NO_ZRE
    }
    expected = set(scenario.expected_no_zre)
    ok = observed == expected
    detail = f"observed {sorted(observed)}" if not ok else f"{len(expected)} cells as expected"
    return CheckResult("no-zre-cells", ok, detail)


ALL_CHECKS = (
    check_oracle_allocation,
    check_oracle_equilibrium,
    check_hhi_identity,
    check_hhi_all_or_none,
    check_hhi_nondecreasing,
    check_low_value_utility_drop,
    check_value_ordering_pruning,
    check_expected_no_zre,
)


def run_battery(scenario: Scenario) -> list[CheckResult]:
    return [check(scenario) for check in ALL_CHECKS]
