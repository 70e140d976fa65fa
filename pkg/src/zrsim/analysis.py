"""Concentration metrics, world comparisons, grid sweeps, and aggregates.

The central comparison is between two hypothetical markets built from the
same parameters: one where zero-rating is unavailable (the all-zero
strategy profile) and one where it is available and the market settles on
the tie-break-selected equilibrium.  Each grid cell of a price sweep
records the selected profile and the deltas in CP utilities, CP market
shares, and the Herfindahl index between the two worlds.  Cells with no
equilibrium carry exactly zero deltas.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidArgument
from .equilibrium import (
    DEFAULT_DELTA_GRID,
    DiscountStatus,
    ZreStatus,
    discount_equilibrium,
    enumerate_zre,
)
from .market import MarketConfig, StrategyMatrix, allocate, masks_containing
from .payoff import payoffs

SIGN_TOL = 1e-12


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one grid cell: selected equilibrium and two-world deltas."""

    prices: tuple[float, ...]
    status: ZreStatus
    selected: StrategyMatrix | None
    delta_utility: tuple[float, ...]
    delta_share: tuple[float, ...]
    delta_hhi: float
    pressure: tuple[bool, ...]


@dataclass(frozen=True)
class SignSummary:
    """Per-CP averages of the sweep deltas with their sign classification.

    Signs are +1 / -1 / 0 with a tolerance of ``SIGN_TOL`` around zero.
    """

    avg_delta_utility: tuple[float, ...]
    avg_delta_share: tuple[float, ...]
    utility_signs: tuple[int, ...]
    share_signs: tuple[int, ...]


def _effective_users_per_cp(config: MarketConfig, theta: StrategyMatrix) -> np.ndarray:
    # Sums over every ISP column including the dummy: a CP's concentration
    # is measured over all of its users, wherever they connect.
    x_pair = allocate(config, theta).x_pair
    totals = np.empty(config.n_cps)
    for i in range(config.n_cps):
        totals[i] = x_pair[list(masks_containing(i, config.n_cps)), :].sum()
    return totals


def hhi(config: MarketConfig, theta: StrategyMatrix) -> float:
    """Herfindahl index of the actual-CP market under ``theta``.

    Computed as the normalized sum of squared effective-user counts,
    sum(X_i^2) / (sum(X_i))^2, so the result lies in (0, 1] regardless of
    the raw market size.
    """
    totals = _effective_users_per_cp(config, theta)
    grand = totals.sum()
    if grand <= 0.0:
        raise DomainError("Herfindahl index needs at least one CP with users")
    return float((totals**2).sum() / grand**2)


def market_shares(config: MarketConfig, theta: StrategyMatrix) -> np.ndarray:
    """Effective-user shares among actual CPs (same normalization as hhi)."""
    totals = _effective_users_per_cp(config, theta)
    grand = totals.sum()
    if grand <= 0.0:
        raise DomainError("market shares need at least one CP with users")
    return totals / grand


def hhi_variance_identity(shares: Sequence[float]) -> tuple[float, float]:
    """Herfindahl index of raw shares in two algebraic forms.

    Returns the normalized sum of squares and the equivalent mean-variance
    form 1/N + N * var(shares) / S**2, where S is the raw total.  The two
    agree to roughly 1e-12, which makes the identity an executable check.
    """
    x = np.asarray(shares, dtype=float)
    if x.size == 0:
        raise InvalidArgument("shares must be nonempty")
    total = x.sum()
    if total <= 0.0:
        raise DomainError("shares must have a positive sum")
    normalized = x / total
    sum_of_squares = float((normalized**2).sum())
    variance_form = float(1.0 / x.size + x.size * x.var() / total**2)
    return sum_of_squares, variance_form


def compare_worlds(config: MarketConfig) -> SweepRecord:
    """One cell's record: selected equilibrium vs. the no-zero-rating world."""
    result = enumerate_zre(config)
    n = config.n_cps
    if result.status is ZreStatus.NO_ZRE:
        return SweepRecord(
            prices=config.p,
            status=ZreStatus.NO_ZRE,
            selected=None,
            delta_utility=(0.0,) * n,
            delta_share=(0.0,) * n,
            delta_hhi=0.0,
            pressure=result.pressure,
        )
    baseline = StrategyMatrix.zeros(n, config.n_isps)
    u_base = payoffs(config, baseline).cp_utility
    u_sel = payoffs(config, result.selected).cp_utility
    share_base = market_shares(config, baseline)
    share_sel = market_shares(config, result.selected)
    return SweepRecord(
        prices=config.p,
        status=result.status,
        selected=result.selected,
        delta_utility=tuple(float(v) for v in u_sel - u_base),
        delta_share=tuple(float(v) for v in share_sel - share_base),
        delta_hhi=hhi(config, result.selected) - hhi(config, baseline),
        pressure=result.pressure,
    )


def _sweep_cell(args: tuple[MarketConfig, tuple[float, ...]]) -> SweepRecord:
    config, prices = args
    return compare_worlds(config.with_prices(prices))


def grid_sweep(
    config: MarketConfig,
    p_grid: Sequence[Sequence[float]],
    workers: int | None = None,
) -> list[SweepRecord]:
    """One record per Cartesian price-grid point, in row-major grid order.

    ``p_grid`` holds one value list per ISP.  Cells are pure and independent;
    ``workers`` > 1 runs them in a process pool while preserving the
    deterministic output ordering.
    """
    if len(p_grid) != config.n_isps:
        raise InvalidArgument(f"p_grid must have one value list per ISP ({config.n_isps})")
    if any(len(axis) == 0 for axis in p_grid):
        raise InvalidArgument("p_grid axes must be nonempty")
    cells = [
        (config, tuple(float(v) for v in prices))
        for prices in itertools.product(*p_grid)
    ]
    if workers is None:
        workers = default_worker_count()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // workers)))
    return [_sweep_cell(cell) for cell in cells]


def default_worker_count() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DiscountCell:
    """One discount-game grid cell: two-world record under the selected
    discount profile, plus the profile itself (None when no discount
    equilibrium exists, in which case the record carries zero deltas)."""

    record: SweepRecord
    delta_star: tuple[float, ...] | None


def _discount_cell(
    args: tuple[MarketConfig, tuple[float, ...], tuple[float, ...]]
) -> DiscountCell:
    config, prices, delta_grid = args
    priced = config.with_prices(prices)
    outcome = discount_equilibrium(priced, delta_grid)
    if outcome.status is DiscountStatus.NO_DISCOUNT_EQUILIBRIUM:
        n = config.n_cps
        record = SweepRecord(
            prices=prices,
            status=ZreStatus.NO_ZRE,
            selected=None,
            delta_utility=(0.0,) * n,
            delta_share=(0.0,) * n,
            delta_hhi=0.0,
            pressure=(False,) * n,
        )
        return DiscountCell(record=record, delta_star=None)
    record = compare_worlds(priced.with_delta(outcome.delta_star))
    return DiscountCell(record=record, delta_star=outcome.delta_star)


def discount_grid_sweep(
    config: MarketConfig,
    p_grid: Sequence[Sequence[float]],
    delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
    workers: int | None = None,
) -> list[DiscountCell]:
    """Discount-game counterpart of :func:`grid_sweep`.

    Each cell solves the ISP discount game at its prices and records the
    two-world deltas under the selected discount profile.
    """
    if len(p_grid) != config.n_isps:
        raise InvalidArgument(f"p_grid must have one value list per ISP ({config.n_isps})")
    if any(len(axis) == 0 for axis in p_grid):
        raise InvalidArgument("p_grid axes must be nonempty")
    delta_grid = tuple(float(v) for v in delta_grid)
    cells = [
        (config, tuple(float(v) for v in prices), delta_grid)
        for prices in itertools.product(*p_grid)
    ]
    if workers is None:
        workers = default_worker_count()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(_discount_cell, cells, chunksize=max(1, len(cells) // workers))
            )
    return [_discount_cell(cell) for cell in cells]


def _sign(value: float) -> int:
    if value > SIGN_TOL:
        return 1
    if value < -SIGN_TOL:
        return -1
    return 0


def aggregate_signs(records: Sequence[SweepRecord]) -> SignSummary:
    """Arithmetic means of the per-CP deltas over a sweep, with signs."""
    if not records:
        raise InvalidArgument("aggregate_signs requires at least one record")
    du = np.mean([r.delta_utility for r in records], axis=0)
    ds = np.mean([r.delta_share for r in records], axis=0)
    return SignSummary(
        avg_delta_utility=tuple(float(v) for v in du),
        avg_delta_share=tuple(float(v) for v in ds),
        utility_signs=tuple(_sign(v) for v in du),
        share_signs=tuple(_sign(v) for v in ds),
    )
