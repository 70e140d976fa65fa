"""Independent brute-force validator for allocations and equilibria.

Everything here is deliberately recomputed from first principles -- explicit
choice sets per user class and pair-by-pair probability sums -- rather than
through the closed-form allocation path, so agreement between the two routes
is evidence that the closed form was transcribed correctly.  Performance is
a non-goal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .equilibrium import GAIN_TOL
from .errors import DomainError, InvalidArgument
from .market import AllocationTable, MarketConfig, StrategyMatrix, choice_probability


@dataclass(frozen=True)
class ChoiceSet:
    """Explicit set of (aux mask, isp index) pairs available to a user class."""

    pairs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise DomainError("choice set must be nonempty")


def _bundle_zero_rated(theta: StrategyMatrix, mask: int, isp: int) -> bool:
    # Own extension logic: a bundle is zero-rated iff every member CP's
    # stored cell is 1; dummies never are.
    if mask == 0 or isp == 0:
        return False
    for i in range(theta.n_cps):
        if mask >> i & 1 and theta.rows[i][isp - 1] == 0:
            return False
    return True


def sticky_choice_set(config: MarketConfig) -> ChoiceSet:
    """The full extended choice set, dummies included."""
    return ChoiceSet(
        frozenset(
            (s, j) for s in range(config.lattice_size) for j in range(config.n_isps + 1)
        )
    )


def elastic_choice_set(config: MarketConfig, theta: StrategyMatrix) -> ChoiceSet:
    """Zero-rated pairs when any exist, otherwise the full choice set."""
    zero_rated = frozenset(
        (s, j)
        for s in range(config.lattice_size)
        for j in range(config.n_isps + 1)
        if _bundle_zero_rated(theta, s, j)
    )
    if zero_rated:
        return ChoiceSet(zero_rated)
    return sticky_choice_set(config)


def oracle_allocate(config: MarketConfig, theta: StrategyMatrix) -> AllocationTable:
    """Allocation recomputed directly from the two user classes.

    Sticky users draw from the full choice set and elastic users from the
    zero-rated one; each class is distributed pair by pair via
    :func:`choice_probability` and the classes are mixed with weights
    (1 - alpha, alpha).
    """
    if theta.n_cps != config.n_cps or theta.n_isps != config.n_isps:
        raise InvalidArgument("strategy matrix does not match the config dimensions")
    sticky = sticky_choice_set(config)
    elastic = elastic_choice_set(config, theta)
    rho = np.zeros((config.lattice_size, config.n_isps + 1))
    for s in range(config.lattice_size):
        for j in range(config.n_isps + 1):
            p_sticky = choice_probability(sticky.pairs, s, j, config)
            p_elastic = choice_probability(elastic.pairs, s, j, config)
            rho[s, j] = (1.0 - config.alpha) * p_sticky + config.alpha * p_elastic
    x_pair = rho * config.total_users
    x_effective = np.zeros((config.n_cps, config.n_isps))
    for i in range(config.n_cps):
        for j in range(config.n_isps):
            total = 0.0
            for s in range(config.lattice_size):
                if s >> i & 1:
                    total += x_pair[s, j + 1]
            x_effective[i, j] = total
    return AllocationTable(rho=rho, x_pair=x_pair, x_effective=x_effective)


def _oracle_totals(config: MarketConfig, theta: StrategyMatrix) -> tuple[list[float], list[float]]:
    """(CP utilities, ISP revenues), recomputed from the oracle allocation."""
    x_eff = oracle_allocate(config, theta).x_effective
    utilities = []
    for i in range(config.n_cps):
        u = 0.0
        for j in range(config.n_isps):
            if theta.rows[i][j]:
                u += (config.q[i] - config.delta[j] * config.p[j]) * x_eff[i, j]
            else:
                u += config.q[i] * x_eff[i, j] * config.c
        utilities.append(u)
    revenues = []
    for j in range(config.n_isps):
        r = 0.0
        for i in range(config.n_cps):
            if theta.rows[i][j]:
                r += config.delta[j] * config.p[j] * x_eff[i, j]
            else:
                r += config.p[j] * x_eff[i, j] * config.c
        revenues.append(r)
    return utilities, revenues


class Violation(NamedTuple):
    """A single-cell deviation that breaks the equilibrium conditions."""

    cp: int
    isp: int
    move: str  # "cancel" or "establish"
    gainers: tuple[str, ...]  # which side(s) strictly gain from the move


def find_zre_violation(config: MarketConfig, theta: StrategyMatrix) -> Violation | None:
    """First deviation (row-major cell order) that breaks equilibrium, if any.

    A zero-rating relation is a bilateral contract: either party can cancel
    an existing relation on its own, but establishing one takes both.  So a
    1-cell breaks the profile when the CP or the ISP strictly gains from
    canceling it, and a 0-cell breaks it when both strictly gain from
    establishing it ("gain" exceeds the shared GAIN_TOL margin, so tie
    verdicts agree across the two arithmetic routes).  Cells forced by a
    zero ISP price are never deviated.
    """
    forced_cols = {j for j in range(config.n_isps) if config.p[j] == 0.0}
    for j in forced_cols:
        for i in range(config.n_cps):
            if theta.rows[i][j] != 1:
                raise InvalidArgument(f"cell ({i}, {j}) must be 1 because p[{j}] = 0")
    base_u, base_r = _oracle_totals(config, theta)
    for i in range(config.n_cps):
        for j in range(config.n_isps):
            if j in forced_cols:
                continue
            flip_u, flip_r = _oracle_totals(config, theta.flip(i, j))
            cp_gains = flip_u[i] > base_u[i] + GAIN_TOL
            isp_gains = flip_r[j] > base_r[j] + GAIN_TOL
            if theta.rows[i][j] == 1:
                if cp_gains or isp_gains:
                    gainers = tuple(
                        side for side, g in (("cp", cp_gains), ("isp", isp_gains)) if g
                    )
                    return Violation(i, j, "cancel", gainers)
            else:
                if cp_gains and isp_gains:
                    return Violation(i, j, "establish", ("cp", "isp"))
    return None


def oracle_verify_zre(config: MarketConfig, theta: StrategyMatrix) -> bool:
    """Re-verify an equilibrium by exhaustive deviation checking."""
    return find_zre_violation(config, theta) is None
