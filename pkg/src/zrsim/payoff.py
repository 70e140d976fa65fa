"""CP utilities and ISP revenues under a strategy profile.

Per effective user of a (CP i, ISP j) pair: without zero-rating the CP earns
q_i and the ISP earns p_j, both discounted by the usage coefficient c (users
who pay for data consume less); with zero-rating the CP pays the discounted
bandwidth price and keeps the margin q_i - delta_j * p_j while the ISP
collects delta_j * p_j, with no usage discount.  Users of dummy providers
generate no payoff, which the effective-user table already encodes by
excluding the dummy ISP column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import MarketConfig, StrategyMatrix, _check_dims, allocate


@dataclass(frozen=True)
class PayoffVector:
    """Per-provider payoffs and their per-pair decomposition.

    ``per_pair_cp[i, j]`` and ``per_pair_isp[i, j]`` are the contributions
    of pair (CP i, ISP j); ``cp_utility`` sums rows and ``isp_revenue`` sums
    columns.
    """

    cp_utility: np.ndarray
    isp_revenue: np.ndarray
    per_pair_cp: np.ndarray
    per_pair_isp: np.ndarray


def payoffs(config: MarketConfig, theta: StrategyMatrix) -> PayoffVector:
    """Evaluate all provider payoffs under ``theta``."""
    _check_dims(config, theta)
    x_eff = allocate(config, theta).x_effective
    mask = theta.as_array().astype(bool)
    q = np.asarray(config.q)[:, None]
    p = np.asarray(config.p)[None, :]
    dp = (np.asarray(config.delta) * np.asarray(config.p))[None, :]

    per_pair_cp = np.where(mask, (q - dp) * x_eff, q * x_eff * config.c)
    per_pair_isp = np.where(mask, dp * x_eff, p * x_eff * config.c)
    for arr in (per_pair_cp, per_pair_isp):
        arr.flags.writeable = False
    cp_utility = per_pair_cp.sum(axis=1)
    isp_revenue = per_pair_isp.sum(axis=0)
    cp_utility.flags.writeable = False
    isp_revenue.flags.writeable = False
    return PayoffVector(
        cp_utility=cp_utility,
        isp_revenue=isp_revenue,
        per_pair_cp=per_pair_cp,
        per_pair_isp=per_pair_isp,
    )
