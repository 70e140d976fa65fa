"""Market structure and user allocation.

A market has N actual content providers (CPs) and M actual Internet service
providers (ISPs). Users pick exactly one ISP and any subset of CPs, so the
choice space is modeled with

* a dummy ISP (index 0) absorbing users with no real ISP,
* a dummy CP (subset mask 0) absorbing users with no real CP, and
* one auxiliary CP per non-empty subset of actual CPs.

Auxiliary CPs are indexed by bitmask: bit ``i`` set means actual CP ``i``
(0-based) is part of the bundle.  Baseline shares ``phi`` live on the full
2**N lattice and ``psi`` on the M+1 ISP axis; both sum to one.

Zero-rating relations are stored only for actual CP x actual ISP pairs and
extended on demand: an auxiliary CP is zero-rated with an ISP iff every
actual CP in the bundle is, and dummies are never zero-rated.

Given a strategy matrix, the elastic fraction ``alpha`` of users chooses
among zero-rated pairs (all pairs when none exist) proportionally to
baseline shares, while the sticky remainder stays on baseline shares.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ContractViolation, DomainError, InvalidArgument

SHARE_TOL = 1e-12


def _as_float_tuple(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class MarketConfig:
    """Full exogenous parameterization of one market instance.

    Attributes:
        n_cps: number of actual CPs (>= 1).
        n_isps: number of actual ISPs (>= 1).
        alpha: elastic user fraction, in [0, 1].
        c: bandwidth usage coefficient for non-zero-rated data, in (0, 1].
        q: per-bandwidth revenue of each actual CP, each in [0, 1].
        p: per-bandwidth price of each actual ISP, each in [0, 1].
        delta: price discount of each actual ISP, each in [0, 1].
        phi: baseline share of every auxiliary CP, indexed by subset mask
            (mask 0 = dummy CP); length 2**n_cps, entries in (0, 1], sums to 1.
        psi: baseline share of every ISP including the dummy at index 0;
            length n_isps + 1, entries in (0, 1], sums to 1.
        total_users: market size; defaults to 1 so allocations read as shares.
    """

    n_cps: int
    n_isps: int
    alpha: float
    c: float
    q: tuple[float, ...]
    p: tuple[float, ...]
    delta: tuple[float, ...]
    phi: tuple[float, ...]
    psi: tuple[float, ...]
    total_users: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _as_float_tuple(self.q))
        object.__setattr__(self, "p", _as_float_tuple(self.p))
        object.__setattr__(self, "delta", _as_float_tuple(self.delta))
        object.__setattr__(self, "phi", _as_float_tuple(self.phi))
        object.__setattr__(self, "psi", _as_float_tuple(self.psi))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "total_users", float(self.total_users))
        self._validate()

    def _validate(self) -> None:
        if not isinstance(self.n_cps, int) or self.n_cps < 1:
            raise ConfigError(f"n_cps must be an integer >= 1, got {self.n_cps!r}")
        if not isinstance(self.n_isps, int) or self.n_isps < 1:
            raise ConfigError(f"n_isps must be an integer >= 1, got {self.n_isps!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.c <= 1.0:
            raise ConfigError(f"c must lie in (0, 1], got {self.c}")
        if self.total_users <= 0.0:
            raise ConfigError(f"total_users must be positive, got {self.total_users}")
        if len(self.q) != self.n_cps:
            raise ConfigError(f"q must have length {self.n_cps}, got {len(self.q)}")
        if len(self.p) != self.n_isps:
            raise ConfigError(f"p must have length {self.n_isps}, got {len(self.p)}")
        if len(self.delta) != self.n_isps:
            raise ConfigError(f"delta must have length {self.n_isps}, got {len(self.delta)}")
        for name, vec in (("q", self.q), ("p", self.p)):
            for k, v in enumerate(vec):
                if not 0.0 <= v <= 1.0:
                    raise ConfigError(f"{name}[{k}] must lie in [0, 1], got {v}")
        # Zero discounts are admitted so the discount game can explore its
        # full grid; a zero simply makes zero-rated bandwidth free.
        for k, v in enumerate(self.delta):
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"delta[{k}] must lie in [0, 1], got {v}")
        if len(self.phi) != self.lattice_size:
            raise ConfigError(
                f"phi must have length 2**n_cps = {self.lattice_size}, got {len(self.phi)}"
            )
        if len(self.psi) != self.n_isps + 1:
            raise ConfigError(
                f"psi must have length n_isps + 1 = {self.n_isps + 1}, got {len(self.psi)}"
            )
        for name, vec in (("phi", self.phi), ("psi", self.psi)):
            for k, v in enumerate(vec):
                if not 0.0 < v <= 1.0:
                    raise ConfigError(f"{name}[{k}] must lie in (0, 1], got {v}")
            total = sum(vec)
            if abs(total - 1.0) > SHARE_TOL:
                raise ConfigError(f"{name} must sum to 1 within {SHARE_TOL}, got {total!r}")

    @property
    def lattice_size(self) -> int:
        """Number of auxiliary CP nodes, dummy included."""
        return 1 << self.n_cps

    def with_prices(self, p: Sequence[float]) -> "MarketConfig":
        return replace(self, p=_as_float_tuple(p))

    def with_delta(self, delta: Sequence[float]) -> "MarketConfig":
        return replace(self, delta=_as_float_tuple(delta))


@dataclass(frozen=True)
class AuxIndex:
    """Identifies one auxiliary CP by the bitmask of actual CPs it bundles.

    Mask 0 is the dummy CP.  Bit ``i`` corresponds to actual CP ``i``
    (0-based).
    """

    subset_mask: int

    def __post_init__(self) -> None:
        if self.subset_mask < 0:
            raise InvalidArgument(f"subset mask must be nonnegative, got {self.subset_mask}")

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.subset_mask.bit_length()) if self.subset_mask >> i & 1)

    @classmethod
    def from_cps(cls, cps: Iterable[int]) -> "AuxIndex":
        mask = 0
        for i in cps:
            mask |= 1 << i
        return cls(mask)


def aux_members(mask: int) -> tuple[int, ...]:
    """Actual CP indices bundled in auxiliary CP ``mask``."""
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def masks_containing(cp: int, n_cps: int) -> tuple[int, ...]:
    """All auxiliary masks whose bundle includes actual CP ``cp``."""
    return tuple(s for s in range(1 << n_cps) if s >> cp & 1)


@dataclass(frozen=True)
class StrategyMatrix:
    """Binary zero-rating profile over actual CP x actual ISP pairs.

    ``rows[i][j]`` is 1 iff actual CP ``i`` zero-rates with actual ISP ``j``
    (both 0-based).  Dummy and auxiliary providers are never stored; their
    zero-rating status is derived via :func:`extend_theta`.
    """

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows or not rows[0]:
            raise InvalidArgument("strategy matrix must have at least one CP and one ISP")
        width = len(rows[0])
        for row in rows:
            if len(row) != width:
                raise InvalidArgument("strategy matrix rows must have equal length")
            for v in row:
                if v not in (0, 1):
                    raise InvalidArgument(f"strategy entries must be 0 or 1, got {v}")

    @classmethod
    def zeros(cls, n_cps: int, n_isps: int) -> "StrategyMatrix":
        return cls(tuple((0,) * n_isps for _ in range(n_cps)))

    @classmethod
    def ones(cls, n_cps: int, n_isps: int) -> "StrategyMatrix":
        return cls(tuple((1,) * n_isps for _ in range(n_cps)))

    @classmethod
    def from_bitstring(cls, bits: str, n_cps: int, n_isps: int) -> "StrategyMatrix":
        if len(bits) != n_cps * n_isps or set(bits) - {"0", "1"}:
            raise InvalidArgument(f"bad bitstring {bits!r} for a {n_cps}x{n_isps} matrix")
        it = iter(bits)
        return cls(tuple(tuple(int(next(it)) for _ in range(n_isps)) for _ in range(n_cps)))

    @property
    def n_cps(self) -> int:
        return len(self.rows)

    @property
    def n_isps(self) -> int:
        return len(self.rows[0])

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self.rows[i][j]

    def flip(self, i: int, j: int) -> "StrategyMatrix":
        row = list(self.rows[i])
        row[j] = 1 - row[j]
        rows = list(self.rows)
        rows[i] = tuple(row)
        return StrategyMatrix(tuple(rows))

    def with_row(self, i: int, row: Sequence[int]) -> "StrategyMatrix":
        rows = list(self.rows)
        rows[i] = tuple(int(v) for v in row)
        return StrategyMatrix(tuple(rows))

    def bitstring(self) -> str:
        """Row-major serialization, e.g. "0111" for a duopoly."""
        return "".join(str(v) for row in self.rows for v in row)

    def encoding(self) -> int:
        return int(self.bitstring(), 2)

    def count_ones(self) -> int:
        return sum(v for row in self.rows for v in row)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int8)


def extend_theta(theta: StrategyMatrix, aux_mask: int, isp: int) -> int:
    """Zero-rating status of auxiliary CP ``aux_mask`` with ISP ``isp``.

    ``isp`` includes the dummy at 0; actual ISPs are 1..M.  The dummy CP
    (mask 0) and the dummy ISP are never zero-rated; an auxiliary bundle is
    zero-rated iff all member CPs are.
    """
    if not 0 <= aux_mask < (1 << theta.n_cps):
        raise InvalidArgument(f"aux mask {aux_mask} out of range for {theta.n_cps} CPs")
    if not 0 <= isp <= theta.n_isps:
        raise InvalidArgument(f"isp index {isp} out of range (0..{theta.n_isps})")
    if aux_mask == 0 or isp == 0:
        return 0
    return int(all(theta.rows[i][isp - 1] for i in aux_members(aux_mask)))


def choice_probability(
    choice_set: Iterable[tuple[int, int]],
    aux_mask: int,
    isp: int,
    config: MarketConfig,
) -> float:
    """Probability that a user restricted to ``choice_set`` picks a pair.

    ``choice_set`` holds (aux mask, isp index) pairs over the extended
    provider sets; probabilities are proportional to phi * psi and sum to
    one over the set.  Pairs outside the set have probability zero.
    """
    pairs = set(choice_set)
    if not pairs:
        raise DomainError("choice set must be nonempty")
    if not 0 <= aux_mask < config.lattice_size:
        raise InvalidArgument(f"aux mask {aux_mask} out of range")
    if not 0 <= isp <= config.n_isps:
        raise InvalidArgument(f"isp index {isp} out of range")
    if (aux_mask, isp) not in pairs:
        return 0.0
    norm = sum(config.phi[s] * config.psi[j] for s, j in pairs)
    return config.phi[aux_mask] * config.psi[isp] / norm


@dataclass(frozen=True)
class AllocationTable:
    """Per-pair market shares and user counts under one strategy profile.

    ``rho[s, j]`` is the market share of (auxiliary CP ``s``, ISP ``j``)
    with the dummy ISP at column 0; ``x_pair = rho * total_users``; and
    ``x_effective[i, j]`` counts effective users of actual CP ``i`` on
    actual ISP ``j``, i.e. the sum of ``x_pair`` over every bundle that
    contains CP ``i``.
    """

    rho: np.ndarray
    x_pair: np.ndarray
    x_effective: np.ndarray


def _extension_matrix(theta: StrategyMatrix) -> np.ndarray:
    n_cps, n_isps = theta.n_cps, theta.n_isps
    ext = np.zeros((1 << n_cps, n_isps + 1), dtype=np.int8)
    for s in range(1, 1 << n_cps):
        members = aux_members(s)
        for j in range(1, n_isps + 1):
            ext[s, j] = int(all(theta.rows[i][j - 1] for i in members))
    return ext


@lru_cache(maxsize=4096)
def _allocate_cached(
    phi: tuple[float, ...],
    psi: tuple[float, ...],
    alpha: float,
    total_users: float,
    rows: tuple[tuple[int, ...], ...],
) -> AllocationTable:
    theta = StrategyMatrix(rows)
    n_cps = theta.n_cps
    baseline = np.outer(np.asarray(phi), np.asarray(psi))
    ext = _extension_matrix(theta)
    if ext.any():
        zero_rated_mass = float((baseline * ext).sum())
        rho = alpha * baseline * ext / zero_rated_mass + (1.0 - alpha) * baseline
    else:
        rho = baseline
    x_pair = rho * total_users
    x_effective = np.zeros((n_cps, theta.n_isps))
    for i in range(n_cps):
        rows_for_cp = list(masks_containing(i, n_cps))
        x_effective[i, :] = x_pair[rows_for_cp, 1:].sum(axis=0)
    for arr in (rho, x_pair, x_effective):
        arr.flags.writeable = False
    return AllocationTable(rho=rho, x_pair=x_pair, x_effective=x_effective)


def allocate(config: MarketConfig, theta: StrategyMatrix) -> AllocationTable:
    """User allocation for one strategy profile.

    With no zero-rating anywhere the allocation is the baseline outer
    product phi * psi.  Otherwise the elastic fraction concentrates on the
    zero-rated pairs of the extended lattice, proportionally to baseline
    shares, and the sticky fraction stays on the baseline.
    """
    _check_dims(config, theta)
    return _allocate_cached(config.phi, config.psi, config.alpha, config.total_users, theta.rows)


def _check_dims(config: MarketConfig, theta: StrategyMatrix) -> None:
    if theta.n_cps != config.n_cps or theta.n_isps != config.n_isps:
        raise InvalidArgument(
            f"strategy matrix is {theta.n_cps}x{theta.n_isps}, "
            f"config expects {config.n_cps}x{config.n_isps}"
        )


def merge_providers(
    config: MarketConfig,
    theta: StrategyMatrix,
    cp_subset: Iterable[int] | None = None,
    isp_subset: Iterable[int] | None = None,
) -> tuple[MarketConfig, StrategyMatrix]:
    """Merge same-profile providers into one, preserving all allocations.

    Exactly one of ``cp_subset`` / ``isp_subset`` selects the actual
    providers (0-based) to merge.  All selected providers must share an
    identical zero-rating profile (equal rows for CPs, equal columns for
    ISPs); baseline shares add up, and per-bandwidth parameters are taken
    from the lowest-indexed member.  Untouched pair allocations are
    unchanged and the merged pair's allocation equals the sum of its
    constituents'.
    """
    _check_dims(config, theta)
    if (cp_subset is None) == (isp_subset is None):
        raise InvalidArgument("exactly one of cp_subset / isp_subset must be given")
    if cp_subset is not None:
        return _merge_cps(config, theta, sorted(set(cp_subset)))
    return _merge_isps(config, theta, sorted(set(isp_subset)))


def _merge_cps(
    config: MarketConfig, theta: StrategyMatrix, subset: list[int]
) -> tuple[MarketConfig, StrategyMatrix]:
    if not subset:
        raise InvalidArgument("cp_subset must be nonempty")
    if subset[0] < 0 or subset[-1] >= config.n_cps:
        raise InvalidArgument(f"cp_subset {subset} out of range")
    rows = {theta.rows[i] for i in subset}
    if len(rows) > 1:
        raise ContractViolation("merged CPs must share identical zero-rating rows")
    if len(subset) == 1:
        return config, theta

    keep = subset[0]
    dropped = set(subset[1:])
    old_to_new: dict[int, int] = {}
    new_index = 0
    for i in range(config.n_cps):
        if i in dropped:
            continue
        old_to_new[i] = new_index
        new_index += 1
    n_new = new_index

    def project(mask: int) -> int:
        out = 0
        touches_merged = False
        for i in aux_members(mask):
            if i in dropped or i == keep:
                touches_merged = True
            else:
                out |= 1 << old_to_new[i]
        if touches_merged:
            out |= 1 << old_to_new[keep]
        return out

    phi_new = [0.0] * (1 << n_new)
    for s, share in enumerate(config.phi):
        phi_new[project(s)] += share

    q_new = tuple(config.q[i] for i in range(config.n_cps) if i not in dropped)
    theta_new = StrategyMatrix(
        tuple(theta.rows[i] for i in range(config.n_cps) if i not in dropped)
    )
    config_new = replace(config, n_cps=n_new, q=q_new, phi=tuple(phi_new))
    return config_new, theta_new


def _merge_isps(
    config: MarketConfig, theta: StrategyMatrix, subset: list[int]
) -> tuple[MarketConfig, StrategyMatrix]:
    if not subset:
        raise InvalidArgument("isp_subset must be nonempty")
    if subset[0] < 0 or subset[-1] >= config.n_isps:
        raise InvalidArgument(f"isp_subset {subset} out of range")
    columns = {tuple(theta.rows[i][j] for i in range(config.n_cps)) for j in subset}
    if len(columns) > 1:
        raise ContractViolation("merged ISPs must share identical zero-rating columns")
    if len(subset) == 1:
        return config, theta

    keep = subset[0]
    dropped = set(subset[1:])
    kept_isps = [j for j in range(config.n_isps) if j not in dropped]
    psi_new = [config.psi[0]]
    for j in kept_isps:
        share = config.psi[j + 1]
        if j == keep:
            share += sum(config.psi[d + 1] for d in dropped)
        psi_new.append(share)
    p_new = tuple(config.p[j] for j in kept_isps)
    delta_new = tuple(config.delta[j] for j in kept_isps)
    theta_new = StrategyMatrix(
        tuple(tuple(row[j] for j in kept_isps) for row in theta.rows)
    )
    config_new = replace(
        config, n_isps=len(kept_isps), p=p_new, delta=delta_new, psi=tuple(psi_new)
    )
    return config_new, theta_new
