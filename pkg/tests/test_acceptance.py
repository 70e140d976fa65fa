"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Reference values come from the published duopoly evaluation: the benchmark
equilibrium map, the no-equilibrium cells of the high-usage-coefficient
variant, the reported discount-profile grid, and the direction table of
average utility/share changes.  Numbered criteria:

1. benchmark equilibrium map selects only value-ordering-admissible profiles
2. exact no-equilibrium cell set at c = 0.8
3. discount-game anchors + full reference-grid diff artifact
4. direction (sign) table across all parameter variants
5. concentration never drops on share-ordered grids
6. locked-out low-value CP always loses utility
7. Herfindahl identities over randomized configs
8. closed form vs. brute-force oracle equivalence
9. provider-merge additivity
"""

import csv
import dataclasses
import itertools
import time

import numpy as np

from zrsim import (
    MarketConfig,
    StrategyMatrix,
    ZreStatus,
    aggregate_signs,
    allocate,
    discount_grid_sweep,
    enumerate_zre,
    grid_sweep,
    hhi,
    hhi_variance_identity,
    is_zre,
    merge_providers,
    oracle_allocate,
    oracle_verify_zre,
)

from conftest import GRID11, random_config, random_theta

BENCH = MarketConfig(
    n_cps=2,
    n_isps=2,
    alpha=0.5,
    c=0.5,
    q=(0.4, 1.0),
    p=(1.0, 1.0),
    delta=(1.0, 1.0),
    phi=(0.1, 0.4, 0.4, 0.1),
    psi=(0.2, 0.4, 0.4),
)

VARIANTS = {
    "benchmark": BENCH,
    "c=0.2": dataclasses.replace(BENCH, c=0.2),
    "c=0.8": dataclasses.replace(BENCH, c=0.8),
    "alpha=0.2": dataclasses.replace(BENCH, alpha=0.2),
    "alpha=0.8": dataclasses.replace(BENCH, alpha=0.8),
    "phi=(0.1,0.2,0.6,0.1)": dataclasses.replace(BENCH, phi=(0.1, 0.2, 0.6, 0.1)),
    "phi=(0.1,0.6,0.2,0.1)": dataclasses.replace(BENCH, phi=(0.1, 0.6, 0.2, 0.1)),
    "psi=(0.2,0.2,0.6)": dataclasses.replace(BENCH, psi=(0.2, 0.2, 0.6)),
    "psi=(0.2,0.6,0.2)": dataclasses.replace(BENCH, psi=(0.2, 0.6, 0.2)),
}

# Published discount-profile grid: row label = second ISP's price, column
# label = first ISP's price, both 0.0..1.0 in steps of 0.1; each cell is the
# printed pair read as (delta_1, delta_2).
REFERENCE_DISCOUNTS = """
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.9 1.0,0.8 1.0,0.7 1.0,0.6 1.0,0.5
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.9 1.0,0.8 1.0,0.7 1.0,0.6 1.0,0.5
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.8 1.0,0.7 1.0,0.6 1.0,1.0
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.7 1.0,1.0 1.0,0.6
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.6
1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.9 1.0,0.8 1.0,0.7 1.0,0.6
0.9,1.0 0.9,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,0.8 1.0,0.7 1.0,1.0
0.8,1.0 0.8,1.0 0.8,1.0 1.0,1.0 1.0,1.0 0.9,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0 1.0,1.0
0.7,1.0 0.7,1.0 0.7,1.0 0.7,1.0 1.0,1.0 0.8,1.0 0.8,1.0 1.0,1.0 1.0,1.0 1.0,0.9 1.0,0.8
0.6,1.0 0.6,1.0 0.6,1.0 1.0,1.0 1.0,1.0 0.7,1.0 0.7,1.0 1.0,1.0 0.9,1.0 0.9,0.9 0.9,0.8
0.5,1.0 0.5,1.0 1.0,1.0 0.6,1.0 0.6,1.0 0.6,1.0 1.0,1.0 1.0,1.0 0.8,1.0 0.8,0.9 0.8,0.8
"""


def _reference_table() -> dict[tuple[float, float], tuple[float, float]]:
    table = {}
    for r, line in enumerate(REFERENCE_DISCOUNTS.strip().splitlines()):
        for c, cell in enumerate(line.split()):
            d1, d2 = (float(x) for x in cell.split(","))
            table[(c / 10, r / 10)] = (d1, d2)
    return table


def _admissible_profiles() -> set[str]:
    out = set()
    for bits in itertools.product((0, 1), repeat=4):
        if (bits[0] == 1 and bits[2] == 0) or (bits[1] == 1 and bits[3] == 0):
            continue
        out.add("".join(map(str, bits)))
    return out


def _report(criterion: int, detail: str) -> None:
    print(f"ACCEPTANCE criterion {criterion}: PASS  ({detail})")


def test_c1_benchmark_equilibrium_map():
    start = time.perf_counter()
    selected = set()
    for p1 in GRID11:
        for p2 in GRID11:
            result = enumerate_zre(BENCH.with_prices((p1, p2)))
            assert result.status is ZreStatus.EQUILIBRIA_FOUND
            bits = result.selected.bitstring()
            selected.add(bits)
            assert not (bits[0] == "1" and bits[2] == "0")
            assert not (bits[1] == "1" and bits[3] == "0")
    elapsed = time.perf_counter() - start
    admissible = _admissible_profiles()
    assert len(admissible) == 9
    assert selected <= admissible
    assert elapsed < 5.0, f"map took {elapsed:.2f}s, target 5s"
    _report(1, f"{len(selected)} admissible profiles selected in {elapsed:.2f}s")


def test_c2_no_equilibrium_cells_exact():
    config = dataclasses.replace(BENCH, c=0.8)
    missing = set()
    for p1 in GRID11:
        for p2 in GRID11:
            if enumerate_zre(config.with_prices((p1, p2))).status is ZreStatus.NO_ZRE:
                missing.add((p1, p2))
    assert missing == {(0.3, 0.3), (0.3, 0.4), (0.4, 0.3)}
    _report(2, "no-equilibrium set matches the reference exactly")


def test_c3_discount_game_reference_grid(tmp_path):
    start = time.perf_counter()
    cells = discount_grid_sweep(BENCH, (GRID11, GRID11), workers=1)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0, f"discount grid took {elapsed:.1f}s, target 120s"

    computed = {c.record.prices: c.delta_star for c in cells}
    reference = _reference_table()
    diff_path = tmp_path / "discount_grid_diff.csv"
    mismatches = []
    with diff_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p_1", "p_2", "computed", "reference", "match"])
        for p1 in GRID11:
            for p2 in GRID11:
                got = computed[(p1, p2)]
                want = reference[(p1, p2)]
                got_text = "NODEQ" if got is None else f"{got[0]:.1f},{got[1]:.1f}"
                want_text = f"{want[0]:.1f},{want[1]:.1f}"
                match = got_text == want_text
                if not match:
                    mismatches.append((p1, p2, got_text, want_text))
                writer.writerow([p1, p2, got_text, want_text, int(match)])
    print(
        f"discount grid diff: {121 - len(mismatches)}/121 cells match the reference; "
        f"full table at {diff_path}"
    )
    for p1, p2, got_text, want_text in mismatches[:12]:
        print(f"  cell ({p1}, {p2}): computed {got_text}, reference {want_text}")
    if len(mismatches) > 12:
        print(f"  ... and {len(mismatches) - 12} more (see diff file)")

    # Anchor cells pinned by the exit criteria.  Under the stated
    # equilibrium and selection rules three of them are not reproducible
    # (a unilateral discount undercut strictly raises the deviating ISP's
    # revenue at each, so the reference profiles fail the stated Nash
    # condition); the assertion documents the divergence instead of
    # hiding it.
    anchors = {
        (1.0, 1.0): (0.8, 0.8),
        (1.0, 0.0): (1.0, 0.5),
        (0.0, 1.0): (0.5, 1.0),
        (0.0, 0.0): (1.0, 1.0),
    }
    failures = {
        prices: (computed[prices], want)
        for prices, want in anchors.items()
        if computed[prices] != want
    }
    if failures:
        print(
            "ACCEPTANCE criterion 3: FAIL  "
            f"({len(failures)}/4 anchor cells diverge from the reference: {failures})"
        )
    assert not failures, f"anchor cells diverge from the reference: {failures}"
    _report(3, f"anchors match; grid diff emitted in {elapsed:.1f}s")


def test_c4_direction_table_signs():
    expected = {name: ((1, -1), (1, 1)) for name in VARIANTS}
    expected["c=0.8"] = ((-1, -1), (1, 1))
    for name, config in VARIANTS.items():
        signs = aggregate_signs(grid_sweep(config, (GRID11, GRID11), workers=1))
        got = (
            (signs.utility_signs[0], signs.share_signs[0]),
            (signs.utility_signs[1], signs.share_signs[1]),
        )
        assert got == expected[name], f"{name}: got {got}, expected {expected[name]}"
    _report(4, f"{len(VARIANTS)} grids reproduce the direction table")


def test_c5_concentration_never_drops_on_ordered_grids():
    # The non-decreasing concentration statement assumes values and
    # single-CP baselines are ordered the same way; the flipped-share
    # variant violates that hypothesis (and genuinely shows drops, see
    # test_analysis.TestMonotonicity), so the ordered eight are asserted.
    ordered = {
        name: config
        for name, config in VARIANTS.items()
        if config.phi[1] <= config.phi[2]
    }
    assert len(ordered) == 8
    worst = 0.0
    for config in ordered.values():
        for record in grid_sweep(config, (GRID11, GRID11), workers=1):
            worst = min(worst, record.delta_hhi)
            assert record.delta_hhi >= -1e-12
    _report(5, f"8 ordered grids, min concentration delta {worst:.3e}")


def test_c6_locked_out_low_value_cp_loses():
    qualifying = 0
    for config in VARIANTS.values():
        for record in grid_sweep(config, (GRID11, GRID11), workers=1):
            if record.selected is None:
                continue
            if any(record.selected.rows[0]) or not any(record.selected.rows[1]):
                continue
            qualifying += 1
            assert record.delta_utility[0] < 0.0, f"at {record.prices}"
            assert record.delta_utility[1] >= -1e-12, f"at {record.prices}"
    assert qualifying > 0
    _report(6, f"{qualifying} locked-out cells across all grids")


def test_c7_herfindahl_identities_randomized():
    rng = np.random.default_rng(1009)
    worst_identity = 0.0
    worst_equality = 0.0
    for _ in range(1000):
        config = random_config(rng)
        shares = rng.uniform(0.01, 2.0, size=int(rng.integers(1, 7)))
        a, b = hhi_variance_identity(shares)
        worst_identity = max(worst_identity, abs(a - b))
        zeros = StrategyMatrix.zeros(config.n_cps, config.n_isps)
        ones = StrategyMatrix.ones(config.n_cps, config.n_isps)
        worst_equality = max(worst_equality, abs(hhi(config, zeros) - hhi(config, ones)))
    assert worst_identity < 1e-12
    assert worst_equality < 1e-12
    _report(
        7,
        f"1000 configs: identity gap {worst_identity:.2e}, "
        f"all-or-none gap {worst_equality:.2e}",
    )


def test_c8_oracle_equivalence_fuzz():
    rng = np.random.default_rng(2003)
    worst = 0.0
    disagreements = 0
    for _ in range(1000):
        config = random_config(rng)
        theta = random_theta(rng, config)
        table = allocate(config, theta)
        oracle = oracle_allocate(config, theta)
        worst = max(worst, float(np.abs(table.rho - oracle.rho).max()))
        worst = max(worst, float(np.abs(table.x_effective - oracle.x_effective).max()))
        if is_zre(config, theta) != oracle_verify_zre(config, theta):
            disagreements += 1
    assert worst < 1e-12
    assert disagreements == 0
    _report(8, f"1000 fuzzed pairs: max error {worst:.2e}, verdicts all agree")


def test_c9_merge_additivity_randomized():
    rng = np.random.default_rng(3001)
    worst = 0.0
    for trial in range(500):
        merge_isps = trial % 2 == 0
        if merge_isps:
            config = random_config(rng, n_cps=2, n_isps=3)
            theta = random_theta(rng, config)
            subset = sorted(rng.choice(3, size=2, replace=False).tolist())
            cols = {(theta.rows[0][subset[0]], theta.rows[1][subset[0]])}
            for j in subset[1:]:
                theta = StrategyMatrix(
                    tuple(
                        tuple(
                            row[subset[0]] if k == j else v for k, v in enumerate(row)
                        )
                        for row in theta.rows
                    )
                )
            merged_config, merged_theta = merge_providers(
                config, theta, isp_subset=subset
            )
        else:
            config = random_config(rng, n_cps=3, n_isps=2)
            theta = random_theta(rng, config)
            subset = sorted(rng.choice(3, size=2, replace=False).tolist())
            for i in subset[1:]:
                theta = theta.with_row(i, theta.rows[subset[0]])
            merged_config, merged_theta = merge_providers(
                config, theta, cp_subset=subset
            )
        old = allocate(config, theta)
        new = allocate(merged_config, merged_theta)
        if merge_isps:
            summed = np.zeros_like(new.x_pair)
            summed[:, 0] = old.x_pair[:, 0]
            keep_col = subset[0] + 1
            new_j = 1
            for j in range(1, 4):
                if j == keep_col:
                    summed[:, new_j] = old.x_pair[:, subset[0] + 1] + old.x_pair[:, subset[1] + 1]
                    new_j += 1
                elif j != subset[1] + 1:
                    summed[:, new_j] = old.x_pair[:, j]
                    new_j += 1
        else:
            summed = np.zeros_like(new.x_pair)
            keep, drop = subset[0], subset[1]
            old_to_new = {}
            idx = 0
            for i in range(3):
                if i != drop:
                    old_to_new[i] = idx
                    idx += 1
            for s in range(8):
                t = 0
                for b in range(3):
                    if not s >> b & 1:
                        continue
                    t |= 1 << old_to_new[keep if b in (keep, drop) else b]
                summed[t, :] += old.x_pair[s, :]
        worst = max(worst, float(np.abs(new.x_pair - summed).max()))
    assert worst < 1e-12
    _report(9, f"500 randomized merges, max entrywise error {worst:.2e}")
