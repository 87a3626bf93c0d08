"""Acceptance criteria, one test per criterion (criterion 8 split in three).

Each test records a PASS/FAIL line; the lines are printed in the pytest terminal
summary, or directly when this file is run as a script.
"""

import itertools
import sys
import time
from fractions import Fraction as F

import numpy as np

from bdwalk.classifier import Verdict, classify, estimate_z
from bdwalk.combinatorics import birth_rate, death_rate, pn_bounds, pn_symmetric, pn_uniform_k
from bdwalk.levelchain import CoordinateChainSpec, fit_z_from_pn, level_up_probabilities, walk_coordinates
from bdwalk.montecarlo import SimConfig, compare_families, empirical_transition_table, return_statistics, simulate_walk, wilson_interval
from bdwalk.rates import BDGamma, RatioFamily
from bdwalk.walks import WalkSpec, k_range

from conftest import polya_up_fraction

RESULTS: list[str] = []
SEED = 20261016


def record(label, ok, detail, started, budget):
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < budget
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} {label}: {detail} [{elapsed:.1f}s / {budget:.0f}s]")
    print(RESULTS[-1], flush=True)
    assert ok, RESULTS[-1]


def test_criterion_1_exact_values():
    t0 = time.perf_counter()
    ok = pn_symmetric(1, 2) == F(3, 4) and pn_symmetric(1, 3) == F(5, 6)
    ok &= all(pn_symmetric(n, 2) == F(2 * n + 1, 4 * n) for n in range(1, 1001))
    ok &= all(pn_symmetric(n, d) == polya_up_fraction(d, n) for d in (2, 3, 4) for n in range(1, 21))
    record("1 exact values + move-counting oracle (n<=20, d<=4)", ok, "exact equality", t0, 10)


def test_criterion_2_birth_death_identity():
    t0 = time.perf_counter()
    bad = [
        (n, d) for d in range(2, 7) for n in range(1, 1001)
        if pn_symmetric(n, d) != birth_rate(2, d, n) / (birth_rate(2, d, n) + death_rate(2, d, n))
    ]
    record("2 pnSymmetric = lambda/(lambda+mu), n<=1000, 2<=d<=6", not bad, f"{len(bad)} mismatches", t0, 10)


def test_criterion_3_z_limit():
    t0 = time.perf_counter()
    worst = max(abs(estimate_z(BDGamma(g, d)).z - (d - 1)) for g in (1, 2, 4) for d in range(2, 6))
    record("3 extrapolated z within 1e-3 of d-1", worst < 1e-3, f"max |z-(d-1)| = {worst:.2e}", t0, 60)


def test_criterion_4_verdicts():
    t0 = time.perf_counter()
    got = {d: classify(BDGamma(2, d)).verdict for d in (2, 3, 4, 5)}
    ok = got[2] is Verdict.NULL_RECURRENT and all(got[d] is Verdict.TRANSIENT for d in (3, 4, 5))
    record("4 classify(BD(2,d)) verdicts", ok, ", ".join(f"d={d}:{v.value}" for d, v in got.items()), t0, 60)


def test_criterion_5_sandwich_and_monotonicity():
    t0 = time.perf_counter()
    spec = WalkSpec.build("model2", 2, ["1/4", "1/4"], delta=["1/4", "0"])
    inside = all(
        pn_uniform_k(r.level, 2, 1) <= r.p <= pn_uniform_k(r.level, 2, 2)
        for r in level_up_probabilities(walk_coordinates(spec), range(1, 21))
    )
    ks = [F(1, 4), F(1, 2), F(1), F(2), F(4)]
    mono = all(
        all(a < b for a, b in zip(vals, vals[1:]))
        for d in range(2, 6) for n in range(1, 101)
        for vals in [[pn_uniform_k(n, d, k) for k in ks]]
    )
    ok = inside and mono and k_range(spec) == (1, 2)
    record("5 Model 2 sandwich n<=20 and k-monotonicity", ok, f"sandwich={inside}, monotone={mono}", t0, 10)


def test_criterion_6_monte_carlo_anchoring():
    t0 = time.perf_counter()
    details, ok = [], True
    for d, alpha, walks in ((2, ["1/4", "1/4"], 40_000), (3, ["1/6", "1/6", "1/6"], 60_000)):
        spec = WalkSpec.build("model1", d, alpha)
        row = empirical_transition_table(spec, SimConfig(steps=1000, walks=walks, burn_in=0, n_max=1, seed=SEED)).row(1)
        lo, hi = wilson_interval(row.up, row.visits, 4.0)
        exact = float(pn_symmetric(1, d))
        ok &= row.visits >= 100_000 and lo <= exact <= hi
        details.append(f"d={d}: {row.visits} visits, p_hat={row.p_hat:.4f}, 4-sigma [{lo:.4f},{hi:.4f}] vs {exact:.4f}")
    record("6 Monte-Carlo anchoring at level 1", ok, "; ".join(details), t0, 120)


def test_criterion_7_conservativeness():
    t0 = time.perf_counter()
    family = [WalkSpec.build("model1", 2, a) for a in (["1/4", "1/4"], ["2/5", "1/10"], ["3/10", "1/5"])]
    cfg = SimConfig(steps=100_000, walks=4000, burn_in=10_000, n_max=5, seed=SEED)
    flagged, worst = [], 0.0
    for (i, a), (j, b) in itertools.combinations(enumerate(family), 2):
        rep = compare_families(a, b, cfg, alpha=0.01)
        flagged += [(i, j, lv.level) for lv in rep.levels if lv.significant]
        worst = max([worst] + [abs(lv.z) for lv in rep.levels if lv.z is not None])
        if rep.tested < cfg.n_max:
            flagged.append((i, j, "too few visits"))
    record("7 conservativeness, three alpha vectors, Bonferroni 0.01", not flagged,
           f"significant={flagged}, max |z|={worst:.2f}", t0, 300)


def _example_fit(d, c):
    chains = [CoordinateChainSpec(RatioFamily(c), False)] * d
    reps = level_up_probabilities(chains, list(range(25, 201, 25)))
    return fit_z_from_pn([(r.level, r.p) for r in reps]).z


def test_criterion_8a_example_one_z():
    t0 = time.perf_counter()
    z = _example_fit(2, 1)
    ok = abs(z - 2) <= 0.05 and z > 1
    record("8a Example 1 (d=2, c=1) fitted z = 2 +- 0.05, transient", ok, f"z = {z:.5f}", t0, 600)


def test_criterion_8b_example_two_z():
    t0 = time.perf_counter()
    z = _example_fit(3, -1)
    ok = abs(z - 1) <= 0.05 and z <= 1
    record("8b Example 2 (d=3, c=-1) fitted z = 1 +- 0.05, recurrent", ok,
           f"z = {z:.5f} (verdict {'recurrent' if z <= 1 else 'transient'})", t0, 600)


def test_criterion_8c_monte_carlo_growth_and_escape():
    t0 = time.perf_counter()
    horizon = 250_000
    ok, details = True, []
    for seed in (SEED, SEED + 1, SEED + 2):
        cfg = SimConfig(steps=4 * horizon, walks=16, n_max=1, seed=seed, radius=100,
                        checkpoints=(horizon, 2 * horizon, 4 * horizon))
        two = return_statistics([CoordinateChainSpec(RatioFamily(-1), False)] * 3, cfg)
        one = return_statistics([CoordinateChainSpec(RatioFamily(1), False)] * 2, cfg)
        m = two.mean_returns
        growing = m[0] < m[1] < m[2]
        ok &= growing and one.escape_fraction > 0
        details.append(f"seed {seed}: Ex2 mean returns {[round(x) for x in m]}, Ex1 escape {one.escape_fraction:.2f}")
    record("8c nested horizons T,2T,4T (T=2.5e5): Ex2 returns grow, Ex1 escapes R=100", ok, "; ".join(details), t0, 600)


def test_criterion_9_reflected_norm_distribution():
    t0 = time.perf_counter()
    spec = WalkSpec.build("model1", 2, ["2/5", "1/10"])
    a = simulate_walk(spec, SimConfig(steps=10, walks=100_000, burn_in=0, seed=SEED)).final_norms
    b = simulate_walk(spec, SimConfig(steps=10, walks=100_000, burn_in=0, seed=SEED + 1), reflected=True).final_norms
    tv = np.abs(np.bincount(a, minlength=11) - np.bincount(b, minlength=11)).sum() / 2 / 100_000
    record("9 reflected vs original norm at t=10, TV < 0.01", tv < 0.01, f"TV = {tv:.4f}", t0, 60)


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion")]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError:
            failed += 1
    print("\n".join(["", "acceptance summary:"] + RESULTS))
    sys.exit(1 if failed else 0)
