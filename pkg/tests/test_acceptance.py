"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line through ``conftest.record``; the
lines are collected in the "acceptance criteria" section of the pytest summary.
Tolerances are the stated ones and are not relaxed when a check fails.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np

from conftest import leibniz_det, record
from symcount.cli import run
from symcount.enumeration import PlaceSet, integral_points
from symcount.experiments import (counting_experiment, equidist_experiment, octant_partition,
                                  well_rounded_check)
from symcount.heights import HeightProfile, height
from symcount.varieties import VarietySpec, ternary_isotropic
from symcount.volumes_arch import fit_power_log, shell_volume, volume_grid
from symcount.volumes_padic import (count_solutions, doubling_check, local_density,
                                    multi_prime_ball_volume, padic_sphere_series, structure_fit)

SUM3 = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
HYP = VarietySpec.diagonal(1, 1, 1, -1)


def _random_quadric(rng, n):
    while True:
        M = rng.integers(-3, 4, (n, n))
        Q = np.triu(M) + np.triu(M, 1).T
        if leibniz_det(Q.tolist()) == 0:
            continue
        if n == 3 and ternary_isotropic(Q.tolist()):
            continue
        return VarietySpec.quadric(Q.tolist(), anisotropic_over_Q=(n == 3))


def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    cases = mismatches = points = 0
    while cases < 500:
        n = 3 if cases % 2 == 0 else 4
        spec = _random_quadric(rng, n)
        # four-variable full scans cost (2T+1)^4, so large T is drawn less often
        T = int(rng.integers(1, 26)) if n == 3 or rng.random() < 0.1 else int(rng.integers(1, 9))
        m = int(rng.choice([v for v in range(-30, 31) if v]))
        a = integral_points(spec, m, T)
        b = integral_points(spec, m, T, oracle=True)
        same = a.shape == b.shape and np.array_equal(a, b)
        mismatches += not same
        points += len(a)
        cases += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 120
    record(1, ok, f"{cases} cases, {mismatches} mismatches, {points} points, {elapsed:.1f}s")
    assert ok


def test_criterion_02_small_counts():
    expected = {1: 6, 2: 12, 3: 8, 5: 24, 6: 24, 7: 0}
    r = np.arange(-10, 11)
    X, Y, Z = np.meshgrid(r, r, r, indexing="ij")
    F = X * X + Y * Y + Z * Z
    got, brute = {}, {}
    for m in expected:
        got[m] = len(integral_points(SUM3, m, 10))
        brute[m] = int(np.count_nonzero(F == m))
    ok = got == brute == expected
    record(2, ok, f"counts {got}, brute force {brute}")
    assert ok


def test_criterion_03_sphere_volume():
    start = time.perf_counter()
    est = shell_volume(SUM3, 1, 2.0, samples=10**6, seed=0)
    elapsed = time.perf_counter() - start
    dev = abs(est.value - 2 * math.pi)
    ok = dev <= 3 * est.stderr and elapsed < 30
    record(3, ok, f"{est.value:.5f} +- {est.stderr:.5f} vs 2pi (|dev| = "
                  f"{dev / est.stderr:.2f} sigma), {elapsed:.1f}s")
    assert ok


def test_criterion_04_archimedean_exponent():
    start = time.perf_counter()
    grid = [4, 6, 8, 12, 16, 24, 32, 48, 64]
    est = volume_grid(HYP, 1, grid, samples=10**6, seed=0)
    fit = fit_power_log([(T, e.value) for T, e in zip(grid, est)])
    elapsed = time.perf_counter() - start
    ok = 1.7 <= fit.a <= 2.3 and elapsed < 300
    record(4, ok, f"a = {fit.a:.4f}, b = {fit.b}, c = {fit.c:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_05_padic_stabilization():
    details, ok = [], True
    for p in (3, 5, 7):
        rec = local_density(SUM3, 1, p)
        k = rec.k
        again = Fraction(count_solutions(SUM3, 1, p, k + 1), p ** (2 * (k + 1)))
        same = again == rec.density and local_density(SUM3, 1, p, k_max=k + 2).density \
            == rec.density
        ok &= rec.stabilized and k <= 2 and same
        details.append(f"p={p}: k={k} density={rec.density}")
    zero = local_density(SUM3, 7, 2)
    ok &= zero.density == 0
    details.append(f"m=7 p=2: density={zero.density}")
    record(5, ok, "; ".join(details))
    assert ok


def test_criterion_06_structure_fit():
    start = time.perf_counter()
    series = [(j, float(v)) for j, v in padic_sphere_series(HYP, 3, 8)]
    fit = structure_fit(series, 3, max_period=HYP.degree)
    elapsed = time.perf_counter() - start
    exps = [c.fit.a for c in fit.classes if c.fit]
    ok = fit.residual_rms < 0.05 and max(exps) > 0 and elapsed < 300
    record(6, ok, f"period {fit.period}, rms {fit.residual_rms:.2e}, exponents "
                  f"{[round(a, 4) for a in exps]}, {elapsed:.1f}s")
    assert ok


def test_criterion_07_doubling():
    grid = [2.0**i for i in range(11)]
    series = [(T, float(multi_prime_ball_volume(HYP, (2, 3), T))) for T in grid]
    rep = doubling_check(series)
    ok = math.isfinite(rep.max_ratio) and not rep.growing
    last = [round(r, 3) for _, r in rep.ratios[-3:]]
    record(7, ok, f"max w(2T)/w(T) = {rep.max_ratio:.3f}, last ratios {last}, "
                  f"growing={rep.growing}")
    assert ok


def test_criterion_08_counting_ratio():
    rep = counting_experiment(HYP, PlaceSet(), [8, 16, 32, 64], samples=10**6, seed=0)
    spread_ok = rep.spread is not None and rep.spread < 0.10
    delta_ok = rep.delta is not None and rep.delta > 0
    ok = spread_ok and delta_ok
    ratios = ", ".join(f"{r:.4f}" for r in rep.ratios)
    record(8, ok, f"ratios [{ratios}], spread {rep.spread:.4f}, delta {rep.delta:.3f}")
    assert ok


def test_criterion_09_equidistribution():
    start = time.perf_counter()
    rep = equidist_experiment(SUM3, PlaceSet((2,)), [2, 8, 32, 128], octant_partition(3),
                              samples=10**6, seed=0)
    elapsed = time.perf_counter() - start
    first, last = rep.rows[0], rep.rows[-1]
    ok = (len(rep.rows) >= 2 and last.D < first.D and first.eligible and last.eligible
          and elapsed < 600)
    levels = ", ".join(f"m={r.m}: {r.point_count} pts D={r.D:.4f}" for r in rep.rows)
    record(9, ok, f"attainable levels [{levels}]; {len(rep.notes)} empty levels, "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_10_height_identity():
    rng = np.random.default_rng(10)
    worst, done = 0.0, 0
    while done < 200:
        p = int(rng.choice([2, 3, 5, 7, 11]))
        k = int(rng.integers(0, 8))
        x = [int(v) for v in rng.integers(-1000, 1001, int(rng.integers(3, 7)))]
        if math.gcd(*x) != 1 or all(v % p == 0 for v in x):
            continue
        z = [Fraction(v, p**k) for v in x]
        target = math.sqrt(sum(v * v for v in x))
        worst = max(worst, abs(height(z, HeightProfile(PlaceSet((p,)))) - target) / target)
        done += 1
    ok = worst < 1e-12
    record(10, ok, f"{done} vectors, max relative error {worst:.2e}")
    assert ok


def test_criterion_11_well_rounded():
    rep = well_rounded_check(HYP, [8.0, 16.0, 32.0], [0.05, 0.1, 0.2], samples=10**6, seed=0)
    ok = rep.kappa > 0.3
    per_T = ", ".join(f"T={T:g}: {k:.3f}" for T, k in rep.per_T)
    record(11, ok, f"kappa = {rep.kappa:.3f} ({per_T})")
    assert ok


def test_criterion_12_cli_determinism(capsys):
    invocations = [
        ["count", "--form", "1,1,1,-1", "--grid", "8,16,32,64", "--seed", "7"],
        ["volume-arch", "--form", "1,1,1,-1", "--grid", "4,8,16", "--seed", "3",
         "--samples", "200000", "--format", "json"],
        ["equidist", "--form", "1,1,1", "--S", "5", "--levels", "5,25,125", "--seed", "1",
         "--samples", "100000"],
        ["denom", "--form", "1,1,1,-1", "--prime", "2", "--n", "0..3", "--seed", "2",
         "--samples", "100000"],
        ["wellround", "--form", "1,1,1,-1", "--grid", "8,16", "--seed", "5",
         "--samples", "100000"],
        ["enumerate", "--form", "1,1,1", "--level", "5", "--bound", "3", "--format", "jsonl"],
        ["volume-padic", "--form", "1,1,1,-1", "--prime", "3", "--sphere", "6"],
    ]
    identical = 0
    for argv in invocations:
        outs = []
        for _ in range(2):
            code = run(argv)
            outs.append((code, capsys.readouterr().out))
        identical += outs[0] == outs[1] and outs[0][0] == 0 and bool(outs[0][1])
    ok = identical == len(invocations)
    record(12, ok, f"{identical}/{len(invocations)} invocations byte-identical on rerun")
    assert ok
