import math
from fractions import Fraction

import numpy as np
import pytest

from symcount.enumeration import PlaceSet, integral_points
from symcount.experiments import (Region, assign_regions, counting_experiment,
                                  denominator_experiment, equidist_experiment, fit_kappa,
                                  halfspace_pair, octant_partition, s_point_heights,
                                  stratified_volume, stratified_volume_by_height,
                                  well_rounded_check, _RealVolumes)
from symcount.varieties import VarietySpec
from symcount.volumes_arch import hyperboloid_volume
from symcount.volumes_padic import local_density

CATALAN = 0.915965594177219015054603514932


def test_region_membership():
    box = Region.box([0, 0], [1, 1])
    X = np.array([[0, 0], [0.5, 0.99], [1, 0.5], [-0.1, 0.2]])
    assert box.contains(X).tolist() == [True, True, False, False]
    cap = Region.spherical_cap([0, 0, 1], 0.5, 2.0)
    Y = np.array([[0, 0, 1], [1, 0, 0.1], [0, 0, 3], [0.5, 0, 1]])
    assert cap.contains(Y).tolist() == [True, False, False, True]
    half = Region.halfspace([1, 0], 0.5, 2.0)
    assert half.contains(np.array([[0.6, 0], [0.4, 0], [1.9, 1.9]])).tolist() == [True, False, False]
    with pytest.raises(ValueError):
        Region.box([0, 0], [0, 1])
    with pytest.raises(ValueError):
        Region.halfspace([1, 0], 3.0, 2.0)


def test_octants_partition_the_box():
    regions = octant_partition(3, 1.0)
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (5000, 3))
    X[:50, 0] = 0.0            # boundary points still get exactly one cell
    hits = np.stack([r.contains(X) for r in regions])
    assert np.all(hits.sum(axis=0) == 1)
    assert np.all(assign_regions(X, regions) >= 0)


def test_halfspace_pair_is_a_partition_of_the_ball():
    regions = halfspace_pair([1, 0, 0], 0.5, 2.0)
    X = np.array([[0.5, 0, 0], [0.49, 0, 0], [0.51, 1, 0], [3, 0, 0]])
    hits = np.stack([r.contains(X) for r in regions])
    assert hits.sum(axis=0).tolist() == [1, 1, 1, 0]


def test_counting_grid_precondition(hyperboloid):
    with pytest.raises(ValueError):
        counting_experiment(hyperboloid, PlaceSet(), [8, 16, 32])
    with pytest.raises(ValueError):
        counting_experiment(hyperboloid, PlaceSet(), [8, 16, 12, 32])


def test_counting_empty_case():
    spec = VarietySpec.diagonal(7, 7, 7, anisotropic_over_Q=True)
    rep = counting_experiment(spec, PlaceSet((7,)), [4, 8, 16, 32, 64])
    assert rep.counts == (0,) * 5 and rep.delta is None and rep.notes


def test_counts_are_monotone_and_match_direct_heights(hyperboloid):
    S = PlaceSet((2,))
    h2 = s_point_heights(hyperboloid, S, 9)
    # direct: z = x / D with f(x) = D^2, x primitive, ||x|| < 9
    direct = []
    for D in (1, 2, 4, 8, 16):
        X = integral_points(hyperboloid, D * D, 9)
        direct += [int((r * r).sum()) for r in X if math.gcd(*map(int, r)) == 1
                   and (r * r).sum() < 81]
    assert h2 == sorted(direct)
    rep = counting_experiment(hyperboloid, S, [3, 5, 7, 9], samples=20_000)
    assert all(a <= b for a, b in zip(rep.counts, rep.counts[1:]))


def test_stratified_volume_two_paths_agree(hyperboloid):
    real = _RealVolumes(hyperboloid, 20_000, 0, None)
    for primes in ((2,), (2, 3), (5,)):
        S = PlaceSet(primes)
        for T in (6.0, 20.0):
            a = stratified_volume(hyperboloid, S, T, real)[0]
            b = stratified_volume_by_height(hyperboloid, S, T, real)
            assert math.isclose(a, b, rel_tol=1e-12)


def test_ratio_tends_to_singular_series(hyperboloid):
    # with S = {inf} the limit of N(T) / vol(T) is the product of local densities;
    # the odd part equals 1 / L(2, chi_-4) = 1 / Catalan's constant
    delta2 = local_density(hyperboloid, 1, 2).limit
    assert delta2 == Fraction(3, 2)
    target = float(delta2) / CATALAN
    h2 = s_point_heights(hyperboloid, PlaceSet(), 96)
    for T in (80, 96):
        N = sum(1 for v in h2 if v < T * T)
        assert abs(N / hyperboloid_volume(T) / target - 1) < 0.02


def test_counting_with_finite_prime_settles(hyperboloid):
    rep = counting_experiment(hyperboloid, PlaceSet((2,)), [4, 8, 16, 32], samples=200_000)
    assert rep.spread is not None and rep.spread < 0.1


def test_equidist_single_cell(sum3):
    cell = [Region.box([-1.5] * 3, [1.5] * 3)]
    rep = equidist_experiment(sum3, PlaceSet((5,)), [5, 25], cell, samples=20_000)
    for row in rep.rows:
        assert row.empirical == (1.0,) and row.volume == (1.0,) and row.D == 0


def test_equidist_skips_empty_levels(sum3):
    rep = equidist_experiment(sum3, PlaceSet((2,)), [2, 8], octant_partition(3),
                              samples=20_000)
    assert [r.m for r in rep.rows] == [2]
    assert any("m=8" in note for note in rep.notes)
    with pytest.raises(ValueError):
        equidist_experiment(sum3, PlaceSet((2,)), [7], octant_partition(3), samples=20_000)
    with pytest.raises(ValueError):
        equidist_experiment(sum3, PlaceSet((2,)), [8, 32], octant_partition(3), samples=20_000)


def test_equidist_masses_are_probability_vectors(sum3):
    rep = equidist_experiment(sum3, PlaceSet((5,)), [5, 25, 125, 625], octant_partition(3),
                              samples=100_000)
    for row in rep.rows:
        assert abs(sum(row.empirical) - 1) < 1e-12 and abs(sum(row.volume) - 1) < 1e-12
        assert 0 <= row.D <= 1
    # octants are congruent: every volume mass is 1/8 up to MC error
    assert np.allclose(rep.rows[0].volume, 1 / 8, atol=0.01)
    first, last = rep.rows[0], rep.rows[-1]
    assert last.D < first.D


def test_denominator_experiment_trivial_and_empty_cases(sum3, hyperboloid):
    regions = halfspace_pair([1, 0, 0, 0], 0.5, 2.0)
    rep = denominator_experiment(hyperboloid, 2, [0], regions, samples=20_000)
    integral = integral_points(hyperboloid, 1, 2, radius=2.0)
    assert sum(rep.rows[0].counts) == len(integral)
    rep = denominator_experiment(sum3, 2, [1, 2, 3], octant_partition(3), samples=20_000)
    assert all(sum(r.counts) == 0 and r.sphere_volume == 0 for r in rep.rows)
    assert len(rep.notes) == 4


def test_denominator_ratios_approach_volume_ratio(hyperboloid):
    regions = halfspace_pair([1, 0, 0, 0], 0.5, 2.0)
    rep = denominator_experiment(hyperboloid, 2, range(1, 7), regions, samples=200_000)
    last = rep.rows[-1]
    count_ratio = last.counts[0] / last.counts[1]
    volume_ratio = last.volume[0] / last.volume[1]
    assert abs(count_ratio / volume_ratio - 1) < 0.25


def test_fit_kappa_exact():
    eps = [0.05, 0.1, 0.2]
    assert math.isclose(fit_kappa(eps, [3 * e**1.5 for e in eps]), 1.5)


def test_well_rounded_synthetic_and_compact(sum3):
    rep = well_rounded_check(None, [1.0, 2.0], [0.05, 0.1, 0.2],
                             family=lambda T, e: (T * T, e * T * T))
    assert abs(rep.kappa - 1) < 0.05
    rep = well_rounded_check(sum3, [2.0, 4.0], [0.05, 0.1, 0.2], samples=20_000)
    assert rep.exact and rep.summary()["kappa"] == "exact"
    with pytest.raises(ValueError):
        well_rounded_check(sum3, [2.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        well_rounded_check(sum3, [2.0], [0.1, 0.2, 0.5])


def test_well_rounded_hyperboloid(hyperboloid):
    rep = well_rounded_check(hyperboloid, [8.0, 16.0], [0.05, 0.1, 0.2], samples=100_000)
    assert 0.5 <= rep.kappa <= 1.5
