import math

import numpy as np
import pytest

from symcount.varieties import VarietySpec
from symcount.volumes_arch import (VolumeEstimate, annulus_volume, doubling_regularity,
                                   fit_power_log, hyperboloid_volume, shell_integral,
                                   shell_volume, tail_integral, volume_grid)


def within(est, target, k=4.0):
    return abs(est.value - target) <= k * est.stderr


def test_sphere_volume_is_two_pi(sum3):
    est = shell_volume(sum3, 1, 2.0, samples=200_000, seed=1)
    assert est.stderr > 0 and within(est, 2 * math.pi)


def test_sphere_below_min_radius_is_zero(sum3):
    est = shell_volume(sum3, 1, 0.5, samples=10_000)
    assert est.value == 0 and est.stderr == 0


def test_scaled_level(sum3):
    # {x^2+y^2+z^2 = 4}: area 16 pi, |grad f| = 4
    est = shell_volume(sum3, 4, 3.0, samples=200_000, seed=2)
    assert within(est, 4 * math.pi)


def test_closed_form_hyperboloid_slices():
    # numerical integral of 2 pi sqrt(1 + w^2) over |w| <= W
    T = 10.0
    W = math.sqrt((T * T - 1) / 2)
    w = np.linspace(-W, W, 200_001)
    y = 2 * math.pi * np.sqrt(1 + w * w)
    numeric = float(np.sum((y[1:] + y[:-1]) / 2 * np.diff(w)))
    assert math.isclose(hyperboloid_volume(T), numeric, rel_tol=1e-9)
    assert hyperboloid_volume(0.5) == 0.0


@pytest.mark.parametrize("T", [4.0, 12.0])
def test_hyperboloid_against_closed_form(hyperboloid, T):
    est = shell_volume(hyperboloid, 1, T, samples=200_000, seed=3)
    assert within(est, hyperboloid_volume(T))


def test_box_estimator_agrees(hyperboloid):
    a = shell_volume(hyperboloid, 1, 4.0, samples=400_000, seed=5, estimator="box")
    assert within(a, hyperboloid_volume(4.0))


def test_estimators_agree_on_detsym():
    spec = VarietySpec.det_sym(3)
    a = shell_volume(spec, 1, 2.0, samples=200_000, seed=1)
    b = shell_volume(spec, 1, 2.0, samples=200_000, seed=2, estimator="box")
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)


def test_determinism_and_seed_dependence(hyperboloid):
    a = shell_volume(hyperboloid, 1, 6.0, samples=50_000, seed=9)
    b = shell_volume(hyperboloid, 1, 6.0, samples=50_000, seed=9)
    c = shell_volume(hyperboloid, 1, 6.0, samples=50_000, seed=10)
    assert a == b and a.value != c.value


def test_thread_count_does_not_change_results(hyperboloid, monkeypatch):
    a = shell_volume(hyperboloid, 1, 6.0, samples=100_000, seed=4)
    monkeypatch.setenv("SYMCOUNT_THREADS", "1")
    b = shell_volume(hyperboloid, 1, 6.0, samples=100_000, seed=4)
    assert a == b


def test_weighted_integrals(hyperboloid):
    whole = shell_volume(hyperboloid, 1, 8.0, samples=200_000, seed=6)
    assert tail_integral(hyperboloid, 1, 8.0, 0, samples=200_000, seed=6) == whole
    ring = annulus_volume(hyperboloid, 1, 4.0, 8.0, samples=200_000, seed=6)
    exact = hyperboloid_volume(8.0) - hyperboloid_volume(4.0)
    assert within(ring, exact)
    tail = tail_integral(hyperboloid, 1, 8.0, 4.0, samples=200_000, seed=6)
    assert 0 < tail.value < whole.value


def test_preconditions(sum3):
    with pytest.raises(ValueError):
        shell_volume(sum3, 1, 2.0, epsilon=0.5)
    with pytest.raises(ValueError):
        shell_volume(sum3, 0, 2.0)
    with pytest.raises(ValueError):
        shell_volume(sum3, 1, -1.0)
    with pytest.raises(ValueError):
        VolumeEstimate(1.0, 0.1, method="closed_form")


def test_volume_grid_is_monotone_in_expectation(hyperboloid):
    grid = volume_grid(hyperboloid, 1, [2.0, 4.0, 8.0], samples=50_000)
    assert grid[0].value < grid[1].value < grid[2].value


def test_fit_power_law_synthetic():
    Ts = [2.0, 4, 8, 16, 32, 64]
    fit = fit_power_log([(T, 5 * T**2) for T in Ts])
    assert (round(fit.a, 9), fit.b, round(fit.c, 9)) == (2, 0, 5) and fit.residual_rms < 1e-9
    fit = fit_power_log([(T, T * math.log(T)) for T in Ts])
    assert (round(fit.a, 9), fit.b, round(fit.c, 9)) == (1, 1, 1)
    assert np.allclose(fit.predict([10.0]), [10 * math.log(10)])
    assert set(fit.to_json()) == {"a", "b", "c", "residual_rms"}


def test_fit_preconditions():
    with pytest.raises(ValueError):
        fit_power_log([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_power_log([(T, 1.0) for T in (8, 4, 2, 16, 32, 64)])
    with pytest.raises(ValueError):
        fit_power_log([(T, 0.0) for T in (2, 4, 8, 16, 32, 64)])


def test_doubling_regularity_rows():
    rows = doubling_regularity([(10.0, 100.0)], [0.1], lambda T: T**2)
    assert rows == [(10.0, 0.1, pytest.approx(21 / 101))]


def test_compact_saturation(sum3):
    # the unit sphere has max norm 1: past that radius the volume stays 2 pi
    a = shell_volume(sum3, 1, 1 + 1e-6, samples=200_000, seed=0)
    b = shell_volume(sum3, 1, 5.0, samples=200_000, seed=0)
    assert within(a, 2 * math.pi) and within(b, 2 * math.pi)
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)


def test_custom_integrand_indicator(sum3):
    upper = shell_integral(sum3, 1, 2.0, lambda X: (X[:, 2] > 0).astype(float),
                           samples=200_000, seed=8)
    assert within(upper, math.pi)
