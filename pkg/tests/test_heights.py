import math
from fractions import Fraction

import numpy as np
import pytest

from symcount.enumeration import PlaceSet, SPoint
from symcount.heights import (HeightProfile, euclidean_norm_squared, height, height_below,
                              height_squared, integral_heights_squared, padic_norm)


def test_padic_norm_exponents():
    assert padic_norm([Fraction(1, 2), 0, 1], 2) == 1
    assert padic_norm([Fraction(3, 4), Fraction(1, 2)], 2) == 2
    assert padic_norm(SPoint((1, 2, 0), 2), 2) == 1
    assert padic_norm([4, 2, 6], 2) == -1
    with pytest.raises(ValueError):
        padic_norm([0, 0], 3)


def test_height_example():
    prof = HeightProfile(PlaceSet((2,)))
    z = [1, Fraction(1, 2), 0, Fraction(1, 2)]
    # ||z|| = sqrt(3/2), ||z||_2 = 2
    assert height_squared(z, prof) == 6
    assert math.isclose(height(z, prof), math.sqrt(6), rel_tol=1e-15)


def test_height_without_finite_places_is_euclidean():
    assert height_squared([3, 4]) == 25


def test_height_below_is_exact():
    prof = HeightProfile(PlaceSet((3,)))
    z = [Fraction(1, 3), Fraction(2, 3), Fraction(2, 3)]  # ||z|| = 1, ||z||_3 = 3
    assert height_squared(z, prof) == 9
    assert not height_below(z, 3, prof, strict=True)
    assert height_below(z, 3, prof, strict=False)


def test_gram_profile():
    prof = HeightProfile(euclidean_gram=((2, 0), (0, 1)))
    assert euclidean_norm_squared([1, 1], prof.euclidean_gram) == 3
    with pytest.raises(ValueError):
        HeightProfile(euclidean_gram=((1, 2), (2, 1)))
    with pytest.raises(ValueError):
        HeightProfile(euclidean_gram=((1, 1), (0, 1)))


def test_integral_heights_squared_matches_fractions():
    X = np.array([[1, 2, 2], [3, 0, 4]])
    assert list(integral_heights_squared(X)) == [9, 25]
    G = ((2, 1, 0), (1, 2, 0), (0, 0, 1))
    got = integral_heights_squared(X, G)
    assert [int(v) for v in got] == [euclidean_norm_squared(r, G) for r in X.tolist()]


def test_scaling_identity():
    # primitive x scaled by p^-k: H_{inf,p}(x / p^k) = ||x||
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = int(rng.choice([2, 3, 5, 7]))
        k = int(rng.integers(0, 6))
        x = rng.integers(-50, 51, 4)
        if not np.any(x % p):
            continue
        z = [Fraction(int(v), p**k) for v in x]
        assert height_squared(z, HeightProfile(PlaceSet((p,)))) == int((x * x).sum())
