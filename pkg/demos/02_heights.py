# coding: utf-8
# # Heights of S-points
#
# For z with denominators in S the height is the euclidean norm times the
# p-adic max norms over the finite primes of S.  Scaling an integer vector
# by p^-k multiplies one factor by p^-k and the other by p^k.

# %%
from fractions import Fraction

import numpy as np

from symcount import HeightProfile, PlaceSet, height, height_squared, padic_norm

x = [3, 4, 12]
for k in range(4):
    z = [Fraction(v, 2**k) for v in x]
    print(f"k={k}: |z|_2 = 2^{padic_norm(z, 2)}, H(z)^2 = {height_squared(z, HeightProfile(PlaceSet((2,))))}")

# %% [markdown]
# The identity holds for random primitive vectors too.

# %%
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(100):
    x = [int(v) for v in rng.integers(-99, 100, 4)]
    if not any(v % 5 for v in x):
        continue
    z = [Fraction(v, 5**3) for v in x]
    exact = float(np.sqrt(sum(v * v for v in x)))
    worst = max(worst, abs(height(z, HeightProfile(PlaceSet((5,)))) - exact) / exact)
print("max relative error:", worst)
