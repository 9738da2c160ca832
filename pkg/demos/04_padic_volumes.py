# coding: utf-8
# # p-adic densities and sphere volumes
#
# Counts of solutions modulo p^k are computed exactly with a Hensel digit tree.
# The normalized counts settle once every residue class is smooth.

# %%
from fractions import Fraction

from symcount import (VarietySpec, count_solutions, local_density, padic_sphere_series,
                      structure_fit)

sphere = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
for p in (2, 3, 5, 7):
    rec = local_density(sphere, 1, p)
    print(f"p={p}: density {rec.density} reached at k={rec.k}, limit {rec.limit}")
print("m=7 at p=2:", local_density(sphere, 7, 2).density)

# %% [markdown]
# Two equal consecutive densities are not always the limit.  Here the
# densities read 1, 1/2, 1/2, 1/4, 1/4, ... for a long while.

# %%
for k in range(1, 14):
    print(k, Fraction(count_solutions(sphere, 4**5, 2, k), 2 ** (2 * k)))
print("exact limit:", local_density(sphere, 4**5, 2, k_max=14).limit)

# %% [markdown]
# Sphere volumes of the hyperboloid at p = 3 grow like 9^j after j = 0.

# %%
hyp = VarietySpec.diagonal(1, 1, 1, -1)
series = padic_sphere_series(hyp, 3, 8)
for j, v in series:
    print(j, v)
fit = structure_fit([(j, float(v)) for j, v in series], 3, max_period=hyp.degree)
print("period", fit.period, "exponents", [c.fit.a for c in fit.classes if c.fit])
