# coding: utf-8
# # Integral points on level sets
#
# Three families of homogeneous polynomials are supported: quadratic forms,
# the determinant on symmetric matrices and the Pfaffian on skew matrices.
# We enumerate integer solutions of f(x) = m inside the box |x_i| <= T.

# %%
import numpy as np

from symcount import PlaceSet, VarietySpec, integral_points, primitive_filter, s_points_by_level

sphere = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
for m in (1, 2, 3, 5, 6, 7):
    print(f"x^2+y^2+z^2 = {m}: {len(integral_points(sphere, m, 10))} points")

# %% [markdown]
# Seven is of the form 4^a(8b+7), so it has no representation at all.
# The pruned search agrees with a plain scan of the box:

# %%
a = integral_points(sphere, 5, 6)
b = integral_points(sphere, 5, 6, oracle=True)
print("pruned == full scan:", np.array_equal(a, b))

# %% [markdown]
# The hyperboloid x^2+y^2+z^2-w^2 = 1 is not compact, so the count keeps growing with T.

# %%
hyp = VarietySpec.diagonal(1, 1, 1, -1)
for T in (4, 8, 16):
    X = integral_points(hyp, 1, T)
    print(f"T={T:2d}: {len(X):5d} points, {len(primitive_filter(X)):5d} primitive")

# %% [markdown]
# Symmetric 3x3 matrices of determinant 1 with small entries.

# %%
det3 = VarietySpec.det_sym(3)
X = integral_points(det3, 1, 1)
print(len(X), "matrices; first:", X[0])

# %% [markdown]
# Primitive points grouped by level m in the semigroup generated by S.

# %%
for m, pts in s_points_by_level(sphere, PlaceSet((2, 3)), 4).items():
    print(f"m={m}: {len(pts)} primitive points")
