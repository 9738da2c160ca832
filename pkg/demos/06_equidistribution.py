# coding: utf-8
# # Equidistribution of projected points
#
# Points of f = m are pushed to f = 1 by x -> m^(-1/d) x.  We compare the
# share of points in each octant with the share of volume.

# %%
from symcount import (PlaceSet, VarietySpec, denominator_experiment, equidist_experiment,
                      halfspace_pair, octant_partition)

sphere = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
rep = equidist_experiment(sphere, PlaceSet((5,)), [5, 25, 125, 625], octant_partition(3),
                          samples=10**6, seed=0)
for row in rep.rows:
    print(f"m={row.m:4d}: {row.point_count:5d} points, D = {row.D:.4f}")

# %% [markdown]
# Levels that are multiples of 8 carry no primitive sums of three squares,
# so with S = {2} only m = 2 has points.

# %%
rep = equidist_experiment(sphere, PlaceSet((2,)), [2, 8, 32, 128], octant_partition(3),
                          samples=10**5, seed=0)
print([r.m for r in rep.rows], rep.notes)

# %% [markdown]
# Points with denominator exactly 2^n on the hyperboloid, split by a halfspace.

# %%
hyp = VarietySpec.diagonal(1, 1, 1, -1)
rep = denominator_experiment(hyp, 2, range(0, 6), halfspace_pair([1, 0, 0, 0], 0.5, 2.0),
                             samples=10**6, seed=0)
for row in rep.rows:
    print(row.n, row.counts, [round(v, 3) for v in row.volume])
