# coding: utf-8
# # Real volumes of norm balls
#
# The invariant measure on f = m is the surface measure divided by |grad f|.
# shell_volume estimates its mass inside the ball of radius T by Monte Carlo.

# %%
import math

from symcount import VarietySpec, fit_power_log, hyperboloid_volume, shell_volume, volume_grid

sphere = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
est = shell_volume(sphere, 1, 2.0, samples=10**6, seed=0)
print(f"unit sphere: {est.value:.4f} +- {est.stderr:.4f}  (2 pi = {2 * math.pi:.4f})")

# %% [markdown]
# On the hyperboloid there is a closed form to compare with.

# %%
hyp = VarietySpec.diagonal(1, 1, 1, -1)
grid = [4, 8, 12, 16, 24, 32, 64]
est = volume_grid(hyp, 1, grid, samples=10**6, seed=0)
for T, e in zip(grid, est):
    print(f"T={T:3d}: {e.value:10.2f} +- {e.stderr:6.2f}   exact {hyperboloid_volume(T):10.2f}")

# %% [markdown]
# The growth is quadratic.

# %%
fit = fit_power_log([(T, e.value) for T, e in zip(grid, est)])
print(fit.to_json())
