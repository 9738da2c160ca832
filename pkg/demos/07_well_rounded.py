# coding: utf-8
# # Boundary regularity of height balls
#
# The mass of the shell between heights T and (1 + eps) T, relative to the
# ball, should shrink like eps^kappa for some kappa > 0.

# %%
from symcount import VarietySpec, well_rounded_check

hyp = VarietySpec.diagonal(1, 1, 1, -1)
rep = well_rounded_check(hyp, [8.0, 16.0, 32.0], [0.05, 0.1, 0.2], samples=10**6, seed=0)
print(rep.summary())
for T, eps, ball, shell in rep.rows:
    print(f"T={T:4.0f} eps={eps:.2f}: shell/ball = {shell / ball:.4f}")

# %% [markdown]
# On the compact sphere the ball saturates and every shell is empty.

# %%
sphere = VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)
print(well_rounded_check(sphere, [2.0, 4.0], [0.05, 0.1, 0.2], samples=10**5).summary())
