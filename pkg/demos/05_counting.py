# coding: utf-8
# # Counting S-points by height
#
# N(T) counts points of f = 1 with coordinates in Z_S and height below T.
# The prediction is the volume of the height ball: a sum over p-adic strata
# of real volumes times p-adic sphere volumes.

# %%
from symcount import PlaceSet, VarietySpec, counting_experiment, multi_prime_ball_volume
from symcount import doubling_check

hyp = VarietySpec.diagonal(1, 1, 1, -1)
rep = counting_experiment(hyp, PlaceSet(), [8, 16, 32, 64], samples=10**6, seed=0)
for row in rep.rows():
    print(row)
print(rep.summary())

# %% [markdown]
# The ratio hovers around 1.64, the product of local densities, but lattice
# fluctuations of a few percent remain at this scale.
#
# Adding the prime 2 makes the count denser.

# %%
rep = counting_experiment(hyp, PlaceSet((2,)), [4, 8, 16, 32], samples=10**6, seed=0)
print(rep.summary())

# %% [markdown]
# The p-adic part of the ball volume at S = {2, 3} grows regularly under doubling.

# %%
series = [(2.0**i, float(multi_prime_ball_volume(hyp, (2, 3), 2.0**i))) for i in range(11)]
print(doubling_check(series))
