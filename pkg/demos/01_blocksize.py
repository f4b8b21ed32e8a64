# %% [markdown]
# # Choosing a blocksize
#
# Each round Alice and Bob cut their strings into blocks of ``b`` bits and
# compare parities. Small blocks waste many bits on the discarded first bit,
# large blocks are more often bad and thrown away whole. The yield criterion
# weighs both against the entropy of the errors that slip through.

# %%
import numpy as np

from qkdrecon.analysis import crossover_point, optimal_blocksize, prob_bad_block, residual_error_prob, yield_criterion

# %% [markdown]
# Yield as a function of ``b`` at a 1% error rate. The peak sits close to
# ``1/sqrt(p)``.

# %%
p = 0.01
bs = np.arange(2, 31)
j = yield_criterion(p, bs)
for b, v in zip(bs[::4], j[::4]):
    print(f"b={b:3d}  J={v:.5f}")
print("best b:", optimal_blocksize(p), " 1/sqrt(p):", round(p ** -0.5, 2))

# %% [markdown]
# Optimal blocksizes across several decades of error rate.

# %%
for p in (0.5, 0.2, 0.1, 0.05, 0.01, 0.001, 0.0001):
    print(f"p={p:<7}  p^-1/2={p ** -0.5:7.2f}  b={optimal_blocksize(p)}")

# %% [markdown]
# The error rate at which each small blocksize takes over.

# %%
for b in range(2, 11):
    print(f"b={b:2d} optimal from p={crossover_point(b):.5f}")

# %% [markdown]
# What a single round does at ``p = 0.25`` with ``b = 2``: three blocks in
# eight are bad, and the survivors carry a 10% error rate.

# %%
print("P(bad block):", float(prob_bad_block(0.25, 2)))
print("residual p:  ", float(residual_error_prob(0.25, 2)))
