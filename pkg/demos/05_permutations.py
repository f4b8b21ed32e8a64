# %% [markdown]
# # Permutations
#
# Both parties shuffle their bits with the same seeded permutation before
# each round. A plain Durstenfeld shuffle touches memory at random; the
# cache-friendly variant keeps every move within a window.

# %%
import time

import numpy as np

from qkdrecon.bitcore import SeededGenerator, cache_friendly_permutation, durstenfeld_permutation

# %%
gen = SeededGenerator(0)
counts = {}
for _ in range(24_000):
    key = tuple(durstenfeld_permutation(gen, 4).mapping.tolist())
    counts[key] = counts.get(key, 0) + 1
print("distinct permutations of 4:", len(counts), " min/max count:", min(counts.values()), max(counts.values()))

# %%
n, window = 10**6, 1 << 16
for name, make in (("durstenfeld", lambda: durstenfeld_permutation(gen, n)),
                   ("cache-friendly", lambda: cache_friendly_permutation(gen, n, window))):
    make()
    t0 = time.perf_counter()
    perm = make()
    print(f"{name:15s} {1e3 * (time.perf_counter() - t0):6.1f} ms  max displacement {perm.max_displacement()}")
