"""Compiled inner loops.

The swap loop of a Durstenfeld shuffle is inherently sequential, so it runs
under numba. Swap targets come from raw 64-bit generator words through
Lemire's multiply-and-reject reduction, which is exactly uniform.
"""

import numpy as np
from numba import njit

_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


@njit(cache=True)
def _mulhi(x, r):
    # high 64 bits of x * r for r < 2**32
    xh = x >> _SHIFT32
    xl = x & _MASK32
    return (xh * r + ((xl * r) >> _SHIFT32)) >> _SHIFT32


@njit(cache=True)
def segmented_shuffle(arr, words, offset, window):
    """Durstenfeld-shuffle each segment of ``arr`` in place.

    Segments are ``[0, offset)`` and then runs of ``window`` starting at
    ``offset``; ``window >= len(arr)`` with ``offset == 0`` is one segment.
    Returns the number of words consumed, or -1 if ``words`` ran out.
    """
    n = arr.shape[0]
    used = 0
    nwords = words.shape[0]
    for i in range(n - 1, 0, -1):
        if i < offset:
            start = 0
        else:
            start = offset + ((i - offset) // window) * window
        r = np.uint64(i - start + 1)
        if r == 1:
            continue
        while True:
            if used >= nwords:
                return -1
            x = words[used]
            used += 1
            lo = x * r
            if lo >= r:
                break
            # (2**64 - r) % r, computed without overflow
            threshold = (np.uint64(0) - r) % r
            if lo >= threshold:
                break
        j = start + np.int64(_mulhi(x, r))
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp
    return used


def shuffle_segments(gen, n: int, offset: int, window: int) -> np.ndarray:
    """Shuffled ``arange(n)``, drawing words from *gen* as needed."""
    extra = 64
    words = gen.words(n + extra)
    while True:
        arr = np.arange(n, dtype=np.int64)
        if segmented_shuffle(arr, words, offset, window) >= 0:
            return arr
        extra *= 2
        words = np.concatenate([words, gen.words(extra)])
