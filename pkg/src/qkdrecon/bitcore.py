"""Bit strings, seeded randomness, permutations and parity primitives.

Everything Alice and Bob compute in lock-step lives here. Bits are held
one per byte (``uint8`` 0/1) for cheap slicing and deletion; parity work
that touches every bit many times (subset hashing) packs them into 64-bit
words first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._kernels import shuffle_segments

DEFAULT_WINDOW = 1 << 16


class Stream(enum.IntEnum):
    """Stream labels keeping independent consumers of one seed apart."""

    PERMUTATION = 0
    HASH = 1
    CHANNEL = 2
    EVE = 3
    SOURCE = 4
    PRIVACY = 5


class SeededGenerator:
    """PCG64 generator keyed by ``(seed, stream)``.

    PCG64 carries 128 bits of state and its output is identical on every
    platform. The stream label goes into the ``SeedSequence`` spawn key, so
    two labels under one seed give unrelated sequences.
    """

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.rng = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"SeededGenerator(seed={self.seed}, stream={self.stream})"

    def words(self, count: int) -> np.ndarray:
        return self.rng.bit_generator.random_raw(count)

    def bits(self, n: int) -> np.ndarray:
        raw = self.words((n + 63) // 64).view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[:n]

    def uniform(self, n: int) -> np.ndarray:
        return self.rng.random(n)


class BitString:
    """Fixed-length bit sequence with value semantics."""

    __slots__ = ("_bits",)

    def __init__(self, bits=()):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> BitString:
        # trusted path: arr is already a fresh uint8 0/1 array
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj._bits = arr
        return obj

    @classmethod
    def from_str(cls, text: str) -> BitString:
        return cls([int(c) for c in text])

    @classmethod
    def zeros(cls, n: int) -> BitString:
        return cls._wrap(np.zeros(n, dtype=np.uint8))

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``uint8`` view of the bits."""
        return self._bits

    def __len__(self):
        return self._bits.shape[0]

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitString._wrap(self._bits[index].copy())
        n = len(self)
        if not -n <= index < n:
            raise IndexError(f"bit index {index} out of range for length {n}")
        return int(self._bits[index])

    def __iter__(self):
        return iter(self._bits.tolist())

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self):
        return hash((len(self), self.packed().tobytes()))

    def __xor__(self, other: BitString) -> BitString:
        _check_same_length(self, other)
        return BitString._wrap(self._bits ^ other._bits)

    def __repr__(self):
        if len(self) <= 64:
            return f"BitString('{self.to_str()}')"
        return f"BitString(<{len(self)} bits>)"

    def to_str(self) -> str:
        return "".join("1" if b else "0" for b in self._bits.tolist())

    def popcount(self) -> int:
        return int(np.count_nonzero(self._bits))

    def flip(self, positions) -> BitString:
        arr = self._bits.copy()
        arr[np.asarray(positions, dtype=np.int64)] ^= 1
        return BitString._wrap(arr)

    def packed(self) -> np.ndarray:
        """Little-endian 64-bit words; bit ``i`` is bit ``i % 64`` of word ``i // 64``."""
        n = len(self)
        buf = np.zeros(((n + 63) // 64) * 8, dtype=np.uint8)
        packed = np.packbits(self._bits, bitorder="little")
        buf[: packed.size] = packed
        return buf.view("<u8")


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``0..size-1``: element ``i`` moves to ``mapping[i]``."""

    mapping: np.ndarray

    def __post_init__(self):
        self.mapping.setflags(write=False)

    @property
    def size(self) -> int:
        return self.mapping.shape[0]

    def is_bijection(self) -> bool:
        return bool(np.array_equal(np.sort(self.mapping), np.arange(self.size)))

    def inverse(self) -> Permutation:
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.size, dtype=self.mapping.dtype)
        return Permutation(inv)

    def max_displacement(self) -> int:
        if self.size == 0:
            return 0
        return int(np.max(np.abs(self.mapping - np.arange(self.size))))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(n, dtype=np.int64))


def _check_same_length(a: BitString, b: BitString):
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")


def generate_random_bits(gen: SeededGenerator, n: int) -> BitString:
    if n < 0:
        raise ValueError("n must be non-negative")
    return BitString._wrap(gen.bits(n).copy())


def durstenfeld_permutation(gen: SeededGenerator, n: int) -> Permutation:
    """Uniform random permutation by the Durstenfeld shuffle.

    For ``i = n-1 .. 1`` swap position ``i`` with a uniform position in
    ``[0, i]``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    _check_size(n)
    return Permutation(shuffle_segments(gen, n, 0, max(n, 1)))


def cache_friendly_permutation(gen: SeededGenerator, n: int, window: int = DEFAULT_WINDOW) -> Permutation:
    """Random permutation that moves no element ``window`` or more places.

    Indices are cut into consecutive segments of at most ``window``
    elements and each segment gets its own Durstenfeld shuffle. The cut
    points start at a random offset drawn from *gen*, so successive calls
    place segment boundaries differently and bits still migrate across the
    whole string over several rounds. When ``window >= n`` this is exactly
    :func:`durstenfeld_permutation`.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    if n < 0:
        raise ValueError("n must be non-negative")
    if window >= n:
        return durstenfeld_permutation(gen, n)
    _check_size(n)
    offset = int(gen.rng.integers(0, window))
    return Permutation(shuffle_segments(gen, n, offset, window))


def _check_size(n: int):
    if n >= 1 << 32:
        raise ValueError("permutations are limited to fewer than 2**32 elements")


def apply_permutation(bits: BitString, perm: Permutation) -> BitString:
    if len(bits) != perm.size:
        raise ValueError(f"permutation size {perm.size} does not match {len(bits)} bits")
    out = np.empty(len(bits), dtype=np.uint8)
    out[perm.mapping] = bits.bits
    return BitString._wrap(out)


def block_parities(bits: BitString, b: int) -> np.ndarray:
    """Parity of each length-``b`` block; the final partial block is zero-padded."""
    if b < 2:
        raise ValueError("blocksize must be at least 2")
    n = len(bits)
    nblocks = -(-n // b)
    padded = np.zeros(nblocks * b, dtype=np.uint8)
    padded[:n] = bits.bits
    return np.bitwise_xor.reduce(padded.reshape(nblocks, b), axis=1)


def _word_parity(words: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(words) & 1).astype(np.uint8)


def subset_parity_hash(gen: SeededGenerator, bits: BitString, k: int, chunk: int = 2048) -> BitString:
    """``k``-bit hash: bit ``j`` is the parity of ``bits`` AND a random mask.

    Each mask is a fresh run of ``ceil(n/64)`` random words from *gen*, so
    every bit of the data joins each subset with probability 1/2. The hash is
    linear over GF(2).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    data = bits.packed()
    nwords = data.shape[0]
    out = np.empty(k, dtype=np.uint8)
    if nwords == 0:
        out[:] = 0
        return BitString._wrap(out)
    done = 0
    while done < k:
        c = min(chunk, k - done)
        masks = gen.words(c * nwords).reshape(c, nwords)
        np.bitwise_and(masks, data, out=masks)
        folded = np.bitwise_xor.reduce(masks, axis=1)
        out[done : done + c] = _word_parity(folded)
        done += c
    return BitString._wrap(out)


def hamming_distance(a: BitString, b: BitString) -> int:
    _check_same_length(a, b)
    return int(np.count_nonzero(a.bits != b.bits))
