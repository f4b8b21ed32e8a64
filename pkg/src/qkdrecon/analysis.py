"""Closed-form block statistics, blocksize rules and Eve-knowledge updates.

With ``p`` the per-bit error probability and ``b`` the blocksize, the
number of errors in a block has generating function ``(q + p x)**b``. All
block probabilities follow from evaluating it at ``x = 0, 1, -1``.

Functions accept scalars or numpy arrays and broadcast like ufuncs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SQRT8 = math.sqrt(8.0)


@dataclass(frozen=True)
class ChannelParams:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"error probability must lie in [0, 1/2], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class EveParams:
    """Fraction ``p_e`` of the retained bits Eve is assumed to know.

    ``has_relations`` is False while Eve can only know individual bits and
    becomes True once a round with blocksize above two has exposed parity
    relations among retained bits. It never reverts.
    """

    p_e: float
    has_relations: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_e <= 1.0:
            raise ValueError(f"p_e must lie in [0, 1], got {self.p_e}")

    @property
    def q_e(self) -> float:
        return 1.0 - self.p_e

    def after_round(self, b: int) -> EveParams:
        """Eve's knowledge after a round with blocksize ``b``."""
        if self.has_relations:
            p_e = float(eve_update_case2(self.p_e, b))
        else:
            p_e = float(eve_update_case1(self.p_e, b))
        return EveParams(p_e, self.has_relations or b > 2)


class BlocksizeMode(enum.Enum):
    YIELD = "yield"
    EVE = "eve"


@dataclass(frozen=True)
class BlocksizePolicy:
    """How each round picks its blocksize.

    ``YIELD`` maximises :func:`yield_criterion`; ``EVE`` uses
    :func:`choose_blocksize_eve`. With ``sqrt_cap`` the blocksize is limited
    to ``floor(sqrt(n))`` as the running protocol requires; otherwise the
    only upper limit is ``n``.
    """

    mode: BlocksizeMode = BlocksizeMode.YIELD
    sqrt_cap: bool = True

    def b_max(self, n: float) -> int:
        n_int = int(n)
        cap = math.isqrt(n_int) if self.sqrt_cap else n_int
        return max(2, cap)

    def choose(self, p: float, n: float, eve: EveParams | None = None) -> int:
        cap = self.b_max(n)
        if self.mode is BlocksizeMode.EVE:
            if eve is None:
                eve = EveParams(0.0)
            b = choose_blocksize_eve(p, eve, b_max=cap)
        else:
            b = optimal_blocksize(p, cap)
        return int(min(max(b, 2), cap))


def _one_minus_2p_pow(p, b):
    # (1-2p)**b via exp(b*log1p(-2p)); exact 0 at p = 1/2
    p = np.asarray(p, dtype=float)
    b = np.asarray(b, dtype=float)
    base = 1.0 - 2.0 * p
    with np.errstate(divide="ignore"):
        out = np.exp(b * np.log1p(-2.0 * p))
    return np.where(base <= 0.0, np.where(b == 0, 1.0, 0.0), out)


def prob_no_error(p, b):
    """Probability that a block of ``b`` bits carries no error."""
    return np.power(1.0 - np.asarray(p, dtype=float), b)


def prob_bad_block(p, b):
    """Probability of an odd error count, which flips the block parity."""
    return (1.0 - _one_minus_2p_pow(p, b)) / 2.0


def prob_undetected(p, b):
    """Probability of a nonzero even error count, invisible to parity."""
    return (1.0 - 2.0 * prob_no_error(p, b) + _one_minus_2p_pow(p, b)) / 2.0


def expected_errors_good_block(p, b):
    """Expected error count in a block whose parities agree (before discards)."""
    b_arr = np.asarray(b, dtype=float)
    num = 1.0 - _one_minus_2p_pow(p, b_arr - 1.0)
    den = 1.0 + _one_minus_2p_pow(p, b_arr)
    return b_arr * np.asarray(p, dtype=float) * num / den


def residual_error_prob(p, b):
    """Per-bit error probability left in good blocks after a round."""
    return expected_errors_good_block(p, b) / np.asarray(b, dtype=float)


def reestimate_p(block_error_rate, b):
    """Invert :func:`prob_bad_block` for an observed fraction of bad blocks."""
    e = np.asarray(block_error_rate, dtype=float)
    b = np.asarray(b, dtype=float)
    inner = np.clip(1.0 - 2.0 * e, 0.0, 1.0)
    mid = (1.0 - np.power(inner, 1.0 / b)) / 2.0
    out = np.where(e <= 0.0, 0.0, np.where(e < 0.5, mid, 0.5))
    return out[()] if out.ndim == 0 else out


def shannon_entropy(p):
    """Binary entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h[()] if h.ndim == 0 else h


def yield_criterion(p, b):
    """Useful information per original bit kept after one round.

    Bad blocks are dropped, one bit of every good block is dropped, and the
    survivors are discounted by the entropy of their residual error rate.
    """
    b_arr = np.asarray(b, dtype=float)
    p1 = prob_bad_block(p, b_arr)
    pt = residual_error_prob(p, b_arr)
    return (1.0 - p1) * (1.0 - 1.0 / b_arr) * (1.0 - shannon_entropy(pt))


def _scan_limit(p: float, b_max: int) -> int:
    if p <= 0.0:
        return b_max
    return min(b_max, max(1000, math.ceil(3.0 / math.sqrt(p))))


def optimal_blocksize(p: float, b_max: int = 10**9) -> int:
    """Blocksize in ``[2, b_max]`` maximising :func:`yield_criterion`.

    The scan is exhaustive over ``2 .. max(1000, 3/sqrt(p))`` (clipped to
    ``b_max``). Ties go to the smaller blocksize.
    """
    if b_max < 2:
        raise ValueError("b_max must be at least 2")
    hi = _scan_limit(p, b_max)
    bs = np.arange(2, hi + 1)
    j = yield_criterion(p, bs)
    return int(bs[int(np.argmax(j))])


def crossover_point(b: int, tol: float = 1e-7) -> float:
    """Smallest error probability at which ``b`` is the optimal blocksize.

    Bisects on the predicate ``optimal_blocksize(p) <= b`` (the optimum is
    non-increasing in ``p``) and rounds to 5 decimals.
    """
    if b < 2:
        raise ValueError("b must be at least 2")
    lo, hi = 1e-12, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if optimal_blocksize(mid) <= b:
            hi = mid
        else:
            lo = mid
    return round(hi, 5)


def expected_rounds(p: float, n_final: float, delta: float) -> float:
    """Rough round count until the chance of any remaining error is below ``delta``."""
    if not 0.0 < p < 0.5:
        raise ValueError("expected_rounds needs 0 < p < 1/2 (diverges at p = 1/2)")
    if n_final < 1 or not 0.0 < delta <= 1.0:
        raise ValueError("need n_final >= 1 and 0 < delta <= 1")
    return math.log2(2.0 / (1.0 - 2.0 * p)) + math.log(math.log2(n_final / delta), 1.5)


def eve_update_case1(p_e, b):
    """Eve's known fraction after a round when she knows only single bits.

    She learns a new relation only from blocks where she already holds the
    first (discarded) bit but not every bit.
    """
    p_e = np.asarray(p_e, dtype=float)
    b = np.asarray(b, dtype=float)
    return p_e + (p_e - np.power(p_e, b)) / (b - 1.0)


def eve_update_case2(p_e, b):
    """Eve's known fraction once relations exist: one bit per block."""
    return np.minimum(1.0, np.asarray(p_e, dtype=float) + 1.0 / np.asarray(b, dtype=float))


def choose_blocksize_eve(p: float, eve: EveParams, b_max: int | None = None) -> int:
    """Blocksize between ``1/q_e`` and ``1/p``, at their geometric mean.

    Stays at two while Eve holds no relations and ``4p > q_e``, so that the
    cheaper single-bit update keeps applying. Where the formula diverges
    (``p = 0`` or ``q_e = 0``) the caller's ``b_max`` is returned.
    """
    q_e = eve.q_e
    if not eve.has_relations and 4.0 * p > q_e:
        return 2
    if p <= 0.0 or q_e <= 0.0:
        if b_max is None:
            raise ValueError("blocksize diverges; supply b_max")
        return int(b_max)
    b = int(math.floor(max(2.0, 1.0 / math.sqrt(p * q_e))))
    return b if b_max is None else min(b, int(b_max))


def estimate_pe_from_error_rate(p: float) -> float:
    """Upper bound on Eve's known fraction from the observed error rate."""
    return min(1.0, p * SQRT8)
