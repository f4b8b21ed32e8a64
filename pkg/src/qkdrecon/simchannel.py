"""Noisy channel, eavesdropper tap and Monte-Carlo trials."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .analysis import prob_bad_block
from .bitcore import BitString, SeededGenerator, Stream, generate_random_bits, hamming_distance
from .protocol import RoundRecord, SessionConfig, run_session


def transmit_bsc(bits: BitString, p: float, gen: SeededGenerator, burst: int = 1) -> BitString:
    """Flip bits with probability ``p`` each.

    With ``burst > 1`` errors arrive as runs: each run start is chosen with
    probability ``p / burst`` and flips ``burst`` consecutive bits, keeping
    the overall flip rate close to ``p`` for small ``p``.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    if burst < 1:
        raise ValueError("burst must be at least 1")
    n = len(bits)
    if burst == 1:
        flips = gen.uniform(n) < p
    else:
        starts = np.flatnonzero(gen.uniform(n) < p / burst)
        flips = np.zeros(n, dtype=bool)
        for k in range(burst):
            idx = starts + k
            flips[idx[idx < n]] = True
    return BitString._wrap(bits.bits ^ flips.astype(np.uint8))


@dataclass(frozen=True)
class EveTap:
    known_mask: BitString
    fraction: float

    @property
    def known(self) -> int:
        return self.known_mask.popcount()


def eve_tap(bits: BitString, p_e: float, gen: SeededGenerator) -> EveTap:
    """Mark each transmitted position as read by Eve with probability ``p_e``."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must lie in [0, 1]")
    mask = (gen.uniform(len(bits)) < p_e).astype(np.uint8)
    return EveTap(BitString._wrap(mask), p_e)


@dataclass
class TrialReport:
    seed: int
    status: str
    rounds: list[RoundRecord] = field(default_factory=list)
    initial_errors: int = 0
    final_n: int = 0
    key_len: int = 0
    residual_errors: int = 0
    delta: int = 0
    classical_bits: int = 0
    verifications: int = 0
    eve_known: int = 0

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_json_line(self) -> str:
        d = asdict(self)
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> TrialReport:
        d = json.loads(line)
        d["rounds"] = [RoundRecord(**r) for r in d["rounds"]]
        return cls(**d)


def run_trial(config: SessionConfig, seed: int, channel_p: float | None = None,
              eve_fraction: float = 0.0, burst: int = 1) -> TrialReport:
    """One end-to-end run: random source, noisy channel, reconciliation.

    The shared seed of *config* is replaced by *seed* so each trial draws
    fresh permutations. ``channel_p`` defaults to the prior ``config.p0``.
    """
    p = config.p0 if channel_p is None else channel_p
    cfg = replace(config, shared_seed=seed)
    alice = generate_random_bits(SeededGenerator(seed, Stream.SOURCE), config.n0)
    bob = transmit_bsc(alice, p, SeededGenerator(seed, Stream.CHANNEL), burst)
    tap = eve_tap(alice, eve_fraction, SeededGenerator(seed, Stream.EVE))
    initial = hamming_distance(alice, bob)
    out = run_session(alice, bob, cfg)
    residual = hamming_distance(out.alice_agreed, out.bob_agreed)
    if out.success and (residual != 0 or out.key != out.bob_key):
        raise AssertionError(f"seed {seed}: session reported success with {residual} residual errors")
    return TrialReport(
        seed=seed,
        status=out.status.value,
        rounds=out.rounds,
        initial_errors=initial,
        final_n=out.n_agreed,
        key_len=len(out.key),
        residual_errors=residual,
        delta=out.delta,
        classical_bits=out.classical_bits_total,
        verifications=len(out.verifications),
        eve_known=tap.known,
    )


@dataclass
class MonteCarloSummary:
    reports: list[TrialReport]

    @property
    def trials(self) -> int:
        return len(self.reports)

    @property
    def success_rate(self) -> float:
        return sum(r.success for r in self.reports) / len(self.reports)

    @property
    def mean_final_n(self) -> float:
        return float(np.mean([r.final_n for r in self.reports]))

    @property
    def std_final_n(self) -> float:
        if len(self.reports) < 2:
            return 0.0
        return float(np.std([r.final_n for r in self.reports], ddof=1))

    @property
    def mean_rounds(self) -> float:
        return float(np.mean([len(r.rounds) for r in self.reports]))

    @property
    def mean_key_len(self) -> float:
        return float(np.mean([r.key_len for r in self.reports]))


def monte_carlo(config: SessionConfig, trials: int, base_seed: int = 0, **trial_kwargs) -> MonteCarloSummary:
    """Run trials with seeds ``base_seed, base_seed + 1, ...``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return MonteCarloSummary([run_trial(config, base_seed + i, **trial_kwargs) for i in range(trials)])


def bad_block_zscore(record: RoundRecord) -> float:
    """How far a round's bad-block count sits from its binomial expectation.

    The expectation uses the true error rate entering the round, which the
    simulator knows even though the parties do not.
    """
    nblocks = record.bad_blocks + record.good_blocks
    p_true = record.errors_before / record.n_before
    p1 = float(prob_bad_block(p_true, record.b))
    sd = math.sqrt(nblocks * p1 * (1.0 - p1))
    mean = nblocks * p1
    if sd == 0.0:
        return 0.0 if record.bad_blocks == mean else math.inf
    return (record.bad_blocks - mean) / sd
