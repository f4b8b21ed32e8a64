"""Two-party parity-discard reconciliation.

Alice and Bob each run a :class:`Party`. The parties hold the same shared
seed and take the same decisions. The only data that differs between them is
their own bits and the parity and hash vectors computed from those bits.
:func:`run_session` carries messages between them as encoded bytes. It can
also read both parties' bits, so it records true error counts next to each
round for testing. The parties never see those counts.

One round: permute, pick a blocksize, exchange block parities, drop every
bad block, drop the first bit of every good block, re-estimate the error
rate. Once fewer than one error is expected, a random-subset hash confirms
agreement. After that the agreed string is compressed by the number of bits
Eve may know.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import (
    BlocksizeMode,
    BlocksizePolicy,
    EveParams,
    estimate_pe_from_error_rate,
    reestimate_p,
    residual_error_prob,
)
from .bitcore import (
    DEFAULT_WINDOW,
    BitString,
    SeededGenerator,
    Stream,
    apply_permutation,
    block_parities,
    cache_friendly_permutation,
    durstenfeld_permutation,
    hamming_distance,
    subset_parity_hash,
)
from .messages import HashMsg, ParityMsg, decode

log = logging.getLogger(__name__)


class SessionStatus(str, enum.Enum):
    SUCCESS = "success"
    FAILED_TOO_SMALL = "failed-too-small"
    ABORTED = "aborted"


class ProtocolDesync(RuntimeError):
    """The parties disagree on something they should compute identically."""


class KeyTooShort(RuntimeError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    """Parameters both parties agree on before the session starts.

    ``pe0`` is Eve's initial known fraction; ``None`` derives it from
    ``p0`` with :func:`~qkdrecon.analysis.estimate_pe_from_error_rate`.
    ``eve_accounting`` is ``"tracked"`` (update the fraction every round) or
    ``"monotone"`` (Eve's known bit count stays at its initial value).
    ``safety_sigmas`` adds that many binomial standard deviations to the
    information estimate and is off by default.
    """

    n0: int = 10**6
    p0: float = 0.25
    shared_seed: int = 0
    min_n: int = 64
    hash_bits: int = 64
    verify_trigger: float = 10.0
    pe0: float | None = 0.0
    min_final: int = 128
    blocksize_mode: BlocksizeMode = BlocksizeMode.YIELD
    cache_friendly: bool = False
    window: int = DEFAULT_WINDOW
    eve_accounting: str = "tracked"
    safety_sigmas: float = 0.0
    max_rounds: int = 200

    def __post_init__(self):
        if self.min_n < 4:
            raise ValueError("min_n must be at least 4")
        if self.hash_bits < 1:
            raise ValueError("hash_bits must be at least 1")
        if not 0.0 <= self.p0 <= 0.5:
            raise ValueError("p0 must lie in [0, 1/2]")
        if self.pe0 is not None and not 0.0 <= self.pe0 < 1.0:
            raise ValueError("pe0 must lie in [0, 1)")
        if self.eve_accounting not in ("tracked", "monotone"):
            raise ValueError("eve_accounting must be 'tracked' or 'monotone'")
        if self.window < 2:
            raise ValueError("window must be at least 2")

    @property
    def initial_pe(self) -> float:
        return estimate_pe_from_error_rate(self.p0) if self.pe0 is None else self.pe0

    @property
    def policy(self) -> BlocksizePolicy:
        return BlocksizePolicy(self.blocksize_mode, sqrt_cap=True)


@dataclass
class EveLedger:
    p_e: float
    has_relations: bool = False
    hash_bits_seen: int = 0
    accounting: str = "tracked"
    known_bits: float = 0.0

    @classmethod
    def start(cls, config: SessionConfig, n: int) -> EveLedger:
        pe = config.initial_pe
        return cls(p_e=pe, accounting=config.eve_accounting, known_bits=pe * n)

    @property
    def eve(self) -> EveParams:
        return EveParams(self.p_e, self.has_relations)

    def after_round(self, b: int, n_after: int):
        if self.accounting == "monotone":
            self.p_e = 1.0 if n_after <= 0 else min(1.0, max(self.p_e, self.known_bits / n_after))
            self.has_relations = self.has_relations or b > 2
        else:
            nxt = self.eve.after_round(b)
            self.p_e, self.has_relations = nxt.p_e, nxt.has_relations


@dataclass(frozen=True)
class RoundRecord:
    index: int
    b: int
    n_before: int
    n_after: int
    bad_blocks: int
    good_blocks: int
    padding: int
    padding_removed: int
    bits_discarded: int
    parity_bits_disclosed: int
    hash_bits_disclosed: int
    p_before: float
    p_estimate: float
    p_after: float
    pe_before: float
    pe_after: float
    has_relations: bool
    errors_before: int | None = None
    errors_after: int | None = None

    def protocol_view(self) -> RoundRecord:
        """The record without the simulator's true error counts."""
        return replace(self, errors_before=None, errors_after=None)


@dataclass(frozen=True)
class VerificationRecord:
    k: int
    passed: bool
    attached: bool
    true_errors: int | None = None


@dataclass
class SessionOutcome:
    status: SessionStatus
    key: BitString
    bob_key: BitString
    rounds: list[RoundRecord] = field(default_factory=list)
    verifications: list[VerificationRecord] = field(default_factory=list)
    delta: int = 0
    n_agreed: int = 0
    classical_bits_total: int = 0
    p_e: float = 0.0
    alice_agreed: BitString | None = None
    bob_agreed: BitString | None = None
    reason: str = ""

    @property
    def success(self) -> bool:
        return self.status is SessionStatus.SUCCESS


class Party:
    """One side of the protocol, holding its own bits and shared-seed generators."""

    def __init__(self, name: str, bits: BitString, config: SessionConfig):
        self.name = name
        self.bits = bits
        self.config = config
        self.p = float(config.p0)
        self.ledger = EveLedger.start(config, len(bits))
        seed = config.shared_seed
        self._perm_gen = SeededGenerator(seed, Stream.PERMUTATION)
        self._hash_gen = SeededGenerator(seed, Stream.HASH)
        self._pa_gen = SeededGenerator(seed, Stream.PRIVACY)
        self.round_index = 0
        self._pending = None

    @property
    def n(self) -> int:
        return len(self.bits)

    def wants_verification(self) -> bool:
        return self.n == 0 or self.p < 1.0 / self.n

    def _permute(self):
        cfg = self.config
        if cfg.cache_friendly:
            perm = cache_friendly_permutation(self._perm_gen, self.n, cfg.window)
        else:
            perm = durstenfeld_permutation(self._perm_gen, self.n)
        self.bits = apply_permutation(self.bits, perm)

    def start_round(self, b: int | None = None) -> tuple[ParityMsg, HashMsg | None]:
        """Permute, choose the blocksize and publish block parities.

        A ``k``-bit hash rides along with the parities once the expected
        error count drops below ``verify_trigger``.
        """
        self._permute()
        n = self.n
        if b is None:
            b = self.config.policy.choose(self.p, n, self.ledger.eve)
        if not 2 <= b <= max(2, math.isqrt(n)):
            raise ValueError(f"blocksize {b} outside [2, sqrt({n})]")
        parities = BitString(block_parities(self.bits, b))
        hmsg = None
        if self.p < self.config.verify_trigger / n:
            hmsg = self.verification_hash()
        self._pending = (b, parities, hmsg)
        return ParityMsg(self.round_index, parities), hmsg

    def finish_round(self, peer: ParityMsg, peer_hash: HashMsg | None = None) -> tuple[RoundRecord, bool]:
        """Apply discards from the parity comparison.

        Returns the round record and whether an attached hash confirmed
        agreement while no block was bad.
        """
        b, own, own_hash = self._pending
        self._pending = None
        if peer.round != self.round_index or len(peer.parities) != len(own):
            raise ProtocolDesync(f"{self.name}: parity message does not match round {self.round_index}")
        if (own_hash is None) != (peer_hash is None):
            raise ProtocolDesync(f"{self.name}: hash attachment mismatch")
        n = self.n
        nblocks = len(own)
        bad = (own.bits ^ peer.parities.bits).astype(bool)
        nbad = int(bad.sum())
        padding = nblocks * b - n

        keep = np.ones((nblocks, b), dtype=bool)
        keep[bad, :] = False
        keep[:, 0] = False
        # padding sits past index n, so truncating the mask drops it
        self.bits = BitString._wrap(self.bits.bits[keep.reshape(-1)[:n]])
        last_good = nblocks > 0 and not bad[-1]
        padding_removed = padding if last_good else 0

        p_before = self.p
        p_est = float(reestimate_p(nbad / nblocks, b)) if nblocks else 0.0
        self.p = float(residual_error_prob(p_est, b))
        pe_before = self.ledger.p_e
        self.ledger.after_round(b, self.n)

        agreed = False
        hash_bits = 0
        if own_hash is not None:
            hash_bits = own_hash.k
            agreed = nbad == 0 and own_hash.hash == peer_hash.hash

        record = RoundRecord(
            index=self.round_index,
            b=b,
            n_before=n,
            n_after=self.n,
            bad_blocks=nbad,
            good_blocks=nblocks - nbad,
            padding=padding,
            padding_removed=padding_removed,
            bits_discarded=n - self.n,
            parity_bits_disclosed=nblocks,
            hash_bits_disclosed=hash_bits,
            p_before=p_before,
            p_estimate=p_est,
            p_after=self.p,
            pe_before=pe_before,
            pe_after=self.ledger.p_e,
            has_relations=self.ledger.has_relations,
        )
        self.round_index += 1
        return record, agreed

    def verification_hash(self, k: int | None = None) -> HashMsg:
        k = self.config.hash_bits if k is None else k
        h = subset_parity_hash(self._hash_gen, self.bits, k)
        self.ledger.hash_bits_seen += k
        return HashMsg(k, h)

    def verification_failed(self):
        self.p = 2.0 / self.n if self.n else 0.5

    def delta(self) -> int:
        return compute_delta(self.ledger, self.n, self.config.safety_sigmas)

    def amplify(self, delta: int) -> BitString:
        return privacy_amplify(self.bits, delta, self._pa_gen, self.config.min_final)


def compute_delta(ledger: EveLedger, n_agreed: int, safety_sigmas: float = 0.0) -> int:
    """Bits Eve may know: her share of the agreed bits plus every hash bit sent."""
    pe = ledger.p_e
    est = n_agreed * pe
    if safety_sigmas:
        est += safety_sigmas * math.sqrt(n_agreed * pe * (1.0 - pe))
    return int(math.ceil(est - 1e-9)) + ledger.hash_bits_seen


def privacy_amplify(bits: BitString, delta: int, gen: SeededGenerator, min_final: int = 1) -> BitString:
    """Compress ``m`` agreed bits to ``m - delta`` random-subset parities."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    k = len(bits) - delta
    if k < max(min_final, 1):
        raise KeyTooShort(f"only {k} bits would remain (minimum {min_final})")
    return subset_parity_hash(gen, bits, k)


def _exchange(msg, transcript, sender):
    raw = msg.to_bytes()
    if transcript is not None:
        transcript.append((sender, raw))
    return decode(raw)


def execute_round(alice: Party, bob: Party, b: int | None = None, transcript=None) -> tuple[RoundRecord, bool]:
    """Run one round on both parties and check they stayed in step."""
    pa, ha = alice.start_round(b)
    pb, hb = bob.start_round(b)
    pa_rx = _exchange(pa, transcript, "alice")
    pb_rx = _exchange(pb, transcript, "bob")
    ha_rx = None if ha is None else _exchange(ha, transcript, "alice")
    hb_rx = None if hb is None else _exchange(hb, transcript, "bob")
    errors_before = hamming_distance(alice.bits, bob.bits)
    rec_a, agreed_a = alice.finish_round(pb_rx, hb_rx)
    rec_b, agreed_b = bob.finish_round(pa_rx, ha_rx)
    if rec_a != rec_b or agreed_a != agreed_b:
        raise ProtocolDesync(f"round {rec_a.index}: parties diverged")
    rec = replace(rec_a, errors_before=errors_before, errors_after=hamming_distance(alice.bits, bob.bits))
    return rec, agreed_a


@dataclass(frozen=True)
class VerificationResult:
    passed: bool
    k: int
    alice_hash: BitString
    bob_hash: BitString


def verify(alice: Party, bob: Party, k: int | None = None, transcript=None) -> VerificationResult:
    """Compare ``k``-bit random-subset hashes of the two current strings."""
    ha = alice.verification_hash(k)
    hb = bob.verification_hash(k)
    ha_rx = _exchange(ha, transcript, "alice")
    hb_rx = _exchange(hb, transcript, "bob")
    passed_a = ha.hash == hb_rx.hash
    passed_b = hb.hash == ha_rx.hash
    if passed_a != passed_b:
        raise ProtocolDesync("verification verdicts differ")
    return VerificationResult(passed_a, ha.k, ha.hash, hb.hash)


def run_session(alice_bits: BitString, bob_bits: BitString, config: SessionConfig, transcript=None) -> SessionOutcome:
    """Reconcile, verify and privacy-amplify two noisy copies of a bit string."""
    if len(alice_bits) != len(bob_bits):
        raise ValueError("Alice and Bob must start with equally long strings")
    alice = Party("alice", alice_bits, config)
    bob = Party("bob", bob_bits, config)
    rounds: list[RoundRecord] = []
    verifications: list[VerificationRecord] = []
    classical = 0

    def outcome(status, reason="", key=None, bob_key=None, delta=0):
        empty = BitString()
        return SessionOutcome(
            status=status,
            key=key if key is not None else empty,
            bob_key=bob_key if bob_key is not None else empty,
            rounds=rounds,
            verifications=verifications,
            delta=delta,
            n_agreed=alice.n,
            classical_bits_total=classical,
            p_e=alice.ledger.p_e,
            alice_agreed=alice.bits,
            bob_agreed=bob.bits,
            reason=reason,
        )

    try:
        while True:
            if alice.n < config.min_n:
                return outcome(SessionStatus.FAILED_TOO_SMALL, f"n = {alice.n} < {config.min_n}")
            if len(rounds) >= config.max_rounds:
                return outcome(SessionStatus.ABORTED, "round limit reached")
            if alice.wants_verification():
                res = verify(alice, bob, transcript=transcript)
                classical += res.k
                verifications.append(
                    VerificationRecord(res.k, res.passed, False, hamming_distance(alice.bits, bob.bits))
                )
                if res.passed:
                    break
                log.debug("verification failed at n=%d; resuming rounds", alice.n)
                alice.verification_failed()
                bob.verification_failed()
                continue
            rec, agreed = execute_round(alice, bob, transcript=transcript)
            rounds.append(rec)
            classical += rec.parity_bits_disclosed + rec.hash_bits_disclosed
            log.debug("round %d: b=%d n=%d->%d bad=%d", rec.index, rec.b, rec.n_before, rec.n_after, rec.bad_blocks)
            if rec.hash_bits_disclosed:
                verifications.append(VerificationRecord(rec.hash_bits_disclosed, agreed, True, rec.errors_before))
            if agreed:
                break
    except ProtocolDesync as exc:
        return outcome(SessionStatus.ABORTED, str(exc))

    delta = alice.delta()
    if delta != bob.delta():
        return outcome(SessionStatus.ABORTED, "parties disagree on delta")
    if delta >= alice.n:
        return outcome(SessionStatus.ABORTED, f"delta = {delta} leaves no key from {alice.n} bits", delta=delta)
    try:
        key_a = alice.amplify(delta)
        key_b = bob.amplify(delta)
    except KeyTooShort as exc:
        return outcome(SessionStatus.ABORTED, str(exc), delta=delta)
    return outcome(SessionStatus.SUCCESS, key=key_a, bob_key=key_b, delta=delta)
