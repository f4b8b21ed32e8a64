import numpy as np
import pytest

from qkdrecon.bitcore import BitString, SeededGenerator, Stream, generate_random_bits, hamming_distance
from qkdrecon.protocol import RoundRecord, SessionConfig
from qkdrecon.simchannel import (
    TrialReport,
    bad_block_zscore,
    eve_tap,
    monte_carlo,
    run_trial,
    transmit_bsc,
)


def source(n, seed=0):
    return generate_random_bits(SeededGenerator(seed, Stream.SOURCE), n)


class TestChannel:
    def test_noiseless(self):
        bits = source(1000)
        assert transmit_bsc(bits, 0.0, SeededGenerator(1)) == bits

    def test_flip_rate(self):
        bits = source(10**6)
        out = transmit_bsc(bits, 0.25, SeededGenerator(1, Stream.CHANNEL))
        assert abs(hamming_distance(bits, out) / 10**6 - 0.25) < 0.002

    def test_half_is_independent(self):
        bits = source(200_000)
        out = transmit_bsc(bits, 0.5, SeededGenerator(2, Stream.CHANNEL))
        r = np.corrcoef(bits.bits.astype(float), out.bits.astype(float))[0, 1]
        assert abs(r) < 4 / np.sqrt(200_000)

    def test_bursts(self):
        bits = BitString.zeros(200_000)
        out = transmit_bsc(bits, 0.01, SeededGenerator(3), burst=4)
        flips = out.bits.astype(bool)
        assert abs(flips.mean() - 0.01) < 0.002
        # runs come in groups, so a flipped bit usually has a flipped neighbour
        idx = np.flatnonzero(flips)
        idx = idx[idx + 1 < len(flips)]
        assert flips[idx + 1].mean() > 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            transmit_bsc(BitString.zeros(3), 0.6, SeededGenerator(0))
        with pytest.raises(ValueError):
            transmit_bsc(BitString.zeros(3), 0.1, SeededGenerator(0), burst=0)


class TestEveTap:
    def test_extremes(self):
        bits = source(1000)
        assert eve_tap(bits, 0.0, SeededGenerator(1)).known == 0
        assert eve_tap(bits, 1.0, SeededGenerator(1)).known == 1000

    def test_density(self):
        tap = eve_tap(source(10**6), 0.25, SeededGenerator(4, Stream.EVE))
        assert abs(tap.known / 10**6 - 0.25) < 0.002

    def test_validation(self):
        with pytest.raises(ValueError):
            eve_tap(source(10), 1.5, SeededGenerator(0))


class TestTrials:
    def test_p25_chain_shape(self):
        rep = run_trial(SessionConfig(n0=10**6, p0=0.25), seed=1)
        assert rep.success and rep.residual_errors == 0
        bs = [r.b for r in rep.rounds]
        assert bs[:3] == [2, 3, 7]
        assert 16 <= bs[3] <= 17
        assert 50 <= bs[4] <= 90
        assert 97_000 <= rep.final_n <= 102_000

    def test_noiseless(self):
        rep = run_trial(SessionConfig(n0=1000, p0=0.0), seed=3)
        assert rep.success
        assert rep.final_n == 1000
        assert rep.initial_errors == 0

    def test_high_noise(self):
        rep = run_trial(SessionConfig(n0=10**6, p0=0.45, min_final=1), seed=1)
        assert rep.success and rep.residual_errors == 0
        assert rep.final_n == pytest.approx(3680, rel=0.15)

    def test_p49_reconciles(self):
        # the strings are reconciled, though hash charges can exhaust the tiny key
        rep = run_trial(SessionConfig(n0=10**6, p0=0.49, min_final=1), seed=2)
        assert rep.residual_errors == 0
        assert 80 <= rep.final_n <= 300

    def test_deterministic(self):
        cfg = SessionConfig(n0=50_000, p0=0.1)
        assert run_trial(cfg, 5).to_json_line() == run_trial(cfg, 5).to_json_line()

    def test_json_roundtrip(self):
        rep = run_trial(SessionConfig(n0=20_000, p0=0.1), 2, eve_fraction=0.1)
        again = TrialReport.from_json_line(rep.to_json_line())
        assert again == rep
        assert isinstance(again.rounds[0], RoundRecord)
        assert rep.eve_known > 0

    def test_monte_carlo_summary(self):
        summary = monte_carlo(SessionConfig(n0=20_000, p0=0.1), trials=4, base_seed=10)
        assert [r.seed for r in summary.reports] == [10, 11, 12, 13]
        assert summary.success_rate == 1.0
        assert summary.mean_final_n == pytest.approx(np.mean([r.final_n for r in summary.reports]))
        assert summary.std_final_n > 0
        assert summary.mean_rounds >= 1
        with pytest.raises(ValueError):
            monte_carlo(SessionConfig(n0=100), trials=0)

    @pytest.mark.slow
    def test_many_trials_succeed(self):
        summary = monte_carlo(SessionConfig(n0=100_000, p0=0.25), trials=50, base_seed=100)
        assert summary.success_rate == 1.0
        assert all(r.residual_errors == 0 for r in summary.reports)


def test_zscore():
    rec = RoundRecord(index=0, b=2, n_before=1000, n_after=0, bad_blocks=200, good_blocks=300, padding=0,
                      padding_removed=0, bits_discarded=0, parity_bits_disclosed=500, hash_bits_disclosed=0,
                      p_before=0.25, p_estimate=0.25, p_after=0.1, pe_before=0, pe_after=0,
                      has_relations=False, errors_before=250)
    # P1 = 0.375, so mean 187.5 and sd sqrt(500 * 0.375 * 0.625)
    assert bad_block_zscore(rec) == pytest.approx(12.5 / np.sqrt(117.1875))
