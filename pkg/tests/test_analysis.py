import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from qkdrecon.analysis import (
    BlocksizeMode,
    BlocksizePolicy,
    ChannelParams,
    EveParams,
    choose_blocksize_eve,
    crossover_point,
    estimate_pe_from_error_rate,
    eve_update_case1,
    eve_update_case2,
    expected_errors_good_block,
    expected_rounds,
    optimal_blocksize,
    prob_bad_block,
    prob_no_error,
    prob_undetected,
    reestimate_p,
    residual_error_prob,
    shannon_entropy,
    yield_criterion,
)

probs = st.floats(0.0, 0.5)
blocks = st.integers(2, 400)


class TestBlockProbabilities:
    def test_hand_values(self):
        assert prob_no_error(0.0, 5) == 1.0
        assert prob_no_error(0.5, 2) == 0.25
        assert prob_no_error(0.25, 2) == pytest.approx(0.5625)
        assert prob_bad_block(0.25, 2) == pytest.approx(0.375)
        assert prob_bad_block(0.15, 2) == pytest.approx(0.255)
        assert prob_bad_block(0.0, 9) == 0.0
        assert prob_undetected(0.0, 3) == 0.0
        assert prob_undetected(0.25, 2) == pytest.approx(0.0625)

    def test_published_counts(self):
        assert prob_bad_block(0.25, 2) * 500_000 == pytest.approx(187_500)
        assert prob_bad_block(0.15, 2) * 500_000 == pytest.approx(127_500)

    @pytest.mark.parametrize("b", [2, 3, 5, 8, 13])
    @pytest.mark.parametrize("p", [0.01, 0.1, 0.3, 0.49])
    def test_against_summation(self, p, b):
        p0, p1, p2, e_u = oracles.block_stats(Fraction(p), b)
        assert prob_no_error(p, b) == pytest.approx(float(p0), abs=1e-13)
        assert prob_bad_block(p, b) == pytest.approx(float(p1), abs=1e-13)
        assert prob_undetected(p, b) == pytest.approx(float(p2), abs=1e-13)
        assert expected_errors_good_block(p, b) == pytest.approx(float(e_u), abs=1e-12)

    @given(probs, blocks)
    def test_partition(self, p, b):
        total = prob_no_error(p, b) + prob_bad_block(p, b) + prob_undetected(p, b)
        assert total == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= prob_bad_block(p, b) <= 0.5 + 1e-15

    @given(st.floats(1e-6, 0.5), blocks)
    def test_residual_below_input(self, p, b):
        assert 0.0 <= residual_error_prob(p, b) <= p * (1 + 1e-12)

    def test_residual_published(self):
        assert residual_error_prob(0.25, 2) == pytest.approx(0.1, abs=5e-7)
        assert residual_error_prob(0.1, 3) == pytest.approx(0.023810, abs=5e-7)
        assert residual_error_prob(0.0, 4) == 0.0

    def test_vectorised(self):
        ps = np.array([0.01, 0.2, 0.4])
        out = prob_bad_block(ps, 4)
        assert out.shape == (3,)
        assert out[1] == pytest.approx(prob_bad_block(0.2, 4))


class TestReestimate:
    def test_cases(self):
        assert reestimate_p(0.0, 7) == 0.0
        assert reestimate_p(0.375, 2) == pytest.approx(0.25)
        assert reestimate_p(0.6, 3) == 0.5
        assert reestimate_p(0.5, 3) == 0.5

    @given(st.floats(1e-4, 0.45), st.integers(2, 20))
    def test_inverse(self, p, b):
        # once (1-2p)^b is lost to rounding the inverse is ill-conditioned
        assume((1 - 2 * p) ** b > 1e-4)
        assert reestimate_p(prob_bad_block(p, b), b) == pytest.approx(p, abs=1e-9)

    @given(st.floats(0.0, 0.499), st.integers(2, 50))
    def test_monotone(self, e, b):
        assert reestimate_p(e, b) <= reestimate_p(min(e + 1e-3, 0.5), b)


class TestEntropyAndYield:
    def test_entropy(self):
        assert shannon_entropy(0.5) == 1.0
        assert shannon_entropy(0.0) == 0.0
        assert shannon_entropy(1.0) == 0.0
        assert shannon_entropy(0.11) == pytest.approx(oracles.entropy(0.11))

    @given(st.floats(0.0, 1.0))
    def test_entropy_symmetric(self, p):
        assert shannon_entropy(p) == pytest.approx(shannon_entropy(1 - p), abs=1e-12)

    @pytest.mark.parametrize("p,b", [(0.01, 10), (0.1, 3), (0.3, 2), (0.001, 32)])
    def test_yield_against_oracle(self, p, b):
        assert yield_criterion(p, b) == pytest.approx(oracles.yield_j(p, b), abs=1e-12)

    def test_noiseless_yield(self):
        assert yield_criterion(0.0, 10) == pytest.approx(0.9)


class TestOptimalBlocksize:
    @pytest.mark.parametrize("p,b", [(0.5, 2), (0.2, 2), (0.1, 3), (0.05, 5), (0.01, 10),
                                     (0.001, 32), (0.0001, 101)])
    def test_published(self, p, b):
        assert optimal_blocksize(p) == b

    def test_matches_bruteforce_oracle(self):
        for p in [0.3, 0.07, 0.02, 0.004]:
            j = [oracles.yield_j(p, b) for b in range(2, 200)]
            assert optimal_blocksize(p) == 2 + int(np.argmax(j))

    def test_cap_and_noiseless(self):
        assert optimal_blocksize(0.0, b_max=50) == 50
        assert optimal_blocksize(0.0001, b_max=40) == 40
        with pytest.raises(ValueError):
            optimal_blocksize(0.1, b_max=1)

    @given(st.floats(1e-4, 0.5), st.floats(1e-4, 0.5))
    def test_non_increasing(self, a, b):
        lo, hi = sorted((a, b))
        assert optimal_blocksize(lo) >= optimal_blocksize(hi)

    @pytest.mark.parametrize("b,p", [(2, 0.15973), (5, 0.03657), (10, 0.00999)])
    def test_crossovers(self, b, p):
        assert crossover_point(b) == pytest.approx(p, abs=1e-12)

    def test_crossover_brackets_change(self):
        c = crossover_point(4)
        assert optimal_blocksize(c + 2e-5) <= 4
        assert optimal_blocksize(c - 2e-5) > 4


class TestExpectedRounds:
    def test_value(self):
        # log2(4) + log_1.5(log2(1e5)), evaluated independently
        want = 2 + math.log(math.log(1e5) / math.log(2)) / math.log(1.5)
        assert expected_rounds(0.25, 1e5, 1) == pytest.approx(want)
        assert expected_rounds(0.25, 1e5, 1) == pytest.approx(8.930, abs=5e-4)

    def test_errors(self):
        with pytest.raises(ValueError):
            expected_rounds(0.5, 1e5, 1)
        with pytest.raises(ValueError):
            expected_rounds(0.1, 1e5, 0)


class TestEveUpdates:
    def test_case1_values(self):
        assert eve_update_case1(0.25, 2) == pytest.approx(0.4375)
        assert eve_update_case1(0.0, 9) == 0.0
        assert eve_update_case1(0.4375, 7) == pytest.approx(0.509905, abs=1e-6)

    def test_case2_values(self):
        assert eve_update_case2(0.9, 5) == 1.0
        assert eve_update_case2(0.25, 4) == pytest.approx(0.5)
        assert eve_update_case2(0.56546, 64) == pytest.approx(0.58108, abs=1e-5)

    @given(st.floats(0.0, 1.0), st.integers(2, 500))
    def test_case1_bounded(self, pe, b):
        nxt = float(eve_update_case1(pe, b))
        assert pe - 1e-15 <= nxt <= 1.0 + 1e-15
        assert 1.0 - nxt >= (1.0 - pe) ** 2 - 1e-12

    def test_params_transition(self):
        eve = EveParams(0.25)
        step = eve.after_round(2)
        assert not step.has_relations and step.p_e == pytest.approx(0.4375)
        step = step.after_round(7)
        assert step.has_relations
        assert step.after_round(4).p_e == pytest.approx(step.p_e + 0.25)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            EveParams(1.5)
        with pytest.raises(ValueError):
            ChannelParams(0.7)
        assert ChannelParams(0.2).q == pytest.approx(0.8)


class TestEveBlocksize:
    def test_published_rows(self):
        assert choose_blocksize_eve(0.15, EveParams(0.25)) == 2
        assert choose_blocksize_eve(0.030201, EveParams(0.4375)) == 7
        assert choose_blocksize_eve(0.005721, EveParams(0.50990, True)) == 18

    def test_divergent(self):
        assert choose_blocksize_eve(0.0, EveParams(0.2), b_max=99) == 99
        assert choose_blocksize_eve(0.1, EveParams(1.0, True), b_max=12) == 12
        with pytest.raises(ValueError):
            choose_blocksize_eve(0.0, EveParams(0.2))

    def test_pe_bound(self):
        assert estimate_pe_from_error_rate(0.0) == 0.0
        assert estimate_pe_from_error_rate(0.1) == pytest.approx(0.283, abs=1e-3)
        assert estimate_pe_from_error_rate(0.4) == 1.0


class TestPolicy:
    def test_sqrt_cap(self):
        pol = BlocksizePolicy(BlocksizeMode.YIELD, sqrt_cap=True)
        assert pol.b_max(10_000) == 100
        assert pol.choose(1e-6, 10_000) == 100
        assert pol.choose(0.25, 10_000) == 2

    def test_uncapped(self):
        pol = BlocksizePolicy(BlocksizeMode.YIELD, sqrt_cap=False)
        assert pol.choose(1e-6, 10_000) > 100

    def test_eve_mode(self):
        pol = BlocksizePolicy(BlocksizeMode.EVE, sqrt_cap=False)
        assert pol.choose(0.15, 1e6, EveParams(0.25)) == 2
        assert pol.choose(0.01, 1e6) == 10
