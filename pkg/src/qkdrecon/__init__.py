"""Parity-discard error reconciliation for quantum key distribution.

Submodules:

- :mod:`qkdrecon.bitcore`: bit strings, seeded generators, permutations, parities
- :mod:`qkdrecon.analysis`: closed-form block statistics and blocksize rules
- :mod:`qkdrecon.predictor`: expected-count forecasts of whole runs
- :mod:`qkdrecon.protocol`: the executable two-party protocol
- :mod:`qkdrecon.simchannel`: noisy channel and Monte-Carlo trials
- :mod:`qkdrecon.cli`: the ``qkdr`` command
"""

from .analysis import (
    BlocksizeMode,
    BlocksizePolicy,
    ChannelParams,
    EveParams,
    choose_blocksize_eve,
    crossover_point,
    estimate_pe_from_error_rate,
    eve_update_case1,
    eve_update_case2,
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
from .bitcore import (
    BitString,
    Permutation,
    SeededGenerator,
    Stream,
    apply_permutation,
    block_parities,
    cache_friendly_permutation,
    durstenfeld_permutation,
    generate_random_bits,
    hamming_distance,
    subset_parity_hash,
)
from .predictor import PredictionRow, PredictionRun, predict_round, predict_run, sweep, sweep_ratio
from .protocol import SessionConfig, SessionOutcome, SessionStatus, run_session
from .simchannel import monte_carlo, run_trial, transmit_bsc

__version__ = "0.1.0"
