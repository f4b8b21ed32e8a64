"""Deterministic forecast of a reconciliation run from expected counts.

Each round the expected bad-block fraction is removed, one bit of every good
block is removed, and the error probability drops to its residual value.
Quantities are carried as floats between rounds; rows are truncated to
integers only when displayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analysis import (
    BlocksizeMode,
    BlocksizePolicy,
    EveParams,
    prob_bad_block,
    residual_error_prob,
)

# below this many displayed bits an advantage is shown as a dash
MIN_ADVANTAGE = 64

YIELD_POLICY = BlocksizePolicy(BlocksizeMode.YIELD, sqrt_cap=False)
EVE_POLICY = BlocksizePolicy(BlocksizeMode.EVE, sqrt_cap=False)


class PredictionError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionRow:
    p: float
    b: int
    n: float
    errors: float
    bad_blocks: float
    new_n: float
    advantage: float | None = None
    p_e: float | None = None

    def display(self) -> dict:
        row = {
            "p": self.p,
            "b": self.b,
            "n": math.floor(self.n),
            "errors": math.floor(self.errors),
            "bad_blocks": math.floor(self.bad_blocks),
            "new_n": math.floor(self.new_n),
        }
        if self.advantage is not None:
            row["advantage"] = math.floor(self.advantage)
        return row


@dataclass
class PredictionRun:
    rows: list[PredictionRow] = field(default_factory=list)
    final_n: float = 0.0
    final_advantage: float | None = None

    @property
    def rounds(self) -> int:
        return len(self.rows)

    @property
    def blocksizes(self) -> tuple[int, ...]:
        return tuple(r.b for r in self.rows)


def _default_policy(eve):
    return YIELD_POLICY if eve is None else EVE_POLICY


def predict_round(p, n, eve=None, policy=None, min_n=4):
    """Forecast one round.

    Returns ``(row, next_p, next_eve)``. ``next_eve`` is None when Eve is not
    tracked.
    """
    if not 0.0 < p < 0.5:
        raise PredictionError(f"a round needs 0 < p < 1/2, got {p}")
    if n < min_n:
        raise PredictionError(f"n = {n} is below the minimum {min_n}; the run fails")
    policy = policy or _default_policy(eve)
    b = policy.choose(p, n, eve)
    p1 = float(prob_bad_block(p, b))
    new_n = (1.0 - p1) * (1.0 - 1.0 / b) * n
    next_p = float(residual_error_prob(p, b))
    next_eve = None
    advantage = None
    if eve is not None:
        next_eve = eve.after_round(b)
        advantage = new_n * (1.0 - next_eve.p_e - next_p)
    row = PredictionRow(
        p=p,
        b=b,
        n=n,
        errors=p * n,
        bad_blocks=p1 * n / b,
        new_n=new_n,
        advantage=advantage,
        p_e=None if next_eve is None else next_eve.p_e,
    )
    return row, next_p, next_eve


def predict_run(p0, n0, eve0=None, policy=None, min_n=4, max_rounds=1000):
    """Chain rounds until fewer than one error is expected."""
    run = PredictionRun()
    p, n, eve = float(p0), float(n0), eve0
    while p * n >= 1.0:
        if len(run.rows) >= max_rounds:
            raise PredictionError("prediction did not converge")
        row, p, eve = predict_round(p, n, eve, policy, min_n)
        run.rows.append(row)
        n = row.new_n
    run.final_n = n
    if run.rows and eve is not None:
        run.final_advantage = run.rows[-1].advantage
    elif eve is not None:
        run.final_advantage = n * (1.0 - eve.p_e - p)
    return run


def final_advantage(p: float, p_e: float, n0: float = 1e6) -> float:
    return predict_run(p, n0, EveParams(p_e)).final_advantage


def sweep(p_list, pe_list, n0=1e6):
    """Final advantage for every ``(p_e, p)`` pair; rows follow *pe_list*."""
    return [[final_advantage(p, pe, n0) for p in p_list] for pe in pe_list]


def sweep_ratio(p_list, ratios, n0=1e6):
    """Final advantage with ``q_e = ratio * p``; rows follow *ratios*."""
    out = []
    for r in ratios:
        row = []
        for p in p_list:
            q_e = r * p
            if not 0.0 < q_e <= 1.0:
                raise ValueError(f"q_e = {r} * {p} is outside (0, 1]")
            row.append(final_advantage(p, 1.0 - q_e, n0))
        out.append(row)
    return out


def advantage_cell(value: float):
    """Integer advantage for display, or None below :data:`MIN_ADVANTAGE`."""
    shown = math.floor(value)
    return None if shown < MIN_ADVANTAGE else shown
