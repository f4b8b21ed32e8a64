"""Command-line front end.

    qkdr predict    --p 0.25 [--pe 0.25] [--n 1000000]
    qkdr simulate   --p 0.25 --seed 1 --trials 10
    qkdr blocksize  --p 0.01 0.001
    qkdr crossovers --bmax 10
    qkdr sweep      --p 0.1 0.2 (--pe 0 0.1 | --qe-ratio 2 3)

Tables go to stdout as CSV (default) or markdown; logs go to stderr.
Exit status is 0 on success, 2 on bad arguments and 1 when a simulated
session fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field

from .analysis import EveParams, crossover_point, optimal_blocksize
from .bitcore import DEFAULT_WINDOW
from .predictor import PredictionError, advantage_cell, predict_run, sweep, sweep_ratio
from .protocol import SessionConfig
from .simchannel import monte_carlo

DASH = "—"
log = logging.getLogger("qkdrecon")


@dataclass
class OutputTable:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *cells):
        if len(cells) != len(self.header):
            raise ValueError(f"row has {len(cells)} cells, header has {len(self.header)}")
        self.rows.append(list(cells))

    def cells(self) -> list[list[str]]:
        return [[format_cell(c) for c in row] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.cells())
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| " + " | ".join(self.header) + " |", "|" + "---|" * len(self.header)]
        lines += ["| " + " | ".join(row) + " |" for row in self.cells()]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_markdown() if fmt == "md" else self.to_csv()


def format_cell(value) -> str:
    if value is None:
        return DASH
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _probability(text: str) -> float:
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"{p} is not a probability")
    return p


def _count(text: str) -> int:
    try:
        n = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"{n} must be positive")
    return n


def predict_table(p: float, n: int, pe: float | None = None) -> OutputTable:
    eve = None if pe is None else EveParams(pe)
    run = predict_run(p, n, eve)
    header = ["p", "b", "n", "errors", "bad_blocks", "new_n"]
    if eve is not None:
        header.append("advantage")
    table = OutputTable(header)
    for row in run.rows:
        d = row.display()
        cells = [d[h] for h in header if h != "advantage"]
        if eve is not None:
            cells.append(advantage_cell(row.advantage))
        table.add(*cells)
    return table


def blocksize_table(ps) -> OutputTable:
    table = OutputTable(["p", "p^-1/2", "b"])
    for p in ps:
        table.add(float(p), float(p ** -0.5) if p > 0 else math.inf, optimal_blocksize(p))
    return table


def crossover_table(bmax: int) -> OutputTable:
    table = OutputTable(["b", "p"])
    for b in range(2, bmax + 1):
        table.add(b, f"{crossover_point(b):.5f}")
    return table


def sweep_table(ps, pes=None, ratios=None, n: int = 10**6) -> OutputTable:
    if ratios is not None:
        matrix = sweep_ratio(ps, ratios, n)
        labels = [f"{r:g}p" for r in ratios]
        corner = "qe\\p"
    else:
        matrix = sweep(ps, pes, n)
        labels = [f"{pe:g}" for pe in pes]
        corner = "pe\\p"
    table = OutputTable([corner] + [f"{p:g}" for p in ps])
    for label, row in zip(labels, matrix):
        table.add(label, *[advantage_cell(v) for v in row])
    return table


def simulate_tables(p, n, seed, trials, pe=0.0, cache_friendly=False, window=DEFAULT_WINDOW, min_final=128):
    cfg = SessionConfig(n0=n, p0=p, pe0=pe, cache_friendly=cache_friendly, window=window, min_final=min_final)
    summary = monte_carlo(cfg, trials, seed)
    rounds = OutputTable(["trial", "seed", "p", "b", "n", "errors", "bad_blocks", "new_n"])
    for i, rep in enumerate(summary.reports):
        for r in rep.rounds:
            rounds.add(i, rep.seed, r.p_before, r.b, r.n_before, r.errors_before, r.bad_blocks, r.n_after)
    trials_t = OutputTable(["trial", "seed", "status", "rounds", "final_n", "key_len", "residual_errors", "delta"])
    for i, rep in enumerate(summary.reports):
        trials_t.add(i, rep.seed, rep.status, len(rep.rounds), rep.final_n, rep.key_len, rep.residual_errors, rep.delta)
    totals = OutputTable(["trials", "success_rate", "mean_final_n", "std_final_n", "mean_rounds", "mean_key_len"])
    totals.add(summary.trials, summary.success_rate, summary.mean_final_n, summary.std_final_n,
               summary.mean_rounds, summary.mean_key_len)
    return summary, [rounds, trials_t, totals]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdr", description="Parity-discard error reconciliation tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "md"), default="csv")

    sp = sub.add_parser("predict", help="expected-count forecast of a run")
    sp.add_argument("--p", type=_probability, required=True)
    sp.add_argument("--n", type=_count, default=10**6)
    sp.add_argument("--pe", type=_probability, default=None, help="track Eve with this initial known fraction")
    common(sp)

    sp = sub.add_parser("simulate", help="Monte-Carlo sessions over a binary symmetric channel")
    sp.add_argument("--p", type=_probability, required=True)
    sp.add_argument("--n", type=_count, default=10**6)
    sp.add_argument("--seed", type=int, default=int(os.environ.get("QKDR_SEED", "0")))
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--pe", type=_probability, default=0.0)
    sp.add_argument("--min-final", type=int, default=128)
    sp.add_argument("--cache-friendly", action="store_true")
    sp.add_argument("--window", type=_count, default=DEFAULT_WINDOW)
    common(sp)

    sp = sub.add_parser("blocksize", help="blocksize maximising the yield criterion")
    sp.add_argument("--p", type=_probability, nargs="+", required=True)
    common(sp)

    sp = sub.add_parser("crossovers", help="smallest p at which each blocksize is optimal")
    sp.add_argument("--bmax", type=int, default=10)
    common(sp)

    sp = sub.add_parser("sweep", help="final advantage over a grid of p and Eve knowledge")
    sp.add_argument("--p", type=_probability, nargs="+", required=True)
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--pe", type=_probability, nargs="+")
    grp.add_argument("--qe-ratio", type=float, nargs="+")
    sp.add_argument("--n", type=_count, default=10**6)
    common(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = sys.stdout

    if args.command == "predict":
        if not 0.0 < args.p < 0.5:
            parser.error("--p must satisfy 0 < p < 1/2")
        if args.n < 16:
            parser.error("--n must be at least 16")
        if args.pe is not None and args.pe >= 1.0:
            parser.error("--pe must be below 1")
        try:
            table = predict_table(args.p, args.n, args.pe)
        except PredictionError as exc:
            log.error("%s", exc)
            return 1
        out.write(table.render(args.format))
        return 0

    if args.command == "simulate":
        if args.trials < 1:
            parser.error("--trials must be at least 1")
        if args.p > 0.5:
            parser.error("--p must not exceed 1/2")
        if args.pe >= 1.0:
            parser.error("--pe must be below 1")
        if args.window < 2:
            parser.error("--window must be at least 2")
        if args.seed < 0:
            parser.error("--seed must be non-negative")
        summary, tables = simulate_tables(args.p, args.n, args.seed, args.trials, args.pe,
                                          args.cache_friendly, args.window, args.min_final)
        out.write("\n".join(t.render(args.format) for t in tables))
        return 0 if summary.success_rate == 1.0 else 1

    if args.command == "blocksize":
        out.write(blocksize_table(args.p).render(args.format))
        return 0

    if args.command == "crossovers":
        if args.bmax < 2:
            parser.error("--bmax must be at least 2")
        out.write(crossover_table(args.bmax).render(args.format))
        return 0

    if args.command == "sweep":
        if any(not 0.0 < p < 0.5 for p in args.p):
            parser.error("every --p must satisfy 0 < p < 1/2")
        if args.pe is not None:
            if any(pe >= 1.0 for pe in args.pe):
                parser.error("every --pe must be below 1")
            table = sweep_table(args.p, pes=args.pe, n=args.n)
        else:
            if any(not 0.0 < r * p <= 1.0 for r in args.qe_ratio for p in args.p):
                parser.error("every qe-ratio * p must lie in (0, 1]")
            table = sweep_table(args.p, ratios=args.qe_ratio, n=args.n)
        out.write(table.render(args.format))
        return 0

    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
