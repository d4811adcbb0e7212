"""Command-line entry point: ``fountainq <subcommand> ...``.

Exit status: 0 on success, 1 on invalid input, 2 when lemma verification
finds a counterexample.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

from . import bounds, lemmas
from .codec import MeasurementBatch, generate_batch, input_vector, random_input
from .degree import ideal_soliton, soliton_for_difficulty
from .errors import ContractError, ParameterError, TransitionOutOfRange
from .experiment import (
    ExperimentConfig,
    estimate_transition,
    make_rng,
    records_from_csv,
    records_to_csv,
    run_sweep,
)
from .gf2 import DECODERS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_range(text: str, kind=float) -> list:
    """``start:stop:step`` inclusive of stop, or a comma list, or a single value."""
    if ":" not in text:
        return [kind(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise UsageError(f"bad range {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + i * step, 12) for i in range(count)]
    if kind is int:
        if any(v != int(v) for v in values):
            raise UsageError(f"range {text!r} must be integral")
        return [int(v) for v in values]
    return values


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("FQ_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"FQ_SEED must be an integer, got {env!r}") from None


def _distribution(args):
    if args.D is not None and args.difficulty is not None:
        raise UsageError("give either --D or --difficulty, not both")
    if args.D is not None:
        return ideal_soliton(args.k, args.D)
    if args.difficulty is not None:
        return ideal_soliton(args.k, soliton_for_difficulty(args.k, args.difficulty).D)
    raise UsageError("one of --D or --difficulty is required")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def format_table(header: list[str], rows: list[list[str]], pretty: bool) -> str:
    if not pretty:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_encode(args) -> int:
    dist = _distribution(args)
    rng = make_rng(_seed(args.seed))
    if args.x is not None:
        x = input_vector(args.x)
        if x.size != args.k:
            raise UsageError(f"--x has {x.size} bits but --k is {args.k}")
    else:
        x = random_input(args.k, rng)
    batch = generate_batch(x, dist, args.n, rng)
    if args.csv:
        _emit(batch.to_csv(), args.out)
        if args.out:
            print("x=" + "".join(map(str, x)))
        return 0
    if not args.out:
        raise UsageError("binary output needs --out (or use --csv)")
    Path(args.out).write_bytes(batch.to_bytes())
    print("x=" + "".join(map(str, x)))
    return 0


def cmd_decode(args) -> int:
    batch = MeasurementBatch.from_bytes(Path(args.input).read_bytes())
    result = DECODERS[args.decoder](batch)
    fields = [f"kind={result.kind.value}", f"k={batch.k}", f"n={batch.n}", f"rank={result.rank}"]
    if result.free_vars is not None:
        fields.append(f"free_vars={result.free_vars}")
    print(" ".join(fields))
    if result.unique:
        print("x=" + "".join(map(str, result.solution)))
    return 0


def cmd_bounds(args) -> int:
    dist = _distribution(args)
    ns = parse_range(args.n, int)
    if any(n < 0 for n in ns):
        raise UsageError("--n values must be nonnegative")
    sigmas = bounds.sigma_table(dist)
    header = ["n", "normalized_n", "isolation_lower_bound", "union_bound_pe", "vacuous"]
    rows = []
    for n in ns:
        params = bounds.BoundParams(args.k, n, dist)
        ub = bounds.union_bound_pe(params, sigmas)
        rows.append([
            str(n),
            f"{bounds.normalized_n(n, args.k, dist.dbar):.6g}",
            f"{bounds.isolation_lower_bound(params):.6g}",
            f"{ub.value:.6g}",
            str(int(ub.vacuous)),
        ])
    text = format_table(header, rows, args.pretty)
    if args.u is not None:
        need = bounds.isolation_necessary_n(args.k, dist.dbar, args.u)
        note = f"# D={dist.D} dbar={dist.dbar:.6g} n needed for isolation <= k^-{args.u}: {need}\n"
        text = note + text
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    if args.max_k < 3:
        raise UsageError("--max-k must be >= 3")
    reports = lemmas.verify_all(args.max_k)
    absent = [
        D for D in (2, 3)
        for k in (50, 100, 200)
        if 2 in lemmas.verify_lemma2_cases(k, D, lemmas.lemma2_min_n(k, D)).cases_seen
    ]
    for rep in reports:
        print(rep.line())
    print(f"case 2 absent for D in {{2,3}}: {'PASS' if not absent else 'FAIL'}")
    if all(r.passed for r in reports) and not absent:
        print("all cases pass")
        return 0
    print("counterexample found", file=sys.stderr)
    return 2


def _sweep_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data = ExperimentConfig.from_json(args.config).to_dict()
    if args.k is not None:
        data["k"] = args.k
    if args.difficulty:
        data["difficulties"] = args.difficulty
    if args.D:
        data["d_values"] = args.D
    if args.normalized and args.n:
        raise UsageError("give either --normalized or --n, not both")
    if args.normalized:
        data["n_grid"] = parse_range(args.normalized, float)
        data["normalized"] = True
    elif args.n:
        data["n_grid"] = parse_range(args.n, int)
        data["normalized"] = False
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None or "master_seed" not in data:
        data["master_seed"] = _seed(args.seed)
    if args.erasure_prob is not None:
        data["erasure_prob"] = args.erasure_prob
    if args.decoder is not None:
        data["decoder"] = args.decoder
    if "k" not in data:
        raise UsageError("--k is required (flag or config)")
    config = ExperimentConfig.from_dict(data)
    config.validate()
    return config


def cmd_sweep(args) -> int:
    config = _sweep_config(args)
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    records = run_sweep(config, threads=args.threads)
    if args.pretty:
        header = ["k", "D", "dbar", "n", "normalized_n", "trials", "failures", "p_hat", "ci_low", "ci_high"]
        rows = [r.row()[: len(header)] for r in records]
        _emit(format_table(header, rows, True), args.out)
    else:
        _emit(records_to_csv(records, timing=not args.no_timing), args.out)
    return 0


def cmd_transition(args) -> int:
    records = records_from_csv(Path(args.input).read_text())
    groups: dict[tuple[int, int], list] = {}
    for rec in records:
        groups.setdefault((rec.k, rec.D), []).append(rec)
    rows = []
    for (k, D), recs in groups.items():
        recs.sort(key=lambda r: r.n)
        try:
            value = f"{estimate_transition(recs, args.level):.6g}"
        except TransitionOutOfRange:
            value = "out-of-range"
        rows.append([str(k), str(D), f"{recs[0].dbar:.6g}", value])
    _emit(format_table(["k", "D", "dbar", "normalized_crossing"], rows, args.pretty), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fountainq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_dist(p):
        p.add_argument("--k", type=int, required=True, help="number of input bits (>= 3)")
        p.add_argument("--D", type=int, help="Soliton truncation degree, 2..k")
        p.add_argument("--difficulty", type=float,
                       help="target query difficulty (mean query size, input bits per query); "
                            "mapped to the D with nearest harmonic number")

    p = sub.add_parser("encode", help="generate parity measurements of an input vector")
    add_dist(p)
    p.add_argument("--n", type=int, required=True, help="number of measurements (>= 1)")
    p.add_argument("--x", help="input bits as a 0/1 string of length k (default: random)")
    p.add_argument("--seed", type=int, help="RNG seed (default: $FQ_SEED, else 0)")
    p.add_argument("--csv", action="store_true", help="write the readable CSV export instead of FQB1 binary")
    p.add_argument("--out", help="output path (binary FQB1 unless --csv)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode an FQB1 batch file")
    p.add_argument("--in", dest="input", required=True, help="FQB1 batch path")
    p.add_argument("--decoder", choices=sorted(DECODERS), default="ml", help="decoder (default: ml)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bounds", help="tabulate isolation lower bound and union upper bound over n")
    add_dist(p)
    p.add_argument("--n", required=True, help="sample counts, start:stop:step inclusive or comma list")
    p.add_argument("--u", type=float,
                   help="target exponent: also report the n at which single-input isolation "
                        "probability reaches k^-u")
    p.add_argument("--pretty", action="store_true", help="aligned text instead of CSV")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify-lemmas", help="exhaustive exact check of the combinatorial bounds")
    p.add_argument("--max-k", type=int, default=20, help="largest k in exhaustive sweeps (default: 20)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="Monte Carlo error probability over an n grid")
    p.add_argument("--config", help="JSON config; keys mirror ExperimentConfig fields, flags override")
    p.add_argument("--k", type=int, help="number of input bits")
    p.add_argument("--difficulty", type=float, action="append",
                   help="target query difficulty; repeatable")
    p.add_argument("--D", type=int, action="append", help="explicit Soliton D; repeatable")
    p.add_argument("--normalized", help="grid in units of k*ln(k)/dbar, start:stop:step inclusive")
    p.add_argument("--n", help="grid of raw sample counts, start:stop:step inclusive")
    p.add_argument("--trials", type=int, help="trials per grid point (default: 1000)")
    p.add_argument("--seed", type=int, help="master seed (default: $FQ_SEED, else 0)")
    p.add_argument("--erasure-prob", type=float,
                   help="probability each issued query goes unanswered, in [0, 1)")
    p.add_argument("--decoder", choices=sorted(DECODERS), help="decoder (default: ml)")
    p.add_argument("--threads", type=int, help="worker threads (default: available CPUs)")
    p.add_argument("--no-timing", action="store_true", help="omit the elapsed_seconds column")
    p.add_argument("--pretty", action="store_true", help="aligned text instead of CSV")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transition", help="estimate where p_hat crosses a level, per D")
    p.add_argument("--in", dest="input", required=True, help="sweep CSV")
    p.add_argument("--level", type=float, default=0.5, help="error-probability level (default: 0.5)")
    p.add_argument("--pretty", action="store_true", help="aligned text instead of CSV")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=cmd_transition)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ParameterError, ContractError, OSError, ValueError) as exc:
        print(f"fountainq: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
