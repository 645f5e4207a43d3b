"""Command-line front end.

Exit status: 0 on success, 2 on I/O or parse errors, 3 on configuration or
precondition errors.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harness import (RECORD_FIELDS, SweepConfig, default_threads, make_statistic,
                      run_sweep, runtime_benchmark)
from .mic import MicParams
from .suite import FUNCTIONS, calibrate_width, function_suite, generate, get_function, sample_d_alpha

EXIT_IO = 2
EXIT_CONFIG = 3

#: Columns of the published run-time table.
BENCH_FUNCTIONS = ("line", "exp10", "sigmoid", "parabola", "cubic", "sine_high",
                   "vf_cosine", "random")
BENCH_SIZES = (200, 400, 600, 800, 1000, 2000, 4000, 6000, 8000, 10000)


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def fmt(v) -> str:
    """Shortest round-trip text for numbers, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        # np.float64 subclasses float but has a different repr
        return repr(float(v))
    return str(v)


def read_dataset(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column numeric CSV with an optional header line."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
    xs, ys = [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise CliError(f"{path}:{lineno}: expected 2 columns, found {len(row)}", EXIT_IO)
        try:
            a, b = float(row[0]), float(row[1])
        except ValueError:
            if lineno == 1 and not xs:
                continue  # header
            raise CliError(f"{path}:{lineno}: non-numeric value in {row!r}", EXIT_IO) from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise CliError(f"{path}:{lineno}: non-finite value in {row!r}", EXIT_IO)
        xs.append(a)
        ys.append(b)
    return np.array(xs), np.array(ys)


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _manifest_path(out: str) -> str:
    return str(Path(out).with_suffix("")) + ".manifest.json"


def _write_manifest(out: str, command: str, config: dict, seed, threads: int, start: str) -> None:
    manifest = {
        "tool": "equit",
        "version": __version__,
        "command": command,
        "config": config,
        "base_seed": seed,
        "threads": threads,
        "start": start,
        "end": _now(),
    }
    target = _manifest_path(out) if out not in (None, "-") else None
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    if target is None:
        sys.stderr.write(text)
    else:
        _write_text(target, text)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _split(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(p for p in str(v).split(",") if p.strip())
    return [p.strip() for p in out]


def _mic_params(opts) -> MicParams:
    try:
        return MicParams(alpha=float(opts["alpha"]), c=int(opts["c"]),
                         b_override=None if opts.get("b") is None else float(opts["b"]))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid MIC parameters: {exc}", EXIT_CONFIG) from None


def _merged(args, defaults: dict) -> dict:
    """Flags override the JSON config file, which overrides defaults."""
    opts = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_IO) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config}: {exc}", EXIT_IO) from None
        if not isinstance(cfg, dict):
            raise CliError(f"config {args.config}: expected a JSON object", EXIT_CONFIG)
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise CliError(f"config: unknown field(s) {sorted(unknown)}", EXIT_CONFIG)
        opts.update(cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_score(args) -> int:
    opts = _merged(args, {"stats": None, "alpha": 0.6, "c": 15, "b": None, "k": 6, "out": None})
    names = _split(opts["stats"]) or ["mic"]
    params = _mic_params(opts)
    try:
        stats = [make_statistic(s, params, int(opts["k"])) for s in names]
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from None
    x, y = read_dataset(args.input)
    rows = []
    for stat in stats:
        try:
            score = float(stat(x, y, 0))
        except ValueError as exc:
            raise CliError(f"statistic {stat.id}: {exc}", EXIT_CONFIG) from None
        rows.append((stat.id, stat.description, score))
    _write_text(opts["out"], _csv_text(("statistic", "parameters", "score"), rows))
    return 0


def cmd_sweep(args) -> int:
    start = _now()
    opts = _merged(args, {
        "stats": "mic", "model": 1, "n": 500, "levels": 10, "reps": 1, "seed": 0,
        "alpha": 0.6, "c": 15, "b": None, "k": 6, "threads": None, "out": "records.csv",
        "pilot_reps": 3, "functions": None, "timings": False,
    })
    threads = int(opts["threads"]) if opts["threads"] is not None else default_threads()
    try:
        suite = None
        if opts["functions"]:
            wanted = _split([opts["functions"]])
            by_slug = {s.slug: s for s in function_suite(int(opts["model"]))}
            missing = [w for w in wanted if w not in by_slug]
            if missing:
                raise ValueError(f"functions: not in the suite for this model: {missing}")
            suite = [by_slug[w] for w in wanted]
        config = SweepConfig(
            statistics=tuple(_split([opts["stats"]])), noise_model=int(opts["model"]),
            n=int(opts["n"]), levels=int(opts["levels"]), replicates=int(opts["reps"]),
            base_seed=int(opts["seed"]), mic_params=_mic_params(opts), k=int(opts["k"]),
            suite=suite, pilot_reps=int(opts["pilot_reps"]),
            record_timings=bool(opts["timings"]))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid sweep configuration: {exc}", EXIT_CONFIG) from None
    records = run_sweep(config, threads=threads)
    rows = [tuple(getattr(r, f) for f in RECORD_FIELDS) for r in records]
    _write_text(opts["out"], _csv_text(RECORD_FIELDS, rows))
    _write_manifest(opts["out"], "sweep", config.resolved(), config.base_seed, threads, start)
    return 0


def _parse_param_pairs(values) -> list[tuple[float, int]]:
    pairs = []
    for item in _split(values):
        try:
            a, c = item.split(":")
            MicParams(alpha=float(a), c=int(c))
            pairs.append((float(a), int(c)))
        except ValueError:
            raise CliError(f"params: expected alpha:c, got {item!r}", EXIT_CONFIG) from None
    return pairs


def cmd_bench(args) -> int:
    start = _now()
    opts = _merged(args, {
        "sizes": ",".join(map(str, BENCH_SIZES)), "params": "0.6:15,0.55:5",
        "functions": ",".join(BENCH_FUNCTIONS), "levels": 10, "seed": 0, "repeats": 1,
        "threads": 1, "out": "timings.csv",
    })
    try:
        sizes = [int(s) for s in _split([opts["sizes"]])]
        suite = [get_function(f) for f in _split([opts["functions"]])]
    except (ValueError, KeyError) as exc:
        raise CliError(f"invalid bench configuration: {exc}", EXIT_CONFIG) from None
    if not sizes or any(s < 20 for s in sizes):
        raise CliError("sizes: need at least one size, each >= 20", EXIT_CONFIG)
    pairs = _parse_param_pairs([opts["params"]])
    if not pairs:
        raise CliError("params: need at least one alpha:c pair", EXIT_CONFIG)
    rows = runtime_benchmark(sizes, suite, pairs, levels=int(opts["levels"]),
                             seed=int(opts["seed"]), repeats=int(opts["repeats"]))
    header = ("n", "function", "alpha", "c", "mean_ms", "runs")
    _write_text(opts["out"], _csv_text(header, [(r.n, r.function, r.alpha, r.c, r.mean_ms, r.runs)
                                                for r in rows]))
    if opts["out"] not in (None, "-"):
        sys.stdout.write(_pivot(rows))
    config = {k: opts[k] for k in ("sizes", "params", "functions", "levels", "seed", "repeats")}
    _write_manifest(opts["out"], "bench", config, int(opts["seed"]), int(opts["threads"]), start)
    return 0


def _pivot(rows) -> str:
    """Run-time table: one block per parameter pair, sizes down, functions across."""
    lines = []
    funcs = list(dict.fromkeys(r.function for r in rows))
    for alpha, c in dict.fromkeys((r.alpha, r.c) for r in rows):
        lines.append(f"alpha={alpha} c={c} (mean ms)")
        lines.append("n\t" + "\t".join(funcs))
        for n in dict.fromkeys(r.n for r in rows):
            cells = {r.function: r.mean_ms for r in rows if r.n == n and (r.alpha, r.c) == (alpha, c)}
            lines.append(f"{n}\t" + "\t".join(f"{cells[f]:.0f}" for f in funcs))
        lines.append("")
    return "\n".join(lines)


def cmd_gen(args) -> int:
    if (args.function is None) == (args.dalpha is None):
        raise CliError("give exactly one of --function or --dalpha", EXIT_CONFIG)
    if args.n < 2:
        raise CliError("n must be at least 2", EXIT_CONFIG)
    note = None
    if args.dalpha is not None:
        try:
            x, y = sample_d_alpha(args.dalpha, args.n, args.seed, args.weighting)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_CONFIG) from None
    else:
        try:
            spec = get_function(args.function)
        except KeyError:
            names = ", ".join(s.slug for s in FUNCTIONS)
            raise CliError(f"unknown function {args.function!r}; valid names: {names}",
                           EXIT_CONFIG) from None
        if args.model < 1 or args.model > 6:
            raise CliError("model must be 1..6", EXIT_CONFIG)
        suite = {s.slug: s for s in function_suite(args.model, exclude=())}
        spec = suite[spec.slug]
        width = args.width
        if args.target_r2 is not None:
            if not 0.0 <= args.target_r2 <= 1.0:
                raise CliError("target R^2 must lie in [0, 1]", EXIT_CONFIG)
            width, achieved, flag = calibrate_width(spec, args.model, args.n, args.target_r2,
                                                    seed=args.seed)
            note = f"width={fmt(width)} pilot_r2={fmt(achieved)}" + (f" flag={flag}" if flag else "")
        if width is None or width < 0:
            raise CliError("give --width >= 0 or --target-r2", EXIT_CONFIG)
        x, y = generate(spec, args.model, args.n, width, args.seed)
    _write_text(args.out, _csv_text(("x", "y"), zip(map(float, x), map(float, y))))
    if note:
        (sys.stderr if args.out in (None, "-") else sys.stdout).write(note + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="equit", description=(
        "MIC, its ablations, comparator dependence measures and equitability benchmarks."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def mic_flags(sp):
        sp.add_argument("--alpha", type=float, help="exponent of B(n) = n^alpha (default 0.6)")
        sp.add_argument("--c", type=int, help="superclump factor (default 15)")
        sp.add_argument("--b", type=float, help="fixed grid budget replacing n^alpha")
        sp.add_argument("--k", type=int, help="Kraskov neighbor count for 'mi' (default 6)")

    sp = sub.add_parser("score", help="score a two-column CSV dataset")
    sp.add_argument("input")
    sp.add_argument("--stat", "--stats", dest="stats", action="append",
                    help="mic, mic1, mic2, mic3, mice, mi, mi<k>, dcor, pearson (repeatable or comma list)")
    mic_flags(sp)
    sp.add_argument("--out", help="output CSV (default stdout)")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("sweep", help="run an equitability sweep")
    sp.add_argument("--stats", "--stat", dest="stats")
    sp.add_argument("--model", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--levels", type=int)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--pilot-reps", dest="pilot_reps", type=int)
    sp.add_argument("--functions", help="comma list of function slugs (default: model's suite)")
    sp.add_argument("--timings", action="store_const", const=True,
                    help="fill elapsed_ms (makes output non-reproducible)")
    mic_flags(sp)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bench", help="time MIC across sizes and parameters")
    sp.add_argument("--sizes")
    sp.add_argument("--params", help="comma list of alpha:c pairs")
    sp.add_argument("--functions")
    sp.add_argument("--levels", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gen", help="generate a synthetic dataset")
    sp.add_argument("--function")
    sp.add_argument("--dalpha", type=float)
    sp.add_argument("--weighting", choices=("mass", "area"), default="mass")
    sp.add_argument("--model", type=int, default=1)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--width", type=float)
    sp.add_argument("--target-r2", dest="target_r2", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"equit: error: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
