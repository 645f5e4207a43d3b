"""Equitability sweeps, equitability-gap summaries and runtime benchmarks.

Seeding
-------
Every trial seed is ``SeedSequence([base_seed, function_index, level,
replicate]).generate_state(1, uint64)[0]`` and feeds a PCG64 generator, so a
sweep is a pure function of its configuration regardless of how trials are
scheduled across workers.
"""
from __future__ import annotations

import math
import os
import re
import statistics
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import pearson_squared, r_squared_vs_function
from .estimators import KraskovParams, distance_correlation, mi_linfoot_score
from .mic import MicParams, MicVariant, characteristic_matrix, mic_variant
from .suite import FunctionSpec, NoiseModel, function_suite, generate, noise_schedule

#: Tag mixed into calibration seeds so they never collide with trial seeds.
_CALIBRATION_TAG = 0xCA11B


def mix_seed(*parts: int) -> int:
    """Combine non-negative integers into one 64-bit seed."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Statistic:
    """A named dependence measure ``fn(x, y, seed) -> score``."""

    id: str
    fn: Callable[[np.ndarray, np.ndarray, int], float]
    min_n: int = 2
    description: str = ""

    def __call__(self, x, y, seed: int = 0) -> float:
        if len(x) < self.min_n:
            raise ValueError(f"{self.id} needs n >= {self.min_n}, got {len(x)}")
        return self.fn(x, y, seed)


class _MicStat:
    def __init__(self, params: MicParams, variant: MicVariant):
        self.params = params
        self.variant = variant

    def __call__(self, x, y, seed):
        return mic_variant(x, y, self.params, self.variant)


class _MiStat:
    def __init__(self, k: int):
        self.k = k

    def __call__(self, x, y, seed):
        return mi_linfoot_score(x, y, KraskovParams(k=self.k, seed=seed))


def _dcor(x, y, seed):
    return distance_correlation(x, y)


def _pearson(x, y, seed):
    return pearson_squared(x, y)


_MIC_IDS = {
    "mic": MicVariant.MIC,
    "mic1": MicVariant.MIC1,
    "mic2": MicVariant.MIC2,
    "mic3": MicVariant.MIC3,
    "mice": MicVariant.MIC_EXHAUSTIVE,
}


def make_statistic(name: str, mic_params: MicParams | None = None, k: int = 6) -> Statistic:
    """Build a statistic from its id.

    Ids: ``mic``, ``mic1``, ``mic2``, ``mic3``, ``mice`` (exhaustive low-row
    refinement), ``mi`` (Kraskov with ``k``), ``mi<k>`` such as ``mi6``,
    ``dcor`` and ``pearson``.
    """
    name = name.strip().lower()
    params = mic_params or MicParams()
    if name in _MIC_IDS:
        variant = _MIC_IDS[name]
        min_n = 20 if variant is MicVariant.MIC_EXHAUSTIVE else 4
        desc = f"alpha={params.alpha} c={params.c}"
        if params.b_override is not None:
            desc += f" b={params.b_override}"
        return Statistic(name, _MicStat(params, variant), min_n, desc)
    m = re.fullmatch(r"mi(\d*)", name)
    if m:
        kk = int(m.group(1)) if m.group(1) else k
        if kk < 1:
            raise ValueError("k must be positive")
        return Statistic(f"mi{kk}", _MiStat(kk), kk + 1, f"k={kk}")
    if name == "dcor":
        return Statistic("dcor", _dcor)
    if name == "pearson":
        return Statistic("pearson", _pearson)
    raise ValueError(f"unknown statistic {name!r}")


@dataclass
class SweepConfig:
    statistics: tuple[str, ...]
    noise_model: int
    n: int
    levels: int = 10
    replicates: int = 1
    base_seed: int = 0
    mic_params: MicParams = field(default_factory=MicParams)
    k: int = 6
    suite: Sequence[FunctionSpec] | None = None
    pilot_reps: int = 3
    record_timings: bool = False

    def __post_init__(self):
        if not self.statistics:
            raise ValueError("statistics: at least one statistic is required")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.n < 20:
            raise ValueError("n must be at least 20")
        self.model = NoiseModel.from_id(self.noise_model)
        for s in self.statistics:
            make_statistic(s, self.mic_params, self.k)
        if self.suite is None:
            self.suite = function_suite(self.model)

    def resolved(self) -> dict:
        """JSON-ready description, enough to rerun the sweep."""
        return {
            "statistics": list(self.statistics),
            "noise_model": self.noise_model,
            "n": self.n,
            "levels": self.levels,
            "replicates": self.replicates,
            "base_seed": self.base_seed,
            "alpha": self.mic_params.alpha,
            "c": self.mic_params.c,
            "b": self.mic_params.b_override,
            "k": self.k,
            "pilot_reps": self.pilot_reps,
            "record_timings": self.record_timings,
            "suite": [s.name for s in self.suite],
        }


@dataclass
class TrialRecord:
    statistic: str
    function: str
    model: int
    n: int
    level: int
    width: float
    replicate: int
    seed: int
    score: float
    r_squared: float
    elapsed_ms: float | None = None
    flag: str = ""


RECORD_FIELDS = ("statistic", "function", "model", "n", "level", "width", "replicate",
                 "seed", "score", "r_squared", "elapsed_ms", "flag")


def _run_trial(args) -> list[TrialRecord]:
    config, fidx, spec, level, width, rep, sched_flag = args
    seed = mix_seed(config.base_seed, fidx, level, rep)
    x, y = generate(spec, config.model, config.n, width, seed)
    r2 = r_squared_vs_function(x, y, spec)
    out = []
    for name in config.statistics:
        stat = make_statistic(name, config.mic_params, config.k)
        flag = sched_flag
        t0 = time.perf_counter()
        try:
            score = float(stat(x, y, seed))
        except ValueError as exc:
            score = math.nan
            flag = f"error: {exc}"
        elapsed = (time.perf_counter() - t0) * 1e3 if config.record_timings else None
        out.append(TrialRecord(stat.id, spec.name, config.model.id, config.n, level, width,
                               rep, seed, score, r2, elapsed, flag))
    return out


def run_sweep(config: SweepConfig, threads: int = 1) -> list[TrialRecord]:
    """Score every configured statistic on every (function, level, replicate).

    Records come back ordered by function, level, replicate, then statistic,
    independent of ``threads``.
    """
    tasks = []
    for fidx, spec in enumerate(config.suite):
        sched = noise_schedule(spec, config.model, config.n, config.levels, config.pilot_reps,
                               seed=mix_seed(config.base_seed, _CALIBRATION_TAG, fidx))
        for level, width in enumerate(sched.widths):
            for rep in range(config.replicates):
                tasks.append((config, fidx, spec, level, width, rep, sched.flags[level]))
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * threads)))
            return [r for chunk in chunks for r in chunk]
    return [r for task in tasks for r in _run_trial(task)]


# --------------------------------------------------------------------------
# Equitability gap
# --------------------------------------------------------------------------

@dataclass
class GapBin:
    lo: float
    hi: float
    count: int
    types: int
    min_score: float
    max_score: float

    @property
    def gap(self) -> float:
        return self.max_score - self.min_score


@dataclass
class GapSummary:
    statistic: str
    gap: float | None
    worst_bin: GapBin | None
    profile: list[GapBin]
    flag: str = ""


def equitability_gap(records: Iterable[TrialRecord],
                     bin_width: float = 0.1) -> dict[str, GapSummary]:
    """Largest score spread among relationship types at matched R^2.

    Records are binned by R^2 (``[0, w), [w, 2w), ...``, with R^2 = 1 in the
    top bin). Within a bin the gap is max score minus min score; the summary
    is the largest gap over bins holding at least two function types.
    Failed trials (NaN score) are ignored.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    nbins = max(1, math.ceil(1.0 / bin_width - 1e-9))
    groups: dict[str, dict[int, list[TrialRecord]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        if math.isnan(r.score):
            continue
        b = min(int(math.floor(r.r_squared / bin_width)), nbins - 1)
        groups[r.statistic][max(b, 0)].append(r)

    out = {}
    for stat in sorted(groups):
        profile = []
        for b in sorted(groups[stat]):
            recs = groups[stat][b]
            scores = [r.score for r in recs]
            profile.append(GapBin(b * bin_width, (b + 1) * bin_width, len(recs),
                                  len({r.function for r in recs}), min(scores), max(scores)))
        eligible = [p for p in profile if p.types >= 2]
        if eligible:
            worst = max(eligible, key=lambda p: p.gap)
            out[stat] = GapSummary(stat, worst.gap, worst, profile)
        else:
            out[stat] = GapSummary(stat, None, None, profile,
                                   "no R^2 bin holds two function types; within-type spread only")
    return out


# --------------------------------------------------------------------------
# Runtime benchmark
# --------------------------------------------------------------------------

@dataclass
class TimingRow:
    n: int
    function: str
    alpha: float
    c: int
    mean_ms: float
    runs: int


def time_mic(x, y, params: MicParams) -> float:
    """Wall-clock milliseconds for one characteristic matrix plus its maximum."""
    t0 = time.perf_counter()
    characteristic_matrix(x, y, params).max()
    return (time.perf_counter() - t0) * 1e3


def runtime_benchmark(sizes: Sequence[int], suite: Sequence[FunctionSpec],
                      param_pairs: Sequence[tuple[float, int]], levels: int = 10,
                      seed: int = 0, repeats: int = 1) -> list[TimingRow]:
    """Mean MIC run time over a noise-model-1 schedule of ``levels`` widths.

    The datasets are deterministic; only the timings vary between runs.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    rows = []
    for n in sizes:
        for fidx, spec in enumerate(suite):
            sched = noise_schedule(spec, 1, n, levels, seed=mix_seed(seed, _CALIBRATION_TAG, fidx))
            data = [generate(spec, 1, n, w, mix_seed(seed, fidx, lvl, 0))
                    for lvl, w in enumerate(sched.widths)]
            for alpha, c in param_pairs:
                params = MicParams(alpha=alpha, c=int(c))
                times = [time_mic(x, y, params) for _ in range(repeats) for x, y in data]
                rows.append(TimingRow(n, spec.name, alpha, int(c), statistics.fmean(times),
                                      len(times)))
    return rows


def default_threads() -> int:
    env = os.environ.get("EQUIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
