import math
import random

import numpy as np
import pytest

from equit.harness import (SweepConfig, TrialRecord, equitability_gap, make_statistic, mix_seed,
                           run_sweep, runtime_benchmark)
from equit.mic import MicParams
from equit.suite import get_function

FAST = MicParams(alpha=0.55, c=5)
SMALL_SUITE = [get_function(s) for s in ("line", "parabola", "sine_low", "random")]


def _config(**kw):
    base = dict(statistics=("mic", "mi6", "dcor", "pearson"), noise_model=1, n=100, levels=3,
                replicates=2, base_seed=7, mic_params=FAST, suite=SMALL_SUITE)
    base.update(kw)
    return SweepConfig(**base)


def test_mix_seed_stable_and_distinct():
    assert mix_seed(1, 2, 3, 4) == mix_seed(1, 2, 3, 4)
    assert len({mix_seed(0, f, l, r) for f in range(5) for l in range(5) for r in range(5)}) == 125
    assert 0 <= mix_seed(2 ** 63, 1) < 2 ** 64


def test_make_statistic_ids():
    assert make_statistic("mi").id == "mi6"
    assert make_statistic("MI1").id == "mi1"
    assert make_statistic("mice").min_n == 20
    with pytest.raises(ValueError):
        make_statistic("tic")


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        _config(n=10)
    with pytest.raises(ValueError):
        _config(levels=0)
    with pytest.raises(ValueError):
        _config(statistics=("mic", "bogus"))
    with pytest.raises(ValueError):
        _config(noise_model=7)


def test_sweep_record_count_order_and_ranges():
    cfg = _config()
    recs = run_sweep(cfg)
    assert len(recs) == 4 * len(SMALL_SUITE) * 3 * 2
    keys = [(SMALL_SUITE.index(get_function(r.function)), r.level, r.replicate) for r in recs]
    assert keys == sorted(keys)
    for r in recs:
        assert 0.0 <= r.r_squared <= 1.0
        if r.statistic in ("mic", "dcor", "pearson"):
            assert 0.0 <= r.score <= 1.0
        else:
            assert 0.0 <= r.score < 1.0
        if r.level == 0 and r.function != "Random":
            assert r.r_squared == 1.0 and r.width == 0.0
        assert r.elapsed_ms is None


def test_sweep_deterministic_and_thread_independent():
    a = run_sweep(_config())
    b = run_sweep(_config())
    c = run_sweep(_config(), threads=2)
    assert a == b
    assert [(r.statistic, r.seed, r.score) for r in a] == [(r.statistic, r.seed, r.score) for r in c]


def test_sweep_per_record_errors():
    recs = run_sweep(_config(statistics=("mic", "mi30"), n=20, levels=1, replicates=1))
    bad = [r for r in recs if r.statistic == "mi30"]
    good = [r for r in recs if r.statistic == "mic"]
    assert bad and all(math.isnan(r.score) and r.flag.startswith("error") for r in bad)
    assert good and all(not math.isnan(r.score) for r in good)


def test_sweep_timings_recorded_on_request():
    recs = run_sweep(_config(statistics=("pearson",), levels=1, replicates=1, record_timings=True))
    assert all(r.elapsed_ms is not None and r.elapsed_ms >= 0 for r in recs)


def _rec(stat, fn, r2, score):
    return TrialRecord(stat, fn, 1, 100, 0, 0.0, 0, 0, score, r2)


def test_gap_perfectly_equitable_statistic():
    rng = np.random.default_rng(0)
    recs = [_rec("s", f"f{i % 5}", r2, r2) for i, r2 in enumerate(rng.random(500))]
    summary = equitability_gap(recs)["s"]
    assert summary.gap is not None and summary.gap <= 0.1
    assert all(b.gap <= 0.1 for b in summary.profile)


def test_gap_single_type_is_flagged():
    recs = [_rec("s", "only", r2, 1 - r2) for r2 in np.linspace(0, 1, 50)]
    summary = equitability_gap(recs)["s"]
    assert summary.gap is None and summary.flag
    assert summary.profile


def test_gap_known_value_and_shuffle_invariance():
    recs = [_rec("s", "a", 0.55, 0.2), _rec("s", "b", 0.52, 0.9), _rec("s", "a", 0.15, 0.1),
            _rec("s", "a", 0.12, 0.95), _rec("s", "c", 1.0, 1.0), _rec("s", "d", 0.999, 0.4),
            _rec("s", "e", 0.3, math.nan)]
    summary = equitability_gap(recs)["s"]
    assert summary.gap == pytest.approx(0.7)
    assert summary.worst_bin.lo == pytest.approx(0.5)
    for seed in range(5):
        shuffled = recs[:]
        random.Random(seed).shuffle(shuffled)
        assert equitability_gap(shuffled)["s"].gap == summary.gap


def test_gap_rejects_bad_bin_width():
    with pytest.raises(ValueError):
        equitability_gap([], bin_width=0)


def test_runtime_benchmark_rows():
    rows = runtime_benchmark([50, 80], SMALL_SUITE[:2], [(0.55, 5), (0.6, 15)], levels=2)
    assert len(rows) == 2 * 2 * 2
    assert all(r.mean_ms > 0 and r.runs == 2 for r in rows)
    assert {(r.alpha, r.c) for r in rows} == {(0.55, 5), (0.6, 15)}
    with pytest.raises(ValueError):
        runtime_benchmark([], SMALL_SUITE, [(0.6, 15)])


@pytest.mark.slow
def test_runtime_grows_with_n():
    line = [get_function("line")]
    medians = []
    for n in (250, 1000, 4000):
        runs = [runtime_benchmark([n], line, [(0.6, 15)], levels=2)[0].mean_ms for _ in range(3)]
        medians.append(np.median(runs))
    assert medians[0] <= medians[1] <= medians[2]
