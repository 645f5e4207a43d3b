import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equit.core import binary_entropy
from equit.mic import (AxisPartition, GridSizeError, MicParams, MicVariant, characteristic_matrix,
                       clump_partition, equipartition_axis, exact_max_grid_info, mic,
                       mic_exhaustive_low_rows, mic_variant, optimize_columns,
                       superclump_partition)
from equit.suite import generate, get_function, noise_schedule, sample_d_alpha
from oracles import (best_columns_by_enumeration, contiguous_partitions, cumulative_deviation,
                     size_deviation)

FAST = MicParams(alpha=0.55, c=5)


# --- axis partitions ------------------------------------------------------

def test_equipartition_even_split():
    assert equipartition_axis(np.arange(6.0), 3).sizes == [2, 2, 2]


def test_equipartition_keeps_tie_group_whole():
    assert equipartition_axis([1, 1, 1, 2], 2).sizes == [3, 1]


def test_equipartition_seven_into_three_is_deviation_minimal():
    p = equipartition_axis(np.arange(7.0), 3)
    assert sorted(p.sizes) == [2, 2, 3]
    candidates = list(contiguous_partitions([1] * 7, 3))
    for measure in (cumulative_deviation, size_deviation):
        best = min(measure(b, 3) for b in candidates)
        assert measure(p.boundaries, 3) == pytest.approx(best)


def test_equipartition_too_few_distinct_values():
    p = equipartition_axis([0, 0, 1, 1, 1], 4)
    assert p.sizes == [2, 3]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=1, max_size=60), st.integers(1, 12))
def test_equipartition_structure(values, k):
    v = np.sort(np.array(values, dtype=float))
    p = equipartition_axis(v, k)
    assert p.n == v.size
    assert p.nbins == min(k, np.unique(v).size)
    # no tie group straddles a boundary
    for b in p.boundaries[:-1]:
        assert v[b - 1] != v[b]


@pytest.mark.parametrize("xs, bounds", [
    ([1, 1, 2, 3, 3], (2, 3, 5)),
    ([5, 4, 3, 2, 1], (1, 2, 3, 4, 5)),
    ([7, 7, 7], (3,)),
])
def test_clump_partition(xs, bounds):
    assert clump_partition(xs).boundaries == bounds


def test_superclump_unchanged_below_limit():
    clumps = AxisPartition((1, 3, 4, 6))
    assert superclump_partition(clumps, 10) == clumps


def test_superclump_singletons():
    clumps = AxisPartition(tuple(range(1, 11)))
    assert superclump_partition(clumps, 5).sizes == [2, 2, 2, 2, 2]


def test_superclump_uneven_clumps_deviation_minimal():
    sizes = [1, 4, 1, 1, 2, 1, 3]
    clumps = AxisPartition(tuple(np.cumsum(sizes)))
    merged = superclump_partition(clumps, 3)
    assert merged.n == 13 and merged.nbins == 3
    assert set(merged.boundaries) <= set(clumps.boundaries)
    candidates = list(contiguous_partitions(sizes, 3))
    for measure in (cumulative_deviation, size_deviation):
        best = min(measure(b, 3) for b in candidates)
        assert measure(merged.boundaries, 3) == pytest.approx(best)


def test_axis_partition_validates():
    with pytest.raises(ValueError):
        AxisPartition((2, 2, 5))
    with pytest.raises(ValueError):
        AxisPartition(())


# --- column optimization ---------------------------------------------------

def test_optimize_columns_perfect_split():
    x = np.array([1.0, 2, 3, 4])
    y = np.array([1.0, 1, 2, 2])
    rows = equipartition_axis(y, 2)
    out = optimize_columns(x, y, rows, 2, clump_partition(x))
    assert out[2] == pytest.approx(1.0, abs=1e-12)


def test_optimize_columns_independent_rows():
    x = np.arange(1.0, 9.0)
    y = np.array([0.0, 1] * 4)
    rows = equipartition_axis(y, 2)
    out = optimize_columns(x, y, rows, 2, AxisPartition((2, 4, 6, 8)))
    assert out[2] == pytest.approx(0.0, abs=1e-12)


def test_optimize_columns_degenerate_master():
    x = np.ones(6)
    y = np.arange(6.0)
    out = optimize_columns(x, y, equipartition_axis(y, 2), 4)
    assert np.all(out == 0.0)


def test_optimize_columns_matches_enumeration_random20():
    rng = np.random.default_rng(20)
    x, y = rng.random(20), rng.random(20)
    rows = equipartition_axis(np.sort(y), 3)
    labels = np.empty(20, dtype=int)
    labels[np.argsort(y, kind="stable")] = rows.labels()
    master = clump_partition(x)
    got = optimize_columns(x, y, rows, 4, master)
    want = best_columns_by_enumeration(x, y, labels, master.boundaries, 4)
    for cols in range(2, 5):
        assert got[cols] == pytest.approx(want[cols], abs=1e-12)


def test_optimize_columns_restricted_exactness_many():
    rng = np.random.default_rng(123)
    for _ in range(60):
        n = int(rng.integers(6, 31))
        x = rng.integers(0, 15, n).astype(float)
        y = rng.random(n)
        nrows = int(rng.integers(2, 5))
        rows = equipartition_axis(np.sort(y), nrows)
        labels = np.empty(n, dtype=int)
        labels[np.argsort(y, kind="stable")] = rows.labels()
        master = superclump_partition(clump_partition(x), 12)
        got = optimize_columns(x, y, rows, 5, master)
        want = best_columns_by_enumeration(x, y, labels, master.boundaries, 5)
        for cols in range(2, 6):
            assert abs(got[cols] - want[cols]) <= 1e-12


# --- characteristic matrix and MIC -----------------------------------------

def test_characteristic_matrix_range_and_admissibility():
    rng = np.random.default_rng(3)
    x, y = rng.random(300), rng.random(300)
    cm = characteristic_matrix(x, y)
    budget = 300 ** 0.6
    for (cols, rows), v in cm.as_dict().items():
        assert cols >= 2 and rows >= 2 and cols * rows <= budget
        assert 0.0 <= v <= 1.0
    assert cm.max() == mic(x, y)


def test_characteristic_matrix_noiseless_line():
    x = np.linspace(0, 1, 1000)
    assert characteristic_matrix(x, x).value(2, 2) >= 0.99


def test_characteristic_matrix_null_ceiling():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        worst = max(worst, characteristic_matrix(rng.random(1000), rng.random(1000)).max())
    assert worst <= 0.25


def test_characteristic_matrix_rejects_small_inputs():
    with pytest.raises(ValueError):
        characteristic_matrix([0, 1, 2], [0, 1, 2])
    with pytest.raises(ValueError):
        characteristic_matrix(np.arange(10.0), np.arange(10.0), MicParams(b_override=3))


def test_mic_constant_y_is_zero():
    x = np.linspace(0, 1, 200)
    assert mic(x, np.full(200, 3.0)) == 0.0


def test_mic_noiseless_line():
    x = np.linspace(0, 1, 1000)
    assert mic(x, x) >= 0.99


def test_mic_d_half_is_binary_entropy():
    x, y = sample_d_alpha(0.5, 10_000, seed=2)
    assert mic(x, y, FAST) == pytest.approx(binary_entropy(0.5), abs=0.05)


def test_mic_symmetric_and_rank_invariant():
    rng = np.random.default_rng(9)
    x = rng.random(400) + 0.1
    y = np.sin(6 * x) + 0.3 * rng.random(400)
    base = mic(x, y)
    assert mic(y, x) == pytest.approx(base, abs=1e-12)
    assert mic(x ** 3, np.exp(y)) == pytest.approx(base, abs=1e-12)


def test_mic_budget_monotone():
    rng = np.random.default_rng(4)
    x = rng.random(200)
    y = x ** 2 + 0.2 * rng.random(200)
    scores = [mic(x, y, MicParams(b_override=b)) for b in (4, 6, 9, 12, 20, 30)]
    assert all(b >= a - 1e-12 for a, b in zip(scores, scores[1:]))


# --- variants --------------------------------------------------------------

def _noiseless(slug, n=1000):
    spec = get_function(slug)
    return generate(spec, 1, n, 0.0, seed=0)


def test_mic2_sinusoid_capped_near_one_bit():
    x, y = _noiseless("sine_high")
    assert mic_variant(x, y, variant="MIC2") <= 1.1


def test_mic2_line_beats_sinusoid():
    line = mic_variant(*_noiseless("line"), variant=MicVariant.MIC2)
    sine = mic_variant(*_noiseless("sine_high"), variant=MicVariant.MIC2)
    assert line - sine >= 0.5


def test_variant_orderings():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(30, 200))
        x = rng.random(n)
        y = rng.random(n) * 0.5 + np.cos(4 * x)
        v = {m: mic_variant(x, y, variant=m) for m in MicVariant if m != MicVariant.MIC_EXHAUSTIVE}
        assert v[MicVariant.MIC] <= v[MicVariant.MIC2] + 1e-12
        assert v[MicVariant.MIC1] <= v[MicVariant.MIC3] + 1e-12
        assert 0.0 <= v[MicVariant.MIC1] <= 1.0


def test_variant_ranges_bounded_by_log_min_dimension():
    rng = np.random.default_rng(8)
    x = rng.random(500)
    budget = 500 ** 0.6
    cap = max(math.log2(min(c, budget // c)) for c in range(2, int(budget // 2) + 1))
    for v in ("MIC2", "MIC3"):
        assert 0.0 <= mic_variant(x, x, variant=v) <= cap + 1e-12


# --- exhaustive low-row refinement ------------------------------------------

def test_exhaustive_low_rows_range_and_line():
    x, y = _noiseless("line")
    e = mic_exhaustive_low_rows(x, y)
    assert 0.0 <= e <= 1.0
    assert abs(e - mic(x, y)) <= 0.01


def test_exhaustive_low_rows_requires_twenty_points():
    with pytest.raises(ValueError):
        mic_exhaustive_low_rows(np.arange(19.0), np.arange(19.0))


def test_exhaustive_low_rows_never_below_mic():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.random(120)
        y = np.sin(9 * x) + rng.random(120)
        assert mic_exhaustive_low_rows(x, y, FAST) >= mic(x, y, FAST) - 1e-12


@pytest.mark.slow
def test_exhaustive_low_rows_varying_sine_model4():
    spec = get_function("vf_sine")
    width = noise_schedule(spec, 4, 5000, levels=10, seed=0)[5]
    diffs = []
    for seed in range(10):
        x, y = generate(spec, 4, 5000, width, seed=seed)
        diffs.append(mic_exhaustive_low_rows(x, y, FAST) - mic(x, y, FAST))
    assert min(diffs) >= -1e-12


# --- brute-force oracle -----------------------------------------------------

def test_exact_perfect_square():
    x = np.array([1.0, 2, 3, 4])
    y = np.array([1.0, 1, 2, 2])
    assert exact_max_grid_info(x, y, 2, 2) == pytest.approx(1.0, abs=1e-12)


def test_exact_bounded_by_log_min():
    rng = np.random.default_rng(6)
    for _ in range(20):
        x, y = rng.random(12), rng.random(12)
        for cols, rows in [(2, 3), (3, 3), (4, 2)]:
            assert exact_max_grid_info(x, y, cols, rows) <= math.log2(min(cols, rows)) + 1e-12


def test_exact_dominates_dp():
    rng = np.random.default_rng(7)
    x, y = rng.random(20), rng.random(20)
    cm = characteristic_matrix(x, y, MicParams(b_override=9))
    assert cm.info[3, 3] <= exact_max_grid_info(x, y, 3, 3) + 1e-12


def test_exact_matches_brute_table_enumeration():
    # independent check: place cuts at midpoints of distinct values, all subsets
    from itertools import combinations

    from oracles import grid_table
    from equit.core import mutual_information
    rng = np.random.default_rng(17)
    x = rng.integers(0, 6, 14).astype(float)
    y = rng.integers(0, 6, 14).astype(float)
    ux, uy = np.unique(x), np.unique(y)
    mx, my = (ux[1:] + ux[:-1]) / 2, (uy[1:] + uy[:-1]) / 2
    best = 0.0
    for kx in range(0, 3):
        for cx in combinations(mx, kx):
            for ky in range(0, 2):
                for cy in combinations(my, ky):
                    best = max(best, mutual_information(grid_table(x, y, cx, cy)))
    assert exact_max_grid_info(x, y, 3, 2) == pytest.approx(best, abs=1e-12)


def test_exact_ceiling():
    with pytest.raises(GridSizeError):
        exact_max_grid_info(np.arange(41.0), np.arange(41.0), 2, 2)
