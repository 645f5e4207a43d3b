import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from equit.core import (binary_entropy, entropy, linfoot_squared, mutual_information,
                        pearson_squared, r_squared_vs_function)
from equit.suite import function_suite, generate, get_function


@pytest.mark.parametrize("dist, expected", [
    ([0.25, 0.25, 0.25, 0.25], 2.0),
    ([1.0], 0.0),
    ([0.5, 0.25, 0.25], 1.5),
    ([0.5, 0.0, 0.5], 1.0),
])
def test_entropy_examples(dist, expected):
    assert entropy(dist) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], []])
def test_entropy_rejects_invalid(bad):
    with pytest.raises(ValueError):
        entropy(bad)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=12).filter(lambda w: sum(w) > 0.1),
       st.randoms())
def test_entropy_permutation_invariant_and_bounded(weights, rnd):
    p = np.array(weights) / sum(weights)
    h = entropy(p)
    q = list(p)
    rnd.shuffle(q)
    assert entropy(q) == pytest.approx(h, abs=1e-12)
    assert 0.0 <= h <= math.log2(len(p)) + 1e-12


@pytest.mark.parametrize("table, expected", [
    ([[1, 0], [0, 1]], 1.0),
    ([[1, 1], [1, 1]], 0.0),
    (np.diag([2, 2, 2]), math.log2(3)),
])
def test_mutual_information_examples(table, expected):
    assert mutual_information(table) == pytest.approx(expected, abs=1e-12)


def test_mutual_information_rejects_empty():
    with pytest.raises(ValueError):
        mutual_information([[0, 0], [0, 0]])


def test_mutual_information_bounds():
    rng = np.random.default_rng(11)
    for _ in range(300):
        r, c = rng.integers(1, 6, size=2)
        t = rng.integers(0, 5, size=(r, c))
        if t.sum() == 0:
            continue
        mi = mutual_information(t)
        h_rows = entropy(t.sum(1) / t.sum())
        h_cols = entropy(t.sum(0) / t.sum())
        assert -1e-12 <= mi <= min(h_rows, h_cols) + 1e-12
        assert min(h_rows, h_cols) <= math.log2(min(r, c)) + 1e-12


def test_pearson_affine_and_symmetric():
    xs = np.linspace(-3, 5, 41)
    assert pearson_squared(xs, 2 * xs + 1) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(0, 1, 101)
    assert pearson_squared(xs, np.abs(xs - 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_pearson_constant_coordinate_is_zero():
    assert pearson_squared([1, 2, 3], [4, 4, 4]) == 0.0
    with pytest.raises(ValueError):
        pearson_squared([1.0], [2.0])


def test_pearson_sine_matches_integral():
    # population r^2 of (X, sin 8 pi X), X ~ U[0, 1], by quadrature
    cov = integrate.quad(lambda t: (t - 0.5) * math.sin(8 * math.pi * t), 0, 1, limit=200)[0]
    var_s = integrate.quad(lambda t: math.sin(8 * math.pi * t) ** 2, 0, 1, limit=200)[0]
    oracle = cov ** 2 / ((1 / 12) * var_s)
    xs = np.linspace(0, 1, 10_000)
    assert pearson_squared(xs, np.sin(8 * np.pi * xs)) == pytest.approx(oracle, abs=1e-3)
    assert oracle == pytest.approx(0.0380, abs=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(-10, -0.1), st.floats(-5, 5),
       st.integers(0, 2 ** 32 - 1))
def test_pearson_affine_invariance(a, b, c, d, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=50)
    y = x + rng.normal(size=50)
    assert pearson_squared(a * x + b, c * y + d) == pytest.approx(pearson_squared(x, y), abs=1e-9)


def test_r_squared_noiseless_suite_is_one():
    for model in (1, 4):
        for spec in function_suite(model):
            x, y = generate(spec, model, 200, 0.0, seed=1)
            expected = 0.0 if spec.is_random else 1.0
            assert r_squared_vs_function(x, y, spec) == expected, spec.name


def test_r_squared_line_uniform_noise_matches_variance_ratio():
    line = get_function("line")
    n, w = 100_000, 0.4
    x, y = generate(line, 1, n, w, seed=5)
    var_f = np.var(np.linspace(0, 1, n))
    analytic = var_f / (var_f + w ** 2 / 3)
    assert r_squared_vs_function(x, y, line) == pytest.approx(analytic, abs=0.01)


def test_r_squared_clamps_horizontal_noise():
    par = get_function("parabola")
    x = np.array([-0.9, -0.2, 0.1, 0.7])
    y = 4 * np.clip(x, -0.5, 0.5) ** 2
    assert r_squared_vs_function(x, y, par) == pytest.approx(1.0)


@pytest.mark.parametrize("info, expected", [(0.0, 0.0), (1.0, 0.75), (0.5, 0.5)])
def test_linfoot_examples(info, expected):
    assert linfoot_squared(info) == pytest.approx(expected, abs=1e-15)


def test_linfoot_rejects_negative():
    with pytest.raises(ValueError):
        linfoot_squared(-0.01)


@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
def test_linfoot_of_gaussian_mi_is_rho_squared(rho):
    gaussian_mi = -0.5 * math.log2(1 - rho ** 2)
    assert linfoot_squared(gaussian_mi) == pytest.approx(rho ** 2, abs=1e-14)


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    direct = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
    assert binary_entropy(0.1) == pytest.approx(direct, abs=1e-15)
    assert binary_entropy(0.1) == pytest.approx(0.46900, abs=1e-5)
    with pytest.raises(ValueError):
        binary_entropy(1.2)
