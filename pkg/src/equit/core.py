"""Discrete information measures and elementary statistics.

Every information quantity here is in bits.
"""
from __future__ import annotations

import math

import numpy as np

_PROB_TOL = 1e-9


def as_pair(x, y, min_n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Validate a paired sample and return it as two float arrays."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"x and y differ in length ({x.size} vs {y.size})")
    if x.size < min_n:
        raise ValueError(f"need at least {min_n} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("coordinates must be finite")
    return x, y


def entropy(dist) -> float:
    """Shannon entropy, in bits, of a probability vector.

    ``0 log 0`` is taken as 0. Raises ``ValueError`` on negative weights or
    weights that do not sum to one.
    """
    p = np.asarray(dist, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("empty distribution")
    if np.any(p < 0):
        raise ValueError("negative probability")
    if abs(p.sum() - 1.0) > _PROB_TOL:
        raise ValueError(f"probabilities sum to {float(p.sum())!r}, not 1")
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _counts_entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(float)
    total = counts.sum()
    return float(math.log2(total) - np.sum(counts * np.log2(counts)) / total)


def mutual_information(table) -> float:
    """Mutual information of the distribution given by a contingency table.

    Parameters
    ----------
    table : array_like, shape (rows, cols)
        Non-negative cell counts (or weights).

    Returns
    -------
    float
        ``H(rows) + H(cols) - H(joint)`` in bits, clipped at zero to absorb
        rounding.
    """
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.size == 0:
        raise ValueError("contingency table must be a non-empty 2-D array")
    if np.any(t < 0):
        raise ValueError("negative cell count")
    if t.sum() <= 0:
        raise ValueError("contingency table is empty")
    mi = (_counts_entropy(t.sum(axis=1)) + _counts_entropy(t.sum(axis=0))
          - _counts_entropy(t.ravel()))
    return max(0.0, mi)


def pearson_squared(x, y) -> float:
    """Squared Pearson correlation; 0 when either coordinate is constant."""
    x, y = as_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r2 = float(np.dot(xc, yc)) ** 2 / (sxx * syy)
    return min(1.0, r2)


def r_squared_vs_function(x, y, spec) -> float:
    """R^2 of a (possibly noisy) sample with respect to a generating function.

    The squared correlation between ``f(x_i)`` and ``y_i``. Observed ``x_i``
    that fall outside the function's domain (horizontal noise) are clamped to
    the domain before ``f`` is evaluated. Random relationships, and samples on
    which ``f`` is constant, get 0.
    """
    x, y = as_pair(x, y)
    if spec.is_random:
        return 0.0
    fx = spec.evaluate(spec.clamp(x))
    return pearson_squared(fx, y)


def linfoot_squared(info: float) -> float:
    """Squared Linfoot correlation ``1 - 2**(-2 I)`` of an MI value in bits."""
    if info < 0 or math.isnan(info):
        raise ValueError(f"mutual information must be non-negative, got {info}")
    return -math.expm1(-2.0 * info * math.log(2.0))


def binary_entropy(a: float) -> float:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"binary entropy needs a in [0, 1], got {a}")
    if a == 0.0 or a == 1.0:
        return 0.0
    return -a * math.log2(a) - (1.0 - a) * math.log2(1.0 - a)
