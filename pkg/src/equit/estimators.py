"""Comparator dependence measures: Kraskov kNN mutual information and dCor."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .core import as_pair, linfoot_squared


@dataclass(frozen=True)
class KraskovParams:
    """Neighbor count and the seeded tie-breaking jitter.

    ``jitter_scale`` is relative to each coordinate's range.
    """

    k: int = 6
    jitter_scale: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.jitter_scale < 0:
            raise ValueError("jitter_scale must be non-negative")


def _jitter(x: np.ndarray, y: np.ndarray, params: KraskovParams):
    if params.jitter_scale == 0:
        return x, y
    rng = np.random.Generator(np.random.PCG64(params.seed))
    out = []
    for v in (x, y):
        span = float(np.ptp(v)) or 1.0
        out.append(v + rng.uniform(-1.0, 1.0, v.size) * (params.jitter_scale * span))
    return out


def _count_within(sorted_v: np.ndarray, v: np.ndarray, radius: np.ndarray) -> np.ndarray:
    """Number of other points with ``|v_j - v_i| < radius_i``.

    ``fl(v_j - v_i)`` is monotone in ``v_j``, so the binary-search windows
    are exact once the few boundary positions disturbed by rounding in
    ``v_i +/- radius_i`` are re-checked with the strict predicate itself.
    """
    n = sorted_v.size
    hi = np.searchsorted(sorted_v, v + radius, side="left")
    lo = np.searchsorted(sorted_v, v - radius, side="right")
    for _ in range(4):
        grow = hi < n
        grow[grow] = np.abs(sorted_v[hi[grow]] - v[grow]) < radius[grow]
        shrink = hi > 0
        shrink[shrink] = ~(np.abs(sorted_v[hi[shrink] - 1] - v[shrink]) < radius[shrink])
        hi = hi + grow - shrink
        grow = lo > 0
        grow[grow] = np.abs(sorted_v[lo[grow] - 1] - v[grow]) < radius[grow]
        shrink = lo < n
        shrink[shrink] = ~(np.abs(sorted_v[lo[shrink]] - v[shrink]) < radius[shrink])
        lo = lo - grow + shrink
        if not (grow.any() or shrink.any()):
            break
    # the point itself is always inside when radius > 0
    return np.maximum(hi - lo - (radius > 0), 0)


def kraskov_mi(x, y, params: KraskovParams | None = None) -> float:
    """Kraskov-Stoegbauer-Grassberger mutual information estimate (variant 1).

    Parameters
    ----------
    x, y : array_like
        Paired one-dimensional samples.
    params : KraskovParams, optional
        ``k`` defaults to 6.

    Returns
    -------
    float
        ``psi(k) + psi(n) - <psi(n_x + 1) + psi(n_y + 1)>`` converted to bits.
        Max-norm joint distances; marginal counts use the strict inequality.
        The estimate can be negative.
    """
    params = params or KraskovParams()
    x, y = as_pair(x, y)
    n = x.size
    if params.k >= n:
        raise ValueError(f"k = {params.k} needs at least k + 1 points, got {n}")
    x, y = _jitter(x, y, params)
    tree = cKDTree(np.column_stack((x, y)))
    dist, _ = tree.query(np.column_stack((x, y)), k=params.k + 1, p=np.inf)
    eps = dist[:, -1]
    nx = _count_within(np.sort(x), x, eps)
    ny = _count_within(np.sort(y), y, eps)
    nats = digamma(params.k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1))
    return float(nats / math.log(2.0))


def kraskov_mi_bruteforce(x, y, params: KraskovParams | None = None) -> float:
    """O(n^2) reference evaluation of :func:`kraskov_mi`."""
    params = params or KraskovParams()
    x, y = as_pair(x, y)
    n = x.size
    if params.k >= n:
        raise ValueError(f"k = {params.k} needs at least k + 1 points, got {n}")
    x, y = _jitter(x, y, params)
    total = 0.0
    for i in range(n):
        dx = np.abs(x - x[i])
        dy = np.abs(y - y[i])
        d = np.maximum(dx, dy)
        d[i] = np.inf
        eps = np.partition(d, params.k - 1)[params.k - 1]
        nx = int(np.sum(dx < eps)) - 1
        ny = int(np.sum(dy < eps)) - 1
        total += digamma(nx + 1) + digamma(ny + 1)
    nats = digamma(params.k) + digamma(n) - total / n
    return float(nats / math.log(2.0))


def mi_linfoot_score(x, y, params: KraskovParams | None = None) -> float:
    """Squared Linfoot correlation of the Kraskov estimate, clamped at 0."""
    return linfoot_squared(max(kraskov_mi(x, y, params), 0.0))


def _centered_row_means(v: np.ndarray) -> tuple[np.ndarray, float]:
    """Row means of ``|v_i - v_j|`` in O(n log n), and their grand mean."""
    n = v.size
    order = np.argsort(v, kind="stable")
    s = v[order]
    csum = np.concatenate(([0.0], np.cumsum(s)))
    idx = np.arange(n)
    # sum_j |s_i - s_j| = s_i*i - sum_{j<i} s_j + sum_{j>i} s_j - s_i*(n-1-i)
    sums = s * idx - csum[:-1] + (csum[-1] - csum[1:]) - s * (n - 1 - idx)
    means = np.empty(n)
    means[order] = sums / n
    return means, float(means.mean())


def _dcov_sq(a: np.ndarray, b: np.ndarray, chunk: int = 1024) -> float:
    n = a.size
    am, ag = _centered_row_means(a)
    bm, bg = _centered_row_means(b)
    cross = 0.0
    for start in range(0, n, chunk):
        da = np.abs(a[start:start + chunk, None] - a[None, :])
        db = np.abs(b[start:start + chunk, None] - b[None, :])
        cross += float(np.einsum("ij,ij->", da, db))
    return cross / n ** 2 - 2.0 * float(np.dot(am, bm)) / n + ag * bg


def distance_correlation(x, y) -> float:
    """Sample distance correlation (square-root form, in [0, 1]).

    Uses the V-statistic identity ``dCov^2 = mean(a*b) - 2 <a_i. b_i.> +
    a.. b..`` so the double-centered matrices are never stored.
    """
    x, y = as_pair(x, y)
    vx = _dcov_sq(x, x)
    vy = _dcov_sq(y, y)
    if vx <= 0 or vy <= 0:
        return 0.0
    cxy = max(_dcov_sq(x, y), 0.0)
    return float(min(1.0, math.sqrt(cxy / math.sqrt(vx * vy))))


def distance_correlation_naive(x, y) -> float:
    """Direct double-centering evaluation of :func:`distance_correlation`."""
    x, y = as_pair(x, y)

    def centered(v):
        d = np.abs(v[:, None] - v[None, :])
        return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()

    A, B = centered(x), centered(y)
    vx, vy = (A * A).mean(), (B * B).mean()
    if vx <= 0 or vy <= 0:
        return 0.0
    return float(math.sqrt(max((A * B).mean(), 0.0) / math.sqrt(vx * vy)))
