"""Maximal information coefficient: grids, the column optimizer and variants.

The characteristic matrix is built one orientation at a time. For a fixed
number of rows ``y`` the y-axis is equipartitioned, the x-axis is cut into at
most ``c * x_max`` superclumps, and a dynamic program finds, for every column
count up to ``x_max``, the superclump boundaries maximizing grid mutual
information. The second orientation repeats this with the axes exchanged.

Everything depends only on coordinate ranks and tie patterns, so scores are
invariant under strictly increasing transforms of either axis.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_pair

#: Largest sample accepted by :func:`exact_max_grid_info`.
BRUTE_FORCE_CEILING = 40

#: Size of the fine row partition searched by :func:`mic_exhaustive_low_rows`.
FINE_ROWS = 20


class GridSizeError(ValueError):
    """Brute-force enumeration requested on an instance that is too large."""


@dataclass(frozen=True)
class AxisPartition:
    """Contiguous bins over points sorted along one axis.

    ``boundaries[k]`` is the number of points in bins ``0..k``; bin ``k``
    holds sorted ranks in ``(boundaries[k-1], boundaries[k]]``.
    """

    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if not b:
            raise ValueError("partition needs at least one bin")
        if b[0] <= 0 or any(v2 <= v1 for v1, v2 in zip(b, b[1:])):
            raise ValueError(f"boundaries must be positive and strictly increasing: {b}")
        object.__setattr__(self, "boundaries", b)

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def nbins(self) -> int:
        return len(self.boundaries)

    @property
    def sizes(self) -> list[int]:
        return [int(s) for s in np.diff((0,) + self.boundaries)]

    def labels(self) -> np.ndarray:
        """Bin index of every sorted rank."""
        return np.repeat(np.arange(self.nbins), self.sizes)


@dataclass(frozen=True)
class MicParams:
    """Grid budget ``B(n) = n**alpha`` (or ``b_override``) and superclump factor."""

    alpha: float = 0.6
    c: int = 15
    b_override: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"c must be a positive integer, got {self.c}")
        if self.b_override is not None and self.b_override <= 0:
            raise ValueError("b_override must be positive")

    def budget(self, n: int) -> float:
        return float(self.b_override) if self.b_override is not None else float(n) ** self.alpha


class MicVariant(str, enum.Enum):
    MIC = "MIC"
    MIC1 = "MIC1"
    MIC2 = "MIC2"
    MIC3 = "MIC3"
    MIC_EXHAUSTIVE = "MIC_EXHAUSTIVE"


@dataclass
class CharacteristicMatrix:
    """Optimal grid information by resolution.

    ``info[x, y]`` is the best mutual information (bits) found for ``x``
    columns and ``y`` rows, NaN where the resolution is inadmissible or could
    not be realized. ``entries`` holds the same values divided by
    ``log2(min(x, y))``.
    """

    info: np.ndarray
    n: int
    params: MicParams
    budget: float = field(init=False)

    def __post_init__(self):
        self.budget = self.params.budget(self.n)

    @property
    def entries(self) -> np.ndarray:
        return _normalize(self.info)

    def value(self, x: int, y: int) -> float:
        return float(self.entries[x, y])

    def as_dict(self) -> dict[tuple[int, int], float]:
        e = self.entries
        return {(int(i), int(j)): float(e[i, j]) for i, j in zip(*np.nonzero(~np.isnan(e)))}

    def max(self) -> float:
        return _nanmax(self.entries)


def _normalize(info: np.ndarray) -> np.ndarray:
    xs = np.arange(info.shape[0])[:, None]
    ys = np.arange(info.shape[1])[None, :]
    m = np.minimum(xs, ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = info / np.log2(np.where(m >= 2, m, 2))
    out[(m < 2) | np.isnan(info)] = np.nan
    return np.clip(out, 0.0, 1.0)


def _nanmax(a: np.ndarray) -> float:
    if a.size == 0 or np.all(np.isnan(a)):
        return 0.0
    return float(np.nanmax(a))


# --------------------------------------------------------------------------
# Axis partitions
# --------------------------------------------------------------------------

def _greedy_merge(group_sizes, k: int) -> AxisPartition:
    """Merge consecutive indivisible groups into ``min(k, #groups)`` bins.

    A bin keeps absorbing groups until the next one would move its size
    strictly farther from the running target (unassigned points divided by
    the bins still to fill) than stopping would. A bin is also closed early
    when exactly enough groups remain to give every later bin one group.
    """
    sizes = np.asarray(group_sizes, dtype=np.int64)
    G = sizes.size
    prefix = np.concatenate(([0], np.cumsum(sizes)))
    n = int(prefix[-1])
    if G <= k:
        return AxisPartition(tuple(prefix[1:]))
    # adding group j to a bin that started at group i0 overshoots the target T
    # iff (prefix[j] + prefix[j+1]) / 2 - prefix[i0] > T
    mids2 = prefix[:-1] + prefix[1:]
    bounds = []
    i0 = 0
    for bins_left in range(k, 1, -1):
        threshold = 2 * prefix[i0] + (2 * (n - prefix[i0])) // bins_left
        j = int(np.searchsorted(mids2, threshold, side="right"))
        j = max(j, i0 + 1)
        j = min(j, G - (bins_left - 1))
        bounds.append(int(prefix[j]))
        i0 = j
    bounds.append(n)
    return AxisPartition(tuple(bounds))


def _tie_groups(sorted_values: np.ndarray) -> np.ndarray:
    if sorted_values.size == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.flatnonzero(np.concatenate(([True], sorted_values[1:] != sorted_values[:-1])))
    return np.diff(np.concatenate((starts, [sorted_values.size])))


def equipartition_axis(values, k: int) -> AxisPartition:
    """Partition sorted values into ``k`` bins of nearly equal size.

    Runs of equal values are never split, so with fewer than ``k`` distinct
    values the result has one bin per distinct value.
    """
    if k < 1:
        raise ValueError("k must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot partition an empty axis")
    if np.any(v[1:] < v[:-1]):
        v = np.sort(v)
    return _greedy_merge(_tie_groups(v), k)


def clump_partition(x) -> AxisPartition:
    """One bin per run of equal x-values (data sorted internally)."""
    xs = np.sort(np.asarray(x, dtype=float))
    if xs.size == 0:
        raise ValueError("cannot partition an empty axis")
    return AxisPartition(tuple(np.cumsum(_tie_groups(xs))))


def superclump_partition(clumps: AxisPartition, limit: int) -> AxisPartition:
    """Merge adjacent clumps into at most ``limit`` bins of similar size."""
    if limit < 2:
        raise ValueError("superclump limit must be at least 2")
    if clumps.nbins <= limit:
        return clumps
    return _greedy_merge(clumps.sizes, limit)


# --------------------------------------------------------------------------
# Column optimization
# --------------------------------------------------------------------------

_XLOG_CACHE: dict[int, np.ndarray] = {}


def _xlog2x(n: int) -> np.ndarray:
    """Table of ``c * log2(c)`` for integer counts ``0..n``."""
    table = _XLOG_CACHE.get(n)
    if table is None:
        c = np.arange(n + 1, dtype=float)
        table = np.zeros(n + 1)
        table[1:] = c[1:] * np.log2(c[1:])
        if len(_XLOG_CACHE) > 64:
            _XLOG_CACHE.clear()
        _XLOG_CACHE[n] = table
    return table


def _cumulative_row_counts(row_labels: np.ndarray, nrows: int, master: AxisPartition) -> np.ndarray:
    """``C[t, r]``: points of row ``r`` among the first ``t`` master bins."""
    k = master.nbins
    bin_of_point = master.labels()
    counts = np.bincount(bin_of_point * nrows + row_labels, minlength=k * nrows).reshape(k, nrows)
    cum = np.zeros((k + 1, nrows), dtype=np.int64)
    np.cumsum(counts, axis=0, out=cum[1:])
    return cum


def _optimize_from_counts(cum: np.ndarray, max_cols: int) -> np.ndarray:
    """Best mutual information for 0..max_cols columns from cumulative counts.

    Maximizing ``I(P; Q)`` over column partitions ``P`` for fixed rows ``Q``
    means minimizing ``H(Q | P)``, which is a sum over columns of
    ``count * H(Q within column)``. ``cost[s, t]`` is that unnormalized term
    for a column spanning master bins ``s+1..t``; the recursion is a min-plus
    product over the last cut position.
    """
    k = cum.shape[0] - 1
    totals = cum.sum(axis=1)
    n = int(totals[-1])
    xl = _xlog2x(n)
    out = np.zeros(max_cols + 1)
    if k < 2 or max_cols < 2:
        return out

    span = totals[None, :] - totals[:, None]
    cost = xl[np.maximum(span, 0)]
    for r in range(cum.shape[1]):
        col = cum[:, r]
        cost -= xl[np.maximum(col[None, :] - col[:, None], 0)]
    cost[np.tril_indices(k + 1)] = np.inf

    h_rows = (xl[n] - xl[cum[-1]].sum()) / n
    best = cost[0].copy()
    prev = 0.0
    for cols in range(2, max_cols + 1):
        if cols > k:
            out[cols] = prev
            continue
        best = np.min(best[:, None] + cost, axis=0)
        prev = max(0.0, h_rows - best[k] / n)
        out[cols] = prev
    return out


def _row_labels(y: np.ndarray, rows: AxisPartition) -> np.ndarray:
    order = np.argsort(y, kind="stable")
    labels = np.empty(y.size, dtype=np.int64)
    labels[order] = rows.labels()
    return labels


def optimize_columns(x, y, rows: AxisPartition, max_cols: int,
                     master: AxisPartition | None = None) -> np.ndarray:
    """Optimal mutual information over column partitions with fixed rows.

    Parameters
    ----------
    x, y : array_like
        The sample.
    rows : AxisPartition
        Partition of the points sorted by ``y``; must not split tied y-values.
    max_cols : int
        Largest number of columns considered.
    master : AxisPartition, optional
        Partition of the points sorted by ``x`` whose boundaries are the
        admissible column cuts. Defaults to the x-clumps.

    Returns
    -------
    numpy.ndarray
        Length ``max_cols + 1``; entry ``l`` is the maximal mutual information
        in bits over grids with ``l`` columns cut at master boundaries. If
        the master has fewer than ``l`` bins the ``l``-column value equals the
        value for all master bins (extra columns would be empty).
    """
    x, y = as_pair(x, y)
    if max_cols < 2:
        raise ValueError("max_cols must be at least 2")
    if rows.n != x.size:
        raise ValueError("row partition does not cover the sample")
    if master is None:
        master = clump_partition(x)
    if master.n != x.size:
        raise ValueError("master partition does not cover the sample")
    labels = _row_labels(y, rows)
    order = np.argsort(x, kind="stable")
    cum = _cumulative_row_counts(labels[order], rows.nbins, master)
    return _optimize_from_counts(cum, max_cols)


# --------------------------------------------------------------------------
# Characteristic matrix
# --------------------------------------------------------------------------

def _max_cols(budget: float, rows: int) -> int:
    cols = int(budget // rows)
    while (cols + 1) * rows <= budget:
        cols += 1
    while cols * rows > budget:
        cols -= 1
    return cols




class _Orientation:
    """A sample with one axis designated as columns, sorted for reuse."""

    def __init__(self, cols: np.ndarray, rows: np.ndarray, c: int):
        self.n = cols.size
        self.c = c
        self.col_order = np.argsort(cols, kind="stable")
        self.row_order = np.argsort(rows, kind="stable")
        self.row_groups = _tie_groups(rows[self.row_order])
        self.clumps = clump_partition(cols)
        self._masters: dict[int, AxisPartition] = {}

    def master(self, max_cols: int) -> AxisPartition:
        m = self._masters.get(max_cols)
        if m is None:
            m = superclump_partition(self.clumps, max(2, self.c * max_cols))
            self._masters[max_cols] = m
        return m

    def equipartition_rows(self, nrows: int) -> AxisPartition:
        return _greedy_merge(self.row_groups, nrows)

    def optimize(self, rows: AxisPartition, max_cols: int) -> np.ndarray:
        labels = np.empty(self.n, dtype=np.int64)
        labels[self.row_order] = rows.labels()
        cum = _cumulative_row_counts(labels[self.col_order], rows.nbins, self.master(max_cols))
        return _optimize_from_counts(cum, max_cols)


def _one_orientation(cols: np.ndarray, rows: np.ndarray, budget: float, c: int,
                     size: int, refine: bool = False) -> np.ndarray:
    """Unnormalized info[columns, rows] with rows equipartitioned.

    With ``refine``, the 2- and 3-row resolutions instead search every
    coarsening of the fine row equipartition (and the plain equipartition).
    """
    info = np.full((size, size), np.nan)
    o = _Orientation(cols, rows, c)
    nrows = 2
    while True:
        max_cols = _max_cols(budget, nrows)
        if max_cols < 2:
            break
        rows_eq = o.equipartition_rows(nrows)
        candidates = []
        if rows_eq.nbins == nrows:
            candidates.append(rows_eq)
        if refine and nrows in (2, 3):
            candidates.extend(_coarsenings(o.equipartition_rows(FINE_ROWS), nrows))
        if candidates:
            best = np.max([o.optimize(r, max_cols) for r in candidates], axis=0)
            info[2:max_cols + 1, nrows] = best[2:]
        nrows += 1
    return info


def _coarsenings(fine: AxisPartition, nbins: int) -> list[AxisPartition]:
    inner = fine.boundaries[:-1]
    return [AxisPartition(cuts + (fine.n,)) for cuts in itertools.combinations(inner, nbins - 1)]


def _info_matrix(x, y, params: MicParams, refine: bool = False) -> tuple[np.ndarray, float]:
    x, y = as_pair(x, y, min_n=4)
    budget = params.budget(x.size)
    if budget < 4:
        raise ValueError(f"grid budget B(n) = {budget:.3g} admits no 2x2 grid")
    size = _max_cols(budget, 2) + 1
    first = _one_orientation(x, y, budget, params.c, size, refine)
    second = _one_orientation(y, x, budget, params.c, size, refine).T
    info = np.fmax(first, second)
    return info, budget


def characteristic_matrix(x, y, params: MicParams | None = None) -> CharacteristicMatrix:
    """Normalized optimal grid information for every admissible resolution.

    Entry ``(cols, rows)`` is defined for ``cols, rows >= 2`` with
    ``cols * rows <= B(n)``. Each entry is the larger of two searches: rows
    equipartitioned and columns optimized, and the same with the axes
    exchanged. Resolutions that cannot be realized because an axis has too
    few distinct values are left undefined.
    """
    params = params or MicParams()
    info, _ = _info_matrix(x, y, params)
    return CharacteristicMatrix(info, np.asarray(x).size, params)


def mic(x, y, params: MicParams | None = None) -> float:
    """Maximal information coefficient of a paired sample, in [0, 1]."""
    return characteristic_matrix(x, y, params).max()


def _equipartition_info(x, y, budget: float) -> np.ndarray:
    """Mutual information of the equipartitioned grid at each resolution."""
    size = _max_cols(budget, 2) + 1
    info = np.full((size, size), np.nan)
    x_order = np.argsort(x, kind="stable")
    y_order = np.argsort(y, kind="stable")
    x_groups = _tie_groups(x[x_order])
    y_groups = _tie_groups(y[y_order])
    xl = _xlog2x(x.size)
    n = x.size

    def labels(order, groups, k):
        p = _greedy_merge(groups, k)
        if p.nbins != k:
            return None
        lab = np.empty(n, dtype=np.int64)
        lab[order] = p.labels()
        return lab

    y_labels = {}
    for cols in range(2, size):
        xlab = labels(x_order, x_groups, cols)
        if xlab is None:
            continue
        for rows in range(2, _max_cols(budget, cols) + 1):
            if rows not in y_labels:
                y_labels[rows] = labels(y_order, y_groups, rows)
            ylab = y_labels[rows]
            if ylab is None:
                continue
            joint = np.bincount(xlab * rows + ylab, minlength=cols * rows)
            hx = xl[n] - xl[np.bincount(xlab, minlength=cols)].sum()
            hy = xl[n] - xl[np.bincount(ylab, minlength=rows)].sum()
            hxy = xl[n] - xl[joint].sum()
            info[cols, rows] = max(0.0, (hx + hy - hxy) / n)
    return info


def mic_variant(x, y, params: MicParams | None = None,
                variant: MicVariant | str = MicVariant.MIC) -> float:
    """MIC or one of its ablations.

    ``MIC1`` replaces the grid optimization with equipartitions of both axes;
    ``MIC2`` drops the ``log2 min(x, y)`` normalization; ``MIC3`` drops both.
    ``MIC2`` and ``MIC3`` are in bits and may exceed 1.
    """
    params = params or MicParams()
    variant = MicVariant(variant)
    if variant is MicVariant.MIC:
        return mic(x, y, params)
    if variant is MicVariant.MIC_EXHAUSTIVE:
        return mic_exhaustive_low_rows(x, y, params)
    if variant is MicVariant.MIC2:
        info, _ = _info_matrix(x, y, params)
        return _nanmax(info)
    x, y = as_pair(x, y, min_n=4)
    budget = params.budget(x.size)
    if budget < 4:
        raise ValueError(f"grid budget B(n) = {budget:.3g} admits no 2x2 grid")
    info = _equipartition_info(x, y, budget)
    if variant is MicVariant.MIC3:
        return _nanmax(info)
    return _nanmax(_normalize(info))


def mic_exhaustive_low_rows(x, y, params: MicParams | None = None) -> float:
    """MIC with an exhaustive row search at the 2- and 3-row resolutions.

    For grids with 2 or 3 rows (in either orientation) the rows are chosen
    among every coarsening of a 20-bin equipartition of the row axis; the
    plain 2- or 3-bin equipartition stays a candidate, so the result is
    never below :func:`mic`.
    """
    params = params or MicParams()
    x, y = as_pair(x, y, min_n=FINE_ROWS)
    info, _ = _info_matrix(x, y, params, refine=True)
    return _nanmax(_normalize(info))


# --------------------------------------------------------------------------
# Brute-force oracle
# --------------------------------------------------------------------------

def exact_max_grid_info(x, y, cols: int, rows: int, ceiling: int = BRUTE_FORCE_CEILING) -> float:
    """Exact maximum of grid mutual information over all ``cols``-by-``rows`` grids.

    Every placement of grid lines between consecutive distinct coordinate
    values is enumerated. Grids with coincident lines (empty rows or
    columns) equal coarser grids, and splitting a bin never lowers mutual
    information, so only placements with the most distinct lines need to be
    scored.
    """
    x, y = as_pair(x, y)
    if cols < 2 or rows < 2:
        raise ValueError("grid needs at least 2 rows and 2 columns")
    if x.size > ceiling:
        raise GridSizeError(f"n = {x.size} exceeds the brute-force ceiling {ceiling}")
    ux, xi = np.unique(x, return_inverse=True)
    uy, yi = np.unique(y, return_inverse=True)
    # prefix[i, j] = points with x-index < i and y-index < j
    hist = np.zeros((ux.size, uy.size), dtype=np.int64)
    np.add.at(hist, (xi, yi), 1)
    prefix = np.zeros((ux.size + 1, uy.size + 1), dtype=np.int64)
    prefix[1:, 1:] = hist.cumsum(0).cumsum(1)

    def boundary_sets(ndistinct, nbins):
        ncuts = min(nbins - 1, ndistinct - 1)
        combos = np.array(list(itertools.combinations(range(1, ndistinct), ncuts)),
                          dtype=np.int64).reshape(-1, ncuts)
        edges = np.empty((combos.shape[0], ncuts + 2), dtype=np.int64)
        edges[:, 0] = 0
        edges[:, 1:-1] = combos
        edges[:, -1] = ndistinct
        return edges

    col_sets = boundary_sets(ux.size, cols)
    row_sets = boundary_sets(uy.size, rows)
    if col_sets.shape[0] > row_sets.shape[0]:
        col_sets, row_sets = row_sets, col_sets
        prefix = prefix.T
    n = x.size
    xl = _xlog2x(n)
    best = 0.0
    for ce in col_sets:
        sub = prefix[ce][:, row_sets]                     # (c+1, m, r+1)
        cells = np.diff(np.diff(sub, axis=0), axis=2)     # (c, m, r)
        col_tot = cells.sum(axis=2)                       # (c, m)
        row_tot = cells.sum(axis=0)                       # (m, r)
        hcol = xl[n] - xl[col_tot].sum(axis=0)
        hrow = xl[n] - xl[row_tot].sum(axis=1)
        hjoint = xl[n] - xl[cells].sum(axis=(0, 2))
        best = max(best, float(np.max(hcol + hrow - hjoint)) / n)
    return best
