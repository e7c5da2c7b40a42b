"""Isotonic least squares: PAVA and the max-min characterization.

Two independent routes to the same fit are kept side by side on purpose:
:func:`pava` implements the pool-adjacent-violators block merge, while
:func:`maxmin_at` evaluates the pointwise max-min of window averages.
They must agree exactly at every design point; the test suite enforces
this identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "RegressionSample",
    "IsotonicFit",
    "TouchPoints",
    "pava",
    "fit_at_index",
    "maxmin_at",
    "maxmin_all",
    "touch_points",
]


@dataclass(frozen=True)
class RegressionSample:
    """Design points in [0, 1] (nondecreasing) with responses."""

    xs: np.ndarray
    ys: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or len(xs) == 0 or len(xs) != len(ys):
            raise ValueError("xs and ys must be nonempty arrays of equal length")
        if np.any(np.diff(xs) < 0):
            raise ValueError("xs must be nondecreasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class IsotonicFit:
    """Block decomposition and fitted values of the monotone projection.

    ``starts[j]:ends[j]`` (half-open) is block j; ``levels[j]`` its common
    fitted value, strictly increasing in j.
    """

    fitted: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    levels: np.ndarray

    def block_of(self, i: int) -> int:
        """Index of the block containing design index ``i``."""
        j = int(np.searchsorted(self.ends, i, side="right"))
        return j


@dataclass(frozen=True)
class TouchPoints:
    """Data-driven averaging window realized at the evaluation point.

    ``h1``, ``h2`` are the window half-widths in bandwidth (``r_n``) units;
    ``u``, ``v`` the window endpoints in data coordinates.
    """

    h1: float
    h2: float
    u: float
    v: float


@njit(cache=True)
def _pava_kernel(y, w):
    """Weighted PAVA by block pooling; returns (fitted, block boundaries)."""
    n = len(y)
    fitted = np.empty(n)
    # stacks of block statistics
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        level[m] = y[i]
        weight[m] = w[i]
        start[m] = i
        m += 1
        while m > 1 and level[m - 2] > level[m - 1]:
            tot = weight[m - 2] + weight[m - 1]
            level[m - 2] = (weight[m - 2] * level[m - 2] + weight[m - 1] * level[m - 1]) / tot
            weight[m - 2] = tot
            m -= 1
    ends = np.empty(m, dtype=np.int64)
    for j in range(m):
        e = start[j + 1] if j + 1 < m else n
        ends[j] = e
        for i in range(start[j], e):
            fitted[i] = level[j]
    return fitted, start[:m].copy(), ends, level[:m].copy()


@njit(cache=True)
def _pava_value_at(y, k):
    """Fitted value at index k plus the enclosing block, without full output.

    Same merge loop as `_pava_kernel`; kept separate so the Monte Carlo
    harness can run it per replication without allocating fitted arrays.
    """
    n = len(y)
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        level[m] = y[i]
        weight[m] = 1.0
        start[m] = i
        m += 1
        while m > 1 and level[m - 2] > level[m - 1]:
            tot = weight[m - 2] + weight[m - 1]
            level[m - 2] = (weight[m - 2] * level[m - 2] + weight[m - 1] * level[m - 1]) / tot
            weight[m - 2] = tot
            m -= 1
    # merge equal-level neighbours so the block is the maximal window
    j = 0
    while j + 1 < m and start[j + 1] <= k:
        j += 1
    lo = j
    hi = j
    while lo > 0 and level[lo - 1] == level[j]:
        lo -= 1
    while hi + 1 < m and level[hi + 1] == level[j]:
        hi += 1
    end = start[hi + 1] if hi + 1 < m else n
    return level[j], start[lo], end


def pava(sample: RegressionSample | np.ndarray, weights=None) -> IsotonicFit:
    """L2 projection of the responses onto nondecreasing sequences.

    Linear-time stack-of-blocks merge.  Adjacent blocks that end up with
    equal means are coalesced so block levels are strictly increasing.
    """
    y = sample.ys if isinstance(sample, RegressionSample) else np.asarray(sample, dtype=float)
    if len(y) == 0:
        raise ValueError("empty input")
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    fitted, starts, ends, levels = _pava_kernel(y, w)
    # canonicalize: merge adjacent equal-level blocks (possible with
    # discrete noise such as Rademacher)
    keep = np.ones(len(levels), dtype=bool)
    for j in range(1, len(levels)):
        if levels[j] == levels[j - 1]:
            keep[j] = False
    if not keep.all():
        starts_c, ends_c, levels_c = [], [], []
        for j in range(len(levels)):
            if keep[j]:
                starts_c.append(starts[j])
                ends_c.append(ends[j])
                levels_c.append(levels[j])
            else:
                ends_c[-1] = ends[j]
        starts, ends, levels = map(np.array, (starts_c, ends_c, levels_c))
    return IsotonicFit(fitted=fitted, starts=starts, ends=ends, levels=levels)


def fit_at_index(ys: np.ndarray, k: int) -> tuple[float, int, int]:
    """Isotonic fitted value at index ``k`` and its maximal block [lo, hi).

    Thin wrapper over the jitted single-point kernel.
    """
    value, lo, hi = _pava_value_at(np.asarray(ys, dtype=float), k)
    return float(value), int(lo), int(hi)


def _window_min_matrix(ys: np.ndarray) -> np.ndarray:
    """M[u, k] = min over v >= k of the average of ys over [u, v].

    O(n^2) memory/time; the workhorse behind the max-min route.
    """
    n = len(ys)
    s = np.concatenate([[0.0], np.cumsum(ys)])
    # avg[u, v] = (s[v+1] - s[u]) / (v - u + 1) for v >= u, +inf below diagonal
    u = np.arange(n)[:, None]
    v = np.arange(n)[None, :]
    lengths = v - u + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        avg = (s[1:][None, :] - s[:n, None]) / lengths
    avg = np.where(lengths >= 1, avg, np.inf)
    # suffix minimum over v (right to left)
    return np.minimum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]


def maxmin_all(ys) -> np.ndarray:
    """Max-min value at every design index, computed without PAVA.

    Independent quadratic-scan oracle for the pool-adjacent-violators fit.
    """
    y = np.asarray(ys, dtype=float)
    m = _window_min_matrix(y)
    # mask u > k, then prefix max over u
    n = len(y)
    u = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    masked = np.where(u <= k, m, -np.inf)
    return np.max(masked, axis=0)


def maxmin_at(x_star: float, sample: RegressionSample) -> tuple[float, TouchPoints]:
    """Pointwise max-min of window averages at ``x_star``.

    value = max over u <= x* of min over v >= x* of the mean response in
    the window [u, v].  The attaining window is reported with ties broken
    to the widest window (smallest u, then largest v).
    """
    xs, ys = sample.xs, sample.ys
    if x_star < xs[0] or x_star > xs[-1]:
        raise ValueError(f"x_star={x_star} outside design range")
    # evaluation index: left-continuous step convention (first X_i >= x*)
    k = int(np.searchsorted(xs, x_star, side="left"))
    m = _window_min_matrix(ys)
    col = m[: k + 1, k]
    best = col.max()
    u_idx = int(np.flatnonzero(col == best)[0])  # smallest u attaining the max
    # for that u, largest v attaining the inner min
    s = np.concatenate([[0.0], np.cumsum(ys)])
    v = np.arange(k, len(ys))
    avgs = (s[v + 1] - s[u_idx]) / (v + 1 - u_idx)
    inner = avgs.min()
    v_idx = int(v[np.flatnonzero(avgs == inner)[-1]])
    tp = TouchPoints(h1=x_star - xs[u_idx], h2=xs[v_idx] - x_star, u=xs[u_idx], v=xs[v_idx])
    return float(best), tp


def touch_points(sample: RegressionSample, x_star: float, r_n: float) -> TouchPoints:
    """Attaining window of the max-min fit in bandwidth (``r_n``) units."""
    _, tp = maxmin_at(x_star, sample)
    return TouchPoints(h1=tp.h1 / r_n, h2=tp.h2 / r_n, u=tp.u, v=tp.v)
