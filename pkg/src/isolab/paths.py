"""Discretized one- and two-sided Brownian motion paths.

Paths live on a finite strictly increasing grid.  Two-sided grids contain
0 exactly once and the path is anchored at B(0) = 0; the two halves are
generated outward from the origin (right half first), so the halves are
independent for a fixed stream.

Seeding discipline: one master seed; per-path streams are derived with the
counter-based Philox generator keyed by ``(master_seed, stream_index)``,
so results do not depend on how replications are scheduled over workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "TwoSidedPath",
    "two_sided_grid",
    "one_sided_grid",
    "derived_rng",
    "sample_bm",
    "add_drift",
]


def derived_rng(master_seed: int, stream_index: int) -> np.random.Generator:
    """Counter-based stream for replication ``stream_index``.

    Independent of any other stream index and of the order in which
    streams are consumed, which makes parallel schedules reproducible.
    """
    return np.random.Generator(np.random.Philox(key=[master_seed, stream_index]))


@dataclass(frozen=True)
class Grid:
    """Strictly increasing finite time grid.

    For two-sided use exactly one entry must equal 0.
    """

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise ValueError("grid must be a nonempty 1-d array")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def zero_index(self) -> int:
        idx = np.flatnonzero(self.times == 0.0)
        if len(idx) != 1:
            raise ValueError("grid must contain 0 exactly once")
        return int(idx[0])


@dataclass(frozen=True)
class TwoSidedPath:
    """Sample path on a grid containing 0, anchored at value 0 there."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if len(v) != len(self.grid.times):
            raise ValueError("values length must match grid length")
        if v[self.grid.zero_index] != 0.0:
            raise ValueError("path must vanish at time 0")
        object.__setattr__(self, "values", v)


def two_sided_grid(t_left: float, t_right: float, step: float) -> Grid:
    """Uniform grid on [-t_left, t_right] with spacing ``step``, through 0."""
    if step <= 0 or t_left < 0 or t_right < 0 or t_left + t_right <= 0:
        raise ValueError("need step > 0 and a nondegenerate interval around 0")
    n_left = int(round(t_left / step))
    n_right = int(round(t_right / step))
    left = -step * np.arange(n_left, 0, -1)
    right = step * np.arange(0, n_right + 1)
    return Grid(times=np.concatenate([left, right]))


def one_sided_grid(t_max: float, step: float) -> Grid:
    """Uniform grid on [0, t_max] with spacing ``step``."""
    if step <= 0 or t_max <= 0:
        raise ValueError("need step > 0 and t_max > 0")
    return Grid(times=step * np.arange(int(round(t_max / step)) + 1))


def sample_bm(grid: Grid, rng: np.random.Generator) -> TwoSidedPath:
    """Standard Brownian motion on ``grid`` with B(0) = 0.

    Increments are independent Gaussians with variance equal to the grid
    spacing, accumulated outward from 0 on each side.  The right half is
    drawn first, then the left half, each outward from 0, so the two
    halves are independent.
    """
    i0 = grid.zero_index
    t = grid.times
    values = np.zeros(len(t))
    dt_right = np.diff(t[i0:])
    if len(dt_right):
        z = rng.standard_normal(len(dt_right))
        values[i0 + 1 :] = np.cumsum(np.sqrt(dt_right) * z)
    dt_left = np.diff(t[: i0 + 1])[::-1]  # spacings outward from 0
    if len(dt_left):
        z = rng.standard_normal(len(dt_left))
        values[:i0] = np.cumsum(np.sqrt(dt_left) * z)[::-1]
    return TwoSidedPath(grid=grid, values=values)


def add_drift(path: TwoSidedPath, drift) -> TwoSidedPath:
    """Pointwise add ``drift(t)`` to the path values; grid unchanged.

    ``drift`` is any callable vanishing at 0 (so the anchor survives).
    """
    shifted = path.values + np.asarray(drift(path.grid.times), dtype=float)
    return TwoSidedPath(grid=path.grid, values=shifted)
