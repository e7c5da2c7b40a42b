"""Greatest convex minorants, least concave majorants, and argmax utilities.

The hull operators act on finite point sets with strictly increasing
abscissae.  Slopes of the greatest convex minorant (GCM) evaluated at zero
are the geometric core of the limit-law samplers, and the first-argmax
helper supports the switching relation between slope-threshold events and
argmax events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvexMinorant",
    "ConcaveMajorant",
    "gcm",
    "lcm",
    "left_slope_at",
    "first_argmax",
]


@dataclass(frozen=True)
class ConvexMinorant:
    """Lower convex hull boundary of a point set, stored by its vertices.

    ``times`` and ``values`` are the contact vertices, sorted by time.
    Consecutive slopes are nondecreasing and every input point lies on or
    above the piecewise-linear interpolant.
    """

    times: np.ndarray
    values: np.ndarray

    def interpolate(self, t):
        """Evaluate the piecewise-linear interpolant at ``t`` (array ok)."""
        return np.interp(t, self.times, self.values)

    def slopes(self) -> np.ndarray:
        """Slopes of consecutive hull segments (nondecreasing)."""
        return np.diff(self.values) / np.diff(self.times)


@dataclass(frozen=True)
class ConcaveMajorant:
    """Upper concave hull boundary; mirror image of :class:`ConvexMinorant`."""

    times: np.ndarray
    values: np.ndarray

    def interpolate(self, t):
        return np.interp(t, self.times, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)


def _validate_points(times: np.ndarray, values: np.ndarray) -> None:
    if times.ndim != 1 or values.ndim != 1 or len(times) != len(values):
        raise ValueError("times and values must be 1-d arrays of equal length")
    if len(times) < 2:
        raise ValueError("need at least 2 points")
    if not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")


def gcm(times, values) -> ConvexMinorant:
    """Greatest convex minorant of the points ``(times[i], values[i])``.

    Single monotone-stack pass over the time-sorted input (linear time).
    Collinear interior points are dropped from the vertex list; the
    interpolant is unchanged by this canonicalization.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    _validate_points(t, y)
    stack: list[int] = []
    for i in range(len(t)):
        # pop while the new point makes a non-left (clockwise or straight)
        # turn with the last hull edge, i.e. the middle point is not below
        # the chord
        while len(stack) >= 2:
            j, k = stack[-2], stack[-1]
            if (t[k] - t[j]) * (y[i] - y[j]) <= (t[i] - t[j]) * (y[k] - y[j]):
                stack.pop()
            else:
                break
        stack.append(i)
    idx = np.array(stack)
    return ConvexMinorant(times=t[idx], values=y[idx])


def lcm(times, values) -> ConcaveMajorant:
    """Least concave majorant; computed as the negated GCM of ``-values``."""
    m = gcm(times, -np.asarray(values, dtype=float))
    return ConcaveMajorant(times=m.times, values=-m.values)


def left_slope_at(minorant: ConvexMinorant | ConcaveMajorant, t: float) -> float:
    """Left derivative of the hull interpolant at ``t``.

    Returns the slope of the segment whose half-open interval
    ``(prev_vertex, vertex]`` contains ``t``.  If ``t`` equals the left
    endpoint of the domain there is no left segment; following the
    convention for one-sided limit laws, the right segment slope is
    returned there.
    """
    vt = minorant.times
    if t < vt[0] or t > vt[-1]:
        raise ValueError(f"t={t} outside hull domain [{vt[0]}, {vt[-1]}]")
    if t == vt[0]:
        j = 1
    else:
        # first vertex index with vt[j] >= t; segment (vt[j-1], vt[j]]
        j = int(np.searchsorted(vt, t, side="left"))
        if vt[j] < t:  # pragma: no cover - searchsorted guarantees vt[j] >= t
            j += 1
    return (minorant.values[j] - minorant.values[j - 1]) / (vt[j] - vt[j - 1])


def first_argmax(times, values, linear_offset: float = 0.0) -> float:
    """Smallest time attaining ``max(values - a * times)``.

    Ties are broken to the earliest time, matching the first-maximum
    convention used when translating slope events into argmax events.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) == 0:
        raise ValueError("empty point set")
    obj = y - linear_offset * t
    return float(t[int(np.argmax(obj))])
