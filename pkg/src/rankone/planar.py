"""Rank-one decompositions of ``diag(b1, b2)`` from closed polygons.

With ``x_i = (cos th_i, sin th_i)``, the identity ``sum c_i x_i x_i^T =
diag(b1, b2)`` is equivalent (given ``sum c_i = b1 + b2``) to the closing
condition ``sum c_i (cos 2th_i, sin 2th_i) = (b1 - b2, 0)``. So any polygon
with sides ``c_1, ..., c_k`` and ``b1 - b2`` gives a decomposition. The polygon
is built by inscribing it in a circle.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import asin, pi

import numpy as np

from .errors import Infeasible, InputError, NoPolygon
from .feasibility import FeasibilityReport, WeightSequence
from .spectral import DEFAULT_TOL, RankOneDecomposition, Tolerances

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PolygonSolution:
    """Half-angles ``theta`` of the weight sides; ``2*theta`` are their headings."""

    theta: np.ndarray
    sides: np.ndarray
    gap: float
    closure_residual: float

    @property
    def headings(self) -> np.ndarray:
        return 2.0 * self.theta


def _arcs(lengths: np.ndarray, radius: float) -> np.ndarray:
    return 2.0 * np.arcsin(np.minimum(lengths / (2.0 * radius), 1.0))


def _bisect(f, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of an increasing ``f`` on ``[lo, hi]`` with ``f(lo) < 0 <= f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 4 * _EPS * hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _inscribed_headings(lengths: np.ndarray) -> np.ndarray:
    """Edge headings of a convex polygon with these side lengths, on a circle.

    If the sides fit around the circle of diameter ``max(lengths)`` the centre
    is inside and all arcs are minor. Otherwise the centre lies beyond the
    longest side, whose arc is reflex: the other arcs must add up to its
    minor arc.
    """
    imax = int(np.argmax(lengths))
    lmax = float(lengths[imax])
    total = float(np.sum(lengths))
    rmin = lmax / 2.0
    if np.sum(_arcs(lengths, rmin)) >= 2 * pi:
        radius = _bisect(lambda r: 2 * pi - np.sum(_arcs(lengths, r)), rmin, max(total / 4.0, rmin))
        arcs = _arcs(lengths, radius)
    else:
        others = np.delete(lengths, imax)

        def excess(r):
            return np.sum(_arcs(others, r)) - 2.0 * asin(min(lmax / (2.0 * r), 1.0))

        hi = 2.0 * rmin
        while excess(hi) < 0:
            hi *= 2.0
        radius = _bisect(excess, rmin, hi)
        arcs = _arcs(lengths, radius)
        arcs[imax] = 2 * pi - arcs[imax]
    starts = np.concatenate([[0.0], np.cumsum(arcs)[:-1]])
    return starts + arcs / 2.0 + pi / 2.0


def polygon_angles(c, gap: float, tol: float | None = None) -> PolygonSolution:
    """Close a polygon with sides ``c`` plus a side of length ``gap``.

    The ``gap`` side is pinned to point along ``-x``, so the headings ``h_i``
    of the ``c`` sides satisfy ``sum c_i (cos h_i, sin h_i) = (gap, 0)``.

    Raises NoPolygon when the longest side exceeds the sum of the others by
    more than ``tol`` (default ``1e-9 * max(sum(c), 1)``), or when fewer than
    two weights are given.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if gap < 0 or not np.isfinite(gap):
        raise InputError(f"gap must be finite and nonnegative, got {gap}")
    if np.any(c <= 0):
        raise InputError("side lengths must be positive")
    if c.size < 2:
        raise NoPolygon(f"need at least two sides besides the gap, got {c.size}")
    if tol is None:
        tol = DEFAULT_TOL.sum_tol(float(np.sum(c)))

    lengths = np.concatenate([[gap], c]) if gap > 0 else c
    lmax = float(np.max(lengths))
    slack = float(np.sum(lengths)) - 2.0 * lmax
    if slack < -tol:
        raise NoPolygon(f"longest side {lmax} exceeds the sum of the others by {-slack:.3e}")

    if slack <= 1e-12 * max(float(np.sum(lengths)), 1.0):
        # flat polygon: the longest side against all the others
        imax = int(np.argmax(lengths))
        headings = np.full(lengths.size, pi)
        headings[imax] = 0.0
    else:
        headings = _inscribed_headings(lengths)

    if gap > 0:
        headings = headings[1:] + (pi - headings[0])
    else:
        headings = headings - headings[0]
    headings = np.mod(headings, 2 * pi)
    closing = np.array([np.sum(c * np.cos(headings)) - gap, np.sum(c * np.sin(headings))])
    return PolygonSolution(headings / 2.0, c, float(gap), float(np.linalg.norm(closing)))


def decompose_2d(b1: float, b2: float, c, tol: Tolerances = DEFAULT_TOL) -> RankOneDecomposition:
    """Decompose ``diag(b1, b2)`` with weights ``c`` via a closing polygon.

    Needs ``b1 >= b2 > 0``, at least two weights, ``sum(c) == b1 + b2`` and
    ``max(c) <= b1`` (both up to the sum tolerance); raises Infeasible
    otherwise. Output terms are in nonincreasing weight order.
    """
    if not b1 >= b2 > 0:
        raise InputError(f"need b1 >= b2 > 0, got ({b1}, {b2})")
    w = WeightSequence.of(c)
    sum_tol = tol.sum_tol(b1 + b2)
    sum_gap = w.total - (b1 + b2)
    count_ok = len(w) >= 2
    violating = 1 if w.sorted[0] > b1 + sum_tol else None
    if not count_ok or abs(sum_gap) > sum_tol or violating is not None:
        raise Infeasible(FeasibilityReport(False, violating, sum_gap, count_ok, sum_tol))
    # the polygon slack is 2*(b1 - c_1) + (sum(c) - b1 - b2), so allow both errors
    sol = polygon_angles(w.sorted, b1 - b2, tol=4 * sum_tol)
    vectors = np.column_stack([np.cos(sol.theta), np.sin(sol.theta)])
    return RankOneDecomposition(w.sorted, vectors, 2, order=w.order)
