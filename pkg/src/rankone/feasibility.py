"""Existence tests for rank-one decompositions with prescribed weights.

A positive operator with nonzero eigenvalues ``b_1 >= ... >= b_n`` is a sum
``sum_i c_i x_i x_i^T`` of unit-vector projections exactly when ``k >= n``,
the totals agree, and every leading partial sum of the sorted weights is
dominated by the matching partial sum of eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, EmptyInput, InputError, NotPositive
from .spectral import DEFAULT_TOL


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights plus their nonincreasing rearrangement.

    ``order[i]`` is the input position of ``sorted[i]``; ties keep input order.
    """

    weights: np.ndarray
    sorted: np.ndarray
    order: np.ndarray

    @classmethod
    def of(cls, weights) -> "WeightSequence":
        if isinstance(weights, cls):
            return weights
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise EmptyInput("weight sequence is empty")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("weights must be finite and strictly positive")
        order = np.argsort(-w, kind="stable")
        return cls(w, w[order], order)

    @classmethod
    def from_norms(cls, norms) -> "WeightSequence":
        a = np.asarray(norms, dtype=float).reshape(-1)
        if a.size and (not np.all(np.isfinite(a)) or np.any(a <= 0)):
            raise InputError("norms must be finite and strictly positive")
        return cls.of(a * a)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violating_p: int | None
    sum_gap: float
    count_ok: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "violating_p": self.violating_p,
            "sum_gap": self.sum_gap,
            "count_ok": self.count_ok,
            "tol": self.tol,
        }


def nonzero_eigenvalues(b, rank_rel: float = DEFAULT_TOL.rank_rel, psd_rel: float = DEFAULT_TOL.psd_rel) -> np.ndarray:
    """Sort ``b`` nonincreasing and drop the numerically zero entries.

    Raises NotPositive for an entry below ``-psd_rel * max|b|``.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size == 0:
        raise EmptyInput("eigenvalue list is empty")
    if not np.all(np.isfinite(b)):
        raise InputError("eigenvalues must be finite")
    top = float(np.max(np.abs(b)))
    if np.min(b) < -psd_rel * max(top, 1.0):
        raise NotPositive(f"operator has a negative eigenvalue {np.min(b):.6g}")
    b = -np.sort(-b, kind="stable")
    return b[b > rank_rel * top]


def check_finite(b, c, tol: float | None = None) -> FeasibilityReport:
    """Decide whether weights ``c`` admit a rank-one decomposition of spectrum ``b``.

    ``b`` may be unsorted and may contain zeros (they are dropped); ``c`` is
    sorted internally, and ``violating_p`` (1-based) refers to that sorted
    order. ``tol`` defaults to ``1e-9 * max(sum(b), 1)`` and is applied
    additively to the total and to each partial-sum comparison.
    """
    c = WeightSequence.of(c)
    b = nonzero_eigenvalues(b)
    if b.size == 0:
        raise EmptyInput("operator has no nonzero eigenvalue")
    if tol is None:
        tol = DEFAULT_TOL.sum_tol(float(np.sum(b)))

    n, k = len(b), len(c)
    sum_gap = float(np.sum(c.sorted) - np.sum(b))
    count_ok = k >= n

    m = min(n - 1, k)
    violating = None
    if m > 0:
        over = np.cumsum(c.sorted[:m]) > np.cumsum(b[:m]) + tol
        if over.any():
            violating = int(np.argmax(over)) + 1
    feasible = count_ok and abs(sum_gap) <= tol and violating is None
    return FeasibilityReport(feasible, violating, sum_gap, count_ok, float(tol))


def frame_bound(a, n: int) -> float:
    """Tight-frame bound ``sum(a_i^2) / n`` for norms ``a`` in dimension ``n``."""
    a = np.asarray(a, dtype=float)
    return float(np.sum(a * a)) / n


def check_ffi(a, n: int, tol: float | None = None) -> tuple[bool, float]:
    """Fundamental frame inequality: ``max a_i^2 <= sum(a_i^2) / n``.

    Returns ``(satisfied, frame_bound)``. Raises BadDimension when there are
    fewer norms than dimensions.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size == 0:
        raise EmptyInput("norm sequence is empty")
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise InputError("norms must be finite and strictly positive")
    if n < 1 or a.size < n:
        raise BadDimension(f"need at least n={n} norms, got {a.size}")
    sq = -np.sort(-(a * a))
    bound = float(np.sum(sq)) / n
    if tol is None:
        tol = DEFAULT_TOL.sum_tol(float(np.sum(sq)))
    return bool(sq[0] <= bound + tol), bound
