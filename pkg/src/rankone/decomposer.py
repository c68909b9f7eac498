"""Constructive rank-one decomposition and frame synthesis.

The algorithm peels one weight at a time off the current operator. When the
weight lies between two adjacent eigenvalues it mixes the two eigenvectors so
that the remainder loses a rank (``lemma_step``); when it is smaller than every
eigenvalue it is spent on the bottom eigenvector until the smallest eigenvalue
drops under the next weight.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from math import fsum, sqrt

import numpy as np

from .errors import (
    FFIViolated,
    Infeasible,
    InputError,
    NotPositive,
    NumericalBreakdown,
    PreconditionViolated,
)
from .feasibility import WeightSequence, check_ffi, check_finite
from .spectral import (
    DEFAULT_TOL,
    RankOneDecomposition,
    Spectrum,
    Tolerances,
    as_symmetric,
    assemble,
    eigh,
)


@dataclass(frozen=True)
class SpectralState:
    """Positive eigenvalues (nonincreasing) with eigenvector columns in ambient space."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        if vecs.ndim != 2 or vecs.shape[1] != vals.size:
            raise InputError("need one eigenvector column per eigenvalue")
        if np.any(vals <= 0):
            raise PreconditionViolated("state eigenvalues must be strictly positive")
        if np.any(np.diff(vals) > 0):
            raise PreconditionViolated("state eigenvalues must be nonincreasing")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @classmethod
    def from_spectrum(cls, spec: Spectrum, tol: Tolerances = DEFAULT_TOL) -> "SpectralState":
        vals = spec.eigenvalues
        if vals.size and vals[-1] < -tol.psd_tol(vals[0]):
            raise NotPositive(f"operator has a negative eigenvalue {vals[-1]:.6g}")
        keep = (~spec.zero_mask) & (vals > 0)
        return cls(vals[keep], spec.eigenvectors[:, keep])

    @classmethod
    def from_matrix(cls, b, tol: Tolerances = DEFAULT_TOL) -> "SpectralState":
        return cls.from_spectrum(eigh(b, tol=tol.rank_rel), tol)

    @classmethod
    def from_diagonal(cls, values, tol: Tolerances = DEFAULT_TOL) -> "SpectralState":
        """State of ``diag(values)``; ties keep coordinate order."""
        d = np.asarray(values, dtype=float).reshape(-1)
        return cls.from_spectrum(Spectrum(*_sorted_diagonal(d), rank_rel=tol.rank_rel), tol)

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def eigenpairs(self) -> list[tuple[float, np.ndarray]]:
        return [(float(b), self.eigenvectors[:, i]) for i, b in enumerate(self.eigenvalues)]

    def to_matrix(self) -> np.ndarray:
        return assemble(zip(self.eigenvalues, self.eigenvectors.T), dim=self.dim)


def _sorted_diagonal(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-d, kind="stable")
    return d[order], np.eye(d.size)[:, order]


@dataclass(frozen=True)
class StepRecord:
    """One emitted term. ``case`` is 1 (rank-reducing) or 2 (bottom eigenvector).

    ``trace_after`` and ``min_eigenvalue_after`` describe the tracked
    eigenvalues of the remainder, not a recomputation.
    """

    case: int
    weight: float
    position: int
    mixing: float | None
    rank_before: int
    rank_after: int
    remaining_before: int
    trace_after: float
    min_eigenvalue_after: float


@dataclass(frozen=True)
class FrameSet:
    """Frame vectors (rows) with their norms, frame operator and optimal bounds."""

    vectors: np.ndarray
    norms: np.ndarray
    frame_operator: np.ndarray
    bounds: tuple[float, float]
    decomposition: RankOneDecomposition | None = None


def mixing_parameter(bj: float, bj1: float, c: float) -> float:
    """The ``t`` in ``[0, 1]`` making ``diag(bj, bj1) - c x x^T`` singular.

    ``x = (sqrt(1-t), sqrt(t))``. Setting the 2x2 determinant
    ``bj*bj1 - c*(t*bj + (1-t)*bj1)`` to zero gives
    ``t = bj1 (bj - c) / (c (bj - bj1))``; ``c`` is clamped into ``[bj1, bj]``
    first and ``t = 0`` when the eigenvalues coincide.
    """
    if bj <= bj1:
        return 0.0
    c = min(max(c, bj1), bj)
    t = bj1 * (bj - c) / (c * (bj - bj1))
    return min(max(t, 0.0), 1.0)


def _pair_rotation(bj: float, bj1: float, c: float) -> tuple[float, tuple[float, float], tuple[float, float]]:
    """Mixing parameter, projection direction and surviving eigendirection.

    Both directions are coefficients on ``(e_j, e_{j+1})``. The surviving
    direction is orthogonal to the kernel ``diag(bj, bj1)^{-1} x`` of the
    singular 2x2 block.
    """
    t = mixing_parameter(bj, bj1, c)
    x = (sqrt(1.0 - t), sqrt(t))
    if t == 0.0:
        u = (0.0, 1.0)
    else:
        ua, ub = bj * x[1], -bj1 * x[0]
        norm = sqrt(ua * ua + ub * ub)
        u = (ua / norm, ub / norm)
    return t, x, u


def lemma_step(s: SpectralState, j: int, c: float, tol: float | None = None) -> tuple[np.ndarray, SpectralState]:
    """Subtract ``c x x^T`` with ``x`` in span of eigenvectors ``j`` and ``j+1``.

    ``j`` is 0-based and needs ``b_j >= c >= b_{j+1}`` (up to ``tol``). The
    result has rank one less; the pair is replaced by ``b_j + b_{j+1} - c``
    at position ``j``.
    """
    vals = s.eigenvalues
    if not 0 <= j < s.rank - 1:
        raise PreconditionViolated(f"need 0 <= j < rank-1 = {s.rank - 1}, got j={j}")
    if tol is None:
        tol = DEFAULT_TOL.sum_tol(s.trace)
    bj, bj1 = float(vals[j]), float(vals[j + 1])
    if not bj1 - tol <= c <= bj + tol:
        raise PreconditionViolated(f"weight {c} is outside [{bj1}, {bj}]")
    _, (xa, xb), (ua, ub) = _pair_rotation(bj, bj1, c)
    ej, ej1 = s.eigenvectors[:, j], s.eigenvectors[:, j + 1]
    x = xa * ej + xb * ej1
    new_vals = np.concatenate([vals[:j], [bj + bj1 - c], vals[j + 2:]])
    new_vecs = np.concatenate([s.eigenvectors[:, :j], (ua * ej + ub * ej1)[:, None], s.eigenvectors[:, j + 2:]], axis=1)
    order = np.argsort(-new_vals, kind="stable")
    return x, SpectralState(new_vals[order], new_vecs[:, order])


def decompose(s: SpectralState, c, tol: Tolerances = DEFAULT_TOL) -> RankOneDecomposition:
    """Write the operator of ``s`` as ``sum_i c_i x_i x_i^T`` with unit ``x_i``.

    Weights are processed largest first; the returned terms carry the sorted
    weights and ``order`` maps them back to the caller's positions.

    Raises Infeasible (with the feasibility report) when the weights fail the
    partial-sum condition, and NumericalBreakdown if rounding drives the
    construction off a valid state.
    """
    weights = WeightSequence.of(c)
    vals = [float(b) for b in s.eigenvalues]
    if not vals:
        raise InputError("state has rank zero")
    trace0 = float(np.sum(vals))
    sum_tol = tol.sum_tol(trace0)
    psd_tol = tol.psd_tol(vals[0])
    report = check_finite(vals, weights, sum_tol)
    if not report.feasible:
        raise Infeasible(report)

    vecs = s.eigenvectors.copy()
    cols = list(range(len(vals)))
    out = np.empty((len(weights), s.dim))
    steps = []

    for i, ci in enumerate(weights.sorted):
        ci = float(ci)
        rank = len(vals)
        if rank == 0:
            raise NumericalBreakdown(f"operator exhausted with {len(weights) - i} weights left")
        if ci > vals[0] + sum_tol:
            raise NumericalBreakdown(f"weight {ci} exceeds the top eigenvalue {vals[0]}")
        mixing = None
        if ci < vals[-1] - sum_tol:
            case, pos = 2, rank - 1
            x = vecs[:, cols[-1]].copy()
            vals[-1] -= ci
        elif rank == 1:
            case, pos = 1, 0
            x = vecs[:, cols[0]].copy()
            vals.pop()
            cols.pop()
        else:
            case = 1
            # least l with b_l >= c >= b_{l+1}
            pos = bisect_left(vals, -(ci + sum_tol), lo=1, key=lambda b: -b) - 1
            bj, bj1 = vals[pos], vals[pos + 1]
            mixing, (xa, xb), (ua, ub) = _pair_rotation(bj, bj1, ci)
            ej, ej1 = vecs[:, cols[pos]], vecs[:, cols[pos + 1]]
            x = xa * ej + xb * ej1
            vecs[:, cols[pos]] = ua * ej + ub * ej1
            vals[pos] = bj + bj1 - ci
            del vals[pos + 1], cols[pos + 1]
            if vals[pos] < -psd_tol:
                raise NumericalBreakdown(f"intermediate eigenvalue {vals[pos]:.3e} is negative")
            if (pos > 0 and vals[pos] > vals[pos - 1]) or (pos + 1 < len(vals) and vals[pos] < vals[pos + 1]):
                order = sorted(range(len(vals)), key=lambda q: -vals[q])
                vals = [vals[q] for q in order]
                cols = [cols[q] for q in order]
        out[i] = x / np.linalg.norm(x)
        steps.append(StepRecord(case, ci, pos, mixing, rank, len(vals), len(weights) - i, fsum(vals), vals[-1] if vals else 0.0))

    if vals and max(abs(b) for b in vals) > sum_tol:
        raise NumericalBreakdown(f"weights exhausted with residual eigenvalues {vals}")
    return RankOneDecomposition(weights.sorted, out, s.dim, order=weights.order, steps=steps)


def decompose_matrix(b, c, tol: Tolerances = DEFAULT_TOL) -> RankOneDecomposition:
    """``decompose`` applied to a dense positive semidefinite matrix."""
    return decompose(SpectralState.from_matrix(b, tol), c, tol)


def _frame_from(decomposition: RankOneDecomposition, bounds: tuple[float, float]) -> FrameSet:
    z = decomposition.frame_vectors()
    return FrameSet(z, np.linalg.norm(z, axis=1), assemble(zip(np.ones(len(z)), z), dim=decomposition.dim), bounds, decomposition)


def synthesize_frame(b, norms, tol: Tolerances = DEFAULT_TOL) -> FrameSet:
    """Frame with frame operator ``b`` whose vectors have the given norms.

    Vectors come out in nonincreasing norm order. The bounds are the extreme
    eigenvalues of ``b`` (the lower one is 0 if ``b`` is singular).
    """
    spec = eigh(as_symmetric(b), tol=tol.rank_rel)
    state = SpectralState.from_spectrum(spec, tol)
    d = decompose(state, WeightSequence.from_norms(norms), tol)
    lower = 0.0 if state.rank < spec.dim else float(spec.eigenvalues[-1])
    return _frame_from(d, (lower, float(spec.eigenvalues[0])))


def tight_frame(n: int, norms, tol: Tolerances = DEFAULT_TOL) -> FrameSet:
    """Tight frame for R^n with prescribed norms; frame operator ``sum(a^2)/n * I``."""
    if n < 1:
        raise InputError(f"dimension must be positive, got {n}")
    ok, bound = check_ffi(norms, n, tol.sum_tol(float(np.sum(np.square(norms)))))
    if not ok:
        raise FFIViolated(f"max squared norm {np.max(np.square(norms)):.6g} exceeds the frame bound {bound:.6g}")
    state = SpectralState(np.full(n, bound), np.eye(n))
    d = decompose(state, WeightSequence.from_norms(norms), tol)
    return _frame_from(d, (bound, bound))
