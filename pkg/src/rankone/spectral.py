"""Dense symmetric operators: eigendecomposition, rank-one assembly, frame bounds.

Operators are plain ``numpy`` arrays; :func:`as_symmetric` is the single
entry point that validates and symmetrizes them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InputError, NonConvergence, PreconditionViolated

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances shared by all modules.

    ``sum_rel``, ``rank_rel`` and ``psd_rel`` are scaled by the size of the
    operator at the point of use (total trace, largest eigenvalue).
    """

    sum_rel: float = 1e-9
    rank_rel: float = 1e-9
    psd_rel: float = 1e-9
    orth: float = 1e-10
    unit: float = 1e-10
    rec_rel: float = 1e-10

    @classmethod
    def from_base(cls, tol: float) -> "Tolerances":
        """Scale every default proportionally so that ``sum_rel == tol``."""
        if not tol > 0:
            raise InputError(f"tolerance must be positive, got {tol}")
        base = cls()
        factor = tol / base.sum_rel
        return cls(**{k: v * factor for k, v in base.__dict__.items()})

    def sum_tol(self, total: float) -> float:
        return self.sum_rel * max(total, 1.0)

    def rank_tol(self, top: float) -> float:
        return self.rank_rel * abs(top)

    def psd_tol(self, top: float) -> float:
        return self.psd_rel * max(abs(top), 1.0)


DEFAULT_TOL = Tolerances()


def as_symmetric(m) -> np.ndarray:
    """Return ``(m + m.T) / 2`` as a float array, after shape checks."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise EmptyInput("matrix has dimension 0")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in nonincreasing order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank_rel: float = DEFAULT_TOL.rank_rel

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def zero_mask(self) -> np.ndarray:
        """Eigenvalues that are numerically zero for rank purposes."""
        if self.eigenvalues.size == 0:
            return np.zeros(0, dtype=bool)
        top = np.max(np.abs(self.eigenvalues))
        return np.abs(self.eigenvalues) <= self.rank_rel * top

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(~self.zero_mask))

    def to_matrix(self) -> np.ndarray:
        return _weighted_outer_sum(self.eigenvalues, self.eigenvectors.T)

    def as_decomposition(self) -> "RankOneDecomposition":
        """The eigenpairs with positive, numerically nonzero eigenvalue."""
        keep = (~self.zero_mask) & (self.eigenvalues > 0)
        return RankOneDecomposition(self.eigenvalues[keep], self.eigenvectors[:, keep].T, self.dim)


@dataclass(frozen=True)
class RankOneDecomposition:
    """An ordered list of ``(weight, unit vector)`` terms.

    ``vectors`` holds one term per row. ``order[i]`` is the position in the
    caller's weight list of the ``i``-th term, when the producer sorted them.
    ``steps`` is the construction log left by :func:`rankone.decomposer.decompose`.
    """

    weights: np.ndarray
    vectors: np.ndarray
    dim: int
    order: np.ndarray | None = None
    steps: list = field(default_factory=list, repr=False, compare=False)
    unit_tol: float = DEFAULT_TOL.unit

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        v = np.asarray(self.vectors, dtype=float).reshape(len(w), -1) if len(w) else np.zeros((0, self.dim))
        if v.shape[1] != self.dim:
            raise DimensionMismatch(f"vectors have dimension {v.shape[1]}, expected {self.dim}")
        if np.any(w <= 0):
            raise PreconditionViolated("rank-one weights must be positive")
        if len(w) and np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)) > self.unit_tol:
            raise PreconditionViolated("rank-one vectors must have unit norm")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def terms(self) -> list[tuple[float, np.ndarray]]:
        return [(float(c), x) for c, x in zip(self.weights, self.vectors)]

    def frame_vectors(self) -> np.ndarray:
        """Rows ``sqrt(c_i) x_i``, whose frame operator is the assembled matrix."""
        return np.sqrt(self.weights)[:, None] * self.vectors

    def with_weights(self, weights) -> "RankOneDecomposition":
        return replace(self, weights=np.asarray(weights, dtype=float))


def _weighted_outer_sum(weights, vectors) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    v = np.asarray(vectors, dtype=float)
    m = (v.T * w) @ v
    return 0.5 * (m + m.T)


def assemble(d: RankOneDecomposition | Iterable[tuple[float, Sequence[float]]], dim: int | None = None) -> np.ndarray:
    """Sum of ``c x x^T`` over the terms; exactly symmetric."""
    if isinstance(d, RankOneDecomposition):
        if dim is not None and dim != d.dim:
            raise DimensionMismatch(f"decomposition has dimension {d.dim}, expected {dim}")
        return _weighted_outer_sum(d.weights, d.vectors)
    terms = list(d)
    if not terms:
        if dim is None:
            raise EmptyInput("need dim to assemble an empty term list")
        return np.zeros((dim, dim))
    weights = [float(c) for c, _ in terms]
    try:
        vectors = np.array([np.asarray(x, dtype=float) for _, x in terms])
    except ValueError as exc:
        raise DimensionMismatch("term vectors have differing dimensions") from exc
    if vectors.ndim != 2 or (dim is not None and vectors.shape[1] != dim):
        raise DimensionMismatch(f"term vectors do not all have dimension {dim}")
    return _weighted_outer_sum(weights, vectors)


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint (p, q) pair sets; their union over one cycle is every pair once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def eigh(m, tol: float = DEFAULT_TOL.rank_rel, max_sweeps: int = 30) -> Spectrum:
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the rotations of one round act on disjoint index pairs and can be
    applied together. A pair is rotated only while its entry is significant
    relative to the geometric mean of the two diagonal entries, and the
    iteration stops after a sweep with no rotation.

    Eigenvalues are returned nonincreasing (stable among ties); those below
    ``tol`` times the largest magnitude are flagged in ``Spectrum.zero_mask``.

    Raises NonConvergence if a sweep still needs rotations after
    ``max_sweeps`` sweeps.
    """
    a = as_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    floor = _EPS * _EPS * scale
    rounds = _round_robin(n)

    converged = n == 1 or scale == 0.0
    sweeps = 0
    while not converged:
        if sweeps == max_sweeps:
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})")
        sweeps += 1
        rotated = False
        for p, q in rounds:
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            active = (np.abs(apq) > _EPS * np.sqrt(np.abs(app * aqq))) & (np.abs(apq) > floor)
            if not active.any():
                continue
            rotated = True
            p, q, apq, app, aqq = p[active], q[active], apq[active], app[active], aqq[active]
            theta = (aqq - app) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), np.copysign(1.0, safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            ap, aq = a[:, p], a[:, q]
            a[:, p], a[:, q] = ap * c - aq * s, ap * s + aq * c
            ap, aq = a[p, :], a[q, :]
            a[p, :], a[q, :] = c[:, None] * ap - s[:, None] * aq, s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = vp * c - vq * s, vp * s + vq * c
        converged = not rotated

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], v[:, order], rank_rel=tol)


def frame_bounds(vectors, tol: float = DEFAULT_TOL.rank_rel) -> tuple[float, float]:
    """Optimal lower and upper frame bounds ``(C, D)`` of a finite family.

    These are the extreme eigenvalues of the frame operator. ``C`` is
    reported as exactly 0 when the family does not span (up to ``tol``
    relative to ``D``).
    """
    z = np.atleast_2d(np.asarray(vectors, dtype=float))
    if z.size == 0:
        raise EmptyInput("frame_bounds needs at least one vector")
    spec = eigh(_weighted_outer_sum(np.ones(len(z)), z), tol=tol)
    upper = float(spec.eigenvalues[0])
    lower = float(spec.eigenvalues[-1])
    if lower <= tol * upper:
        lower = 0.0
    return lower, upper
