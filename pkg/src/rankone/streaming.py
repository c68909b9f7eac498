"""Rank-one decomposition of the identity on l^2 with weights from a stream.

Given weights ``0 < c_i <= 1`` with ``sum c_i`` and ``sum (1 - c_i)`` both
divergent, the identity is cut into finite diagonal blocks

    B_i = (1 - r(n_{i-1})) E_{n_{i-1}+1} + E_{n_{i-1}+2} + ... + E_{n_i} + r(n_i) E_{n_i+1}

(``E_j`` the coordinate projections, 1-based), each of which is decomposed
with the consecutive weights ``c_{s(n_{i-1})+1} .. c_{s(n_i)}``. Here ``s(n)``
is the least ``m`` with ``c_1 + ... + c_m > n``, ``r(n)`` the overshoot and
``g(n) = s(n) - n``. Block ends ``n_i`` are chosen greedily so that

    (a) g(n_i) >= g(n_{i-1}) + 1
    (b) d(s(n_{i-1}) + n_i - n_{i-1} + 1) - d(s(n_{i-1})) > 2

with ``d(m) = sum_{j<=m} (1 - c_j)``. The first block is planned from a
virtual ``n_0 = s_0 = g_0 = 0``, ``r_0 = 0``.

Sparse vectors are dicts ``{coordinate: value}`` over the basis ``e_0, e_1, ...``
(0-based, so the 1-based ``E_j`` above is coordinate ``j - 1``).
"""
from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass
from math import fsum
from typing import Callable, Iterable, Iterator

import numpy as np

from .decomposer import SpectralState, decompose, decompose_matrix
from .errors import BlockInfeasible, Infeasible, InputError, Stalled
from .spectral import DEFAULT_TOL, RankOneDecomposition, Tolerances

DEFAULT_CAP = 10**6
# blocks are decomposed densely and their vectors fill about half the block,
# so memory and output size grow like width^2
DEFAULT_MAX_WIDTH = 2048
# deficits are differences of O(m) prefix sums; exact ties in condition (b)
# must not pass on rounding noise
TIE_SLACK = 1e-12

SparseVector = dict


class WeightStream:
    """Lazily pulled weights with cached values and compensated prefix sums.

    ``source`` is an iterable of weights or a function of the 1-based index.
    Pulling more than ``cap`` values, or exhausting a finite source, raises
    Stalled. Single consumer; not safe for concurrent use.
    """

    def __init__(self, source: Iterable[float] | Callable[[int], float], cap: int = DEFAULT_CAP):
        if callable(source):
            source = map(source, itertools.count(1))
        self._it = iter(source)
        self.cap = cap
        self.values: list[float] = []
        self._prefix = [0.0]
        self._sum = 0.0
        self._comp = 0.0

    @classmethod
    def constant(cls, value: float, cap: int = DEFAULT_CAP) -> "WeightStream":
        return cls(itertools.repeat(float(value)), cap)

    @classmethod
    def ratio(cls, cap: int = DEFAULT_CAP) -> "WeightStream":
        """``c_i = i / (i + 1)``."""
        return cls(lambda i: i / (i + 1), cap)

    @classmethod
    def from_values(cls, values: Iterable[float], cap: int = DEFAULT_CAP) -> "WeightStream":
        return cls(list(values), cap)

    def __len__(self) -> int:
        return len(self.values)

    def _pull(self) -> None:
        if len(self.values) >= self.cap:
            raise Stalled(len(self.values))
        try:
            v = float(next(self._it))
        except StopIteration:
            raise Stalled(len(self.values), f"weight stream exhausted after {len(self.values)} values") from None
        if not 0.0 < v <= 1.0:
            raise InputError(f"stream weight #{len(self.values) + 1} = {v} is outside (0, 1]")
        self.values.append(v)
        # Neumaier summation keeps the prefix sums within an ulp or so
        s = self._sum
        t = s + v
        self._comp += (s - t) + v if abs(s) >= v else (v - t) + s
        self._sum = t
        self._prefix.append(t + self._comp)

    def extend_to(self, m: int) -> None:
        while len(self.values) < m:
            self._pull()

    def value(self, i: int) -> float:
        """``c_i``, 1-based."""
        self.extend_to(i)
        return self.values[i - 1]

    def prefix_sum(self, m: int) -> float:
        """``c_1 + ... + c_m``."""
        self.extend_to(m)
        return self._prefix[m]

    def deficit(self, m: int) -> float:
        """``d(m) = (1 - c_1) + ... + (1 - c_m)``."""
        return m - self.prefix_sum(m)

    def threshold(self, n: int) -> int:
        """``s(n)``: the least ``m`` with ``c_1 + ... + c_m > n``."""
        while self._prefix[-1] <= n:
            self._pull()
        return bisect_right(self._prefix, n)

    def residual(self, n: int) -> float:
        return self._prefix[self.threshold(n)] - n

    def gap(self, n: int) -> int:
        return self.threshold(n) - n

    def first_deficit_above(self, target: float, start: int, slack_rel: float = 0.0) -> int:
        """Least ``m >= start`` with ``d(m) > target + slack_rel * m``."""
        m = start
        while self.deficit(m) <= target + slack_rel * m:
            m += 1
        return m


@dataclass(frozen=True)
class BlockPlan:
    """Bookkeeping for block ``index``; ``prev_*`` describe block ``index - 1``."""

    index: int
    n: int
    s: int
    r: float
    g: int
    prev_n: int
    prev_s: int
    prev_r: float
    prev_g: int

    @property
    def width(self) -> int:
        """``n_i - n_{i-1}``."""
        return self.n - self.prev_n

    @property
    def weight_range(self) -> tuple[int, int]:
        """1-based inclusive range of stream indices assigned to the block."""
        return self.prev_s + 1, self.s

    @property
    def coordinates(self) -> range:
        """0-based coordinates ``n_{i-1} .. n_i`` carried by the block."""
        return range(self.prev_n, self.n + 1)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "n": self.n,
            "s": self.s,
            "r": self.r,
            "g": self.g,
            "weight_range": list(self.weight_range),
        }


_ORIGIN = BlockPlan(0, 0, 0, 0.0, 0, 0, 0, 0.0, 0)


def block_plan(w: WeightStream) -> Iterator[BlockPlan]:
    """Unbounded sequence of greedy block plans (smallest admissible ``n_i``).

    Both conditions are monotone in ``n_i``: condition (b) fixes a lower bound
    through the first index where the deficit has grown by more than 2, and
    condition (a) is then checked upward from there. Condition (b) is tested
    with a relative slack of ``TIE_SLACK`` so that exact ties, which it
    excludes, are not admitted through rounding.
    """
    prev = _ORIGIN
    for index in itertools.count(1):
        base = w.deficit(prev.s)
        m = w.first_deficit_above(base + 2.0, prev.s + 1, TIE_SLACK)
        n = prev.n + max(m - prev.s - 1, 1)
        while w.gap(n) < prev.g + 1:
            n += 1
        s = w.threshold(n)
        plan = BlockPlan(index, n, s, w.prefix_sum(s) - n, s - n, prev.n, prev.s, prev.r, prev.g)
        yield plan
        prev = plan


@dataclass(frozen=True)
class FiniteBlock:
    """The diagonal operator ``B_i`` on ``plan.coordinates`` and its weights."""

    plan: BlockPlan
    diagonal: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, plan: BlockPlan, w: WeightStream) -> "FiniteBlock":
        diagonal = np.ones(plan.width + 1)
        diagonal[0] = 1.0 - plan.prev_r
        diagonal[-1] = plan.r
        w.extend_to(plan.s)
        return cls(plan, diagonal, np.array(w.values[plan.prev_s:plan.s]))

    @property
    def offset(self) -> int:
        return self.plan.prev_n

    @property
    def trace(self) -> float:
        return fsum(self.diagonal)

    def to_matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True)
class BlockResult:
    plan: BlockPlan
    block: FiniteBlock
    terms: list[tuple[float, SparseVector]]
    decomposition: RankOneDecomposition


def check_block(block: FiniteBlock) -> None:
    """Runtime check of the inequality that makes the block decomposable.

    The first ``width + 1`` assigned weights must sum to less than
    ``width - 1``; it follows from conditions (a) and (b).
    """
    p = block.plan
    head = fsum(block.weights[: p.width + 1])
    if not (len(block.weights) >= p.width + 1 and head < p.width - 1):
        raise BlockInfeasible(f"block {p.index}: leading weights sum to {head}, need < {p.width - 1}")


def decompose_block(block: FiniteBlock, tol: Tolerances = DEFAULT_TOL) -> BlockResult:
    """Decompose one block; terms come back in stream order with global coordinates."""
    check_block(block)
    state = SpectralState.from_diagonal(block.diagonal, tol)
    try:
        d = decompose(state, block.weights, tol)
    except Infeasible as exc:
        raise BlockInfeasible(f"block {block.plan.index} is not decomposable: {exc.report}") from exc
    terms: list = [None] * len(d)
    for q, pos in enumerate(d.order):
        x = d.vectors[q]
        support = np.flatnonzero(x)
        terms[pos] = (float(d.weights[q]), {int(j) + block.offset: float(x[j]) for j in support})
    return BlockResult(block.plan, block, terms, d)


def identity_blocks(
    w: WeightStream,
    blocks: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> Iterator[BlockResult]:
    """Decomposed blocks in order; stops after ``blocks`` blocks if given.

    Raises Stalled before decomposing a block wider than ``max_width``.
    """
    plans = block_plan(w)
    if blocks is not None:
        plans = itertools.islice(plans, blocks)
    for plan in plans:
        if plan.width > max_width:
            raise Stalled(len(w), f"block {plan.index} has width {plan.width}, above max_width={max_width}")
        yield decompose_block(FiniteBlock.build(plan, w), tol)


def identity_stream(
    w: WeightStream,
    blocks: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> Iterator[tuple[float, SparseVector]]:
    """Terms ``(c_i, x_i)`` in stream order with ``sum c_i x_i x_i^T = I`` strongly.

    After the terms of block ``i`` the running sum is exactly
    ``E_1 + ... + E_{n_i} + r(n_i) E_{n_i+1}``.
    """
    for result in identity_blocks(w, blocks, tol, max_width):
        yield from result.terms


def partial_sum(terms: Iterable[tuple[float, SparseVector]], dim: int) -> np.ndarray:
    """Dense ``dim x dim`` leading corner of ``sum c x x^T`` for sparse terms."""
    out = np.zeros((dim, dim))
    for c, x in terms:
        idx = np.array([j for j in x if j < dim], dtype=int)
        if idx.size:
            vals = np.array([x[j] for j in idx])
            out[np.ix_(idx, idx)] += c * np.outer(vals, vals)
    return out


def rescaled_decomposition(b, c, alpha: float, tol: Tolerances = DEFAULT_TOL) -> RankOneDecomposition:
    """Decompose ``alpha * b`` with weights ``alpha * c`` and report weights ``c``.

    The unit vectors serve both problems; this is the scaling step used to
    move between operator norms, on finite matrices only.
    """
    if not alpha > 0:
        raise InputError(f"scale must be positive, got {alpha}")
    c = np.asarray(c, dtype=float)
    d = decompose_matrix(alpha * np.asarray(b, dtype=float), alpha * c, tol)
    return d.with_weights(c[d.order])
