"""Rank-one decompositions of positive operators and frames with prescribed norms."""

__version__ = "0.1.0"

from .decomposer import (
    FrameSet,
    SpectralState,
    decompose,
    decompose_matrix,
    lemma_step,
    mixing_parameter,
    synthesize_frame,
    tight_frame,
)
from .errors import *  # noqa: F401,F403
from .feasibility import FeasibilityReport, WeightSequence, check_ffi, check_finite
from .planar import PolygonSolution, decompose_2d, polygon_angles
from .spectral import DEFAULT_TOL, RankOneDecomposition, Spectrum, Tolerances, as_symmetric, assemble, eigh, frame_bounds
from .streaming import BlockPlan, FiniteBlock, WeightStream, block_plan, identity_blocks, identity_stream, partial_sum
