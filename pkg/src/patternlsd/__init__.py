"""Limiting spectral moments of X X^T and patterned Gram matrices, with finite-n oracles and simulations."""

__version__ = "0.1.0"

from .circuits import LinkKind, count_circuits, finite_ratio
from .combinatorics import CumulantSequence, Word, classify
from .limits import LimitResult, MCConfig, word_limit
from .moments import MomentResult, PatternModel, mp_moment, s_moment, sa_moment

__all__ = [
    "CumulantSequence",
    "LimitResult",
    "LinkKind",
    "MCConfig",
    "MomentResult",
    "PatternModel",
    "Word",
    "__version__",
    "classify",
    "count_circuits",
    "finite_ratio",
    "mp_moment",
    "s_moment",
    "sa_moment",
    "word_limit",
]
