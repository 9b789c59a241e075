"""Equality saturation with bond nodes for combinational circuits."""

from ._core import (
    DEFAULT_SEED,
    BondsatError,
    check_equivalence,
    circuit_dot,
    evaluate,
    normalize,
    optimize,
    stats,
)

__all__ = [
    "DEFAULT_SEED",
    "BondsatError",
    "check_equivalence",
    "circuit_dot",
    "evaluate",
    "normalize",
    "optimize",
    "stats",
]
