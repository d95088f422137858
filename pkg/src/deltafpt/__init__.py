"""Exact shortest-vector and integer-programming solvers for integer
matrices with bounded n x n minors."""

from .errors import DeltaFptError
from .linalg import IntMatrix, hnf_normalize, max_rank_minor, snf

__all__ = ["DeltaFptError", "IntMatrix", "hnf_normalize", "max_rank_minor", "snf"]
__version__ = "0.1.0"
