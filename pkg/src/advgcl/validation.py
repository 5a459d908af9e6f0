"""Input validation helpers used across the package.

All matrices are dense float64 numpy arrays; these helpers centralize the
structural checks (symmetry, zero diagonal, value ranges, finiteness) so the
algorithm code can state its preconditions in one line.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, DomainError


def as_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} contains non-finite entries")


def check_square(arr: np.ndarray, name: str) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractViolationError(f"{name} must be square, got shape {arr.shape}")


def check_symmetric(arr: np.ndarray, name: str) -> None:
    check_square(arr, name)
    if not np.array_equal(arr, arr.T):
        raise ContractViolationError(f"{name} must be symmetric")


def check_zero_diagonal(arr: np.ndarray, name: str) -> None:
    if np.any(np.diagonal(arr) != 0.0):
        raise ContractViolationError(f"{name} must have a zero diagonal")


def check_range(arr: np.ndarray, lo: float, hi: float, name: str) -> None:
    if arr.size and (arr.min() < lo or arr.max() > hi):
        raise ContractViolationError(f"{name} entries must lie in [{lo}, {hi}]")


def check_binary(arr: np.ndarray, name: str) -> None:
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ContractViolationError(f"{name} must be binary (entries in {{0, 1}})")


def check_probability(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must be a probability in [0, 1], got {p}")


def check_adjacency(arr: np.ndarray, name: str = "adjacency") -> None:
    """Symmetric, zero-diagonal, entries in [0, 1] (relaxed graphs allowed)."""
    check_symmetric(arr, name)
    check_zero_diagonal(arr, name)
    check_range(arr, 0.0, 1.0, name)
