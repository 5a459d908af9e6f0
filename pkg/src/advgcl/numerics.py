"""Small numeric utilities: cosine similarity and a finite-difference oracle.

Matrices throughout the package are plain float64 numpy arrays in row-major
order; numpy provides the dense kernels, this module adds the pieces every
gradient test in the repository leans on.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError, NumericError


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two equal-length vectors, clipped to [-1, 1].

    Raises DomainError naming the offending argument when either vector has
    zero Euclidean norm.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise DomainError(f"vectors must have equal length, got {u.size} and {v.size}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0:
        raise DomainError("first argument has zero norm")
    if nv == 0.0:
        raise DomainError("second argument has zero norm")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of a scalar function of an array.

    Probes (f(x + h e) - f(x - h e)) / (2 h) entry by entry; the result has
    the shape of x. Raises NumericError if any probe evaluates non-finite.
    """
    if h <= 0:
        raise DomainError(f"step size must be positive, got {h}")
    x = np.array(x, dtype=np.float64)  # private working copy; probes mutate it
    grad = np.empty_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        up = f(x)
        flat[k] = orig - h
        down = f(x)
        flat[k] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NumericError(f"function value non-finite at probe index {k}")
        gflat[k] = (up - down) / (2.0 * h)
    return grad
