"""Small dense linear-algebra layer underneath the recurrent cells.

Vectors are nonempty 1-D float64 numpy arrays; matrices are nonempty 2-D
row-major float64 arrays. Every operation validates shapes, never mutates
its inputs, and returns a fresh array. Sizes here top out around 100x100,
so plain numpy calls are all the machinery required.
"""

from __future__ import annotations

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray


def _check_vector(v: Vector, name: str) -> None:
    if not isinstance(v, np.ndarray) or v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")


def _check_matrix(m: Matrix, name: str) -> None:
    if not isinstance(m, np.ndarray) or m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array")


def matvec(m: Matrix, v: Vector) -> Vector:
    """Return ``m @ v`` for an (r, c) matrix and a length-c vector."""
    _check_matrix(m, "m")
    _check_vector(v, "v")
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"matvec: matrix {m.shape} incompatible with vector ({v.shape[0]},)")
    return m @ v


def matvec_transposed(m: Matrix, v: Vector) -> Vector:
    """Return ``m.T @ v`` for an (r, c) matrix and a length-r vector."""
    _check_matrix(m, "m")
    _check_vector(v, "v")
    if m.shape[0] != v.shape[0]:
        raise ValueError(
            f"matvec_transposed: matrix {m.shape} incompatible with vector ({v.shape[0]},)"
        )
    return m.T @ v


def hadamard(a: Vector, b: Vector) -> Vector:
    """Elementwise product of two equal-length vectors."""
    _check_vector(a, "a")
    _check_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"hadamard: lengths differ ({a.shape[0]} vs {b.shape[0]})")
    return a * b


def axpy(alpha: float, x: Vector, y: Vector) -> Vector:
    """Return ``alpha * x + y`` without touching x or y."""
    _check_vector(x, "x")
    _check_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"axpy: lengths differ ({x.shape[0]} vs {y.shape[0]})")
    return alpha * x + y


def outer(a: Vector, b: Vector) -> Matrix:
    """Outer product: result[i, j] = a[i] * b[j], shape (len(a), len(b))."""
    _check_vector(a, "a")
    _check_vector(b, "b")
    return np.outer(a, b)
