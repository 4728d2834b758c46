"""Dense complex matrix and vector primitives.

Matrices are plain numpy arrays of dtype complex128, row-major, with
``rows >= 1`` and ``cols >= 1``. All operations are pure functions; no
internal state is shared, so everything here is safe to call from
concurrent contexts.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError


def as_matrix(data) -> np.ndarray:
    """Coerce *data* to a validated 2-D complex128 array.

    Raises ValidationError for empty dimensions or non-finite entries.
    """
    a = np.asarray(data, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"matrix dimensions must be >= 1, got {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return a


def as_vector(data) -> np.ndarray:
    """Coerce *data* to a validated 1-D complex128 array."""
    v = np.asarray(data, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got ndim={v.ndim}")
    if v.shape[0] < 1:
        raise DimensionError("vector length must be >= 1")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise ValidationError("vector contains NaN or Inf entries")
    return v


def matmul(a, b) -> np.ndarray:
    """Matrix product a @ b with shape checking."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            f"inner dimensions {a.shape[1]} != {b.shape[0]}"
        )
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T.copy()


def fro_norm(a) -> float:
    """Frobenius norm, sqrt(sum |a_ij|^2)."""
    a = as_matrix(a)
    return float(np.sqrt(np.sum(a.real * a.real + a.imag * a.imag)))


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)
