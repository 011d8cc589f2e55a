"""Dense complex linear algebra on numpy arrays.

Matrices and vectors are plain ``complex128`` ndarrays; scalars are Python
``complex``. The helpers here add the dimension checks the rest of the
package relies on and nothing else.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

CMatrix = np.ndarray
CVector = np.ndarray


def as_matrix(m) -> CMatrix:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("matrix has non-finite entries")
    return a


def as_vector(v) -> CVector:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("vector has non-finite entries")
    return a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product. Works for vectors as well as matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def mat_apply(m, v) -> CVector:
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot apply {m.shape[0]}x{m.shape[1]} matrix to vector of dim {v.shape[0]}")
    return m @ v


def adjoint(m) -> CMatrix:
    return as_matrix(m).conj().T


def trace(m) -> complex:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"trace of non-square {m.shape[0]}x{m.shape[1]} matrix")
    return complex(np.trace(m))


def frobenius_close(a, b, tol: float) -> bool:
    """True iff the largest entrywise absolute difference is at most ``tol``.

    The name is historical; the comparison is the max-entry norm.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= tol)


def is_unitary(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return frobenius_close(m @ m.conj().T, np.eye(m.shape[0]), tol)


def num_qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n
