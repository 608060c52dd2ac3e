"""Small dense complex linear algebra for desk-scale quantum problems.

Everything operates on plain ``numpy`` arrays (``complex128``). Matrices are
at most 64-dimensional; clarity and determinism are preferred over speed.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
PAULI = (PAULI_X, PAULI_Y, PAULI_Z)

STRUCTURAL_TOL = 1e-9
MAX_DIM = 64

# Columns whose Gram-Schmidt residual falls below this are linearly
# dependent on the already accepted ones and get skipped.
COMPLETION_RESIDUAL_TOL = 1e-8


def as_matrix(m, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce to a finite complex matrix, optionally enforcing a shape."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if shape is not None and a.shape != shape:
        raise ValueError(f"expected a {shape[0]}x{shape[1]} matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def is_hermitian(m, tol: float = STRUCTURAL_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return float(np.max(np.abs(a - a.conj().T))) <= tol


def is_unitary(m, tol: float = STRUCTURAL_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return float(np.max(np.abs(a.conj().T @ a - eye))) <= tol


def is_psd(m, tol: float = STRUCTURAL_TOL) -> bool:
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        return False
    return float(np.min(np.linalg.eigvalsh(a))) >= -tol


class EigResult(NamedTuple):
    """Hermitian eigendecomposition: ascending eigenvalues, orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class Svd2xN(NamedTuple):
    """Decomposition A = U @ diag(sigma) @ W^dagger of a 2 x n matrix.

    ``sigma`` is stored ascending so that sigma[i] pairs with the i-th
    column of both ``u`` and ``w``.
    """

    u: np.ndarray
    sigma: np.ndarray
    w: np.ndarray


def pauli_coefficients(h, tol: float = STRUCTURAL_TOL) -> tuple[float, np.ndarray]:
    """Split a 2x2 Hermitian matrix into h = g0*1 + g . sigma with real g."""
    a = as_matrix(h, (2, 2))
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    g0 = 0.5 * (a[0, 0] + a[1, 1]).real
    gx = a[1, 0].real
    gy = a[1, 0].imag
    gz = 0.5 * (a[0, 0] - a[1, 1]).real
    return g0, np.array([gx, gy, gz])


def mat_exp_su2(h, t: float, tol: float = STRUCTURAL_TOL) -> np.ndarray:
    """Unitary exp(-i h t) for a 2x2 Hermitian h (hbar = 1), in closed form.

    With h = g0*1 + g . sigma this is
    exp(-i g0 t) * (cos(a t) 1 - i sin(a t) (g/a) . sigma), a = |g|;
    a = 0 collapses to the global phase times the identity.
    """
    tf = float(t)
    if not math.isfinite(tf):
        raise ValueError("time must be finite")
    g0, g = pauli_coefficients(h, tol)
    phase = np.exp(-1j * g0 * tf)
    alpha = float(np.linalg.norm(g))
    if alpha == 0.0:
        return phase * np.eye(2, dtype=np.complex128)
    axis = g / alpha
    n_sigma = axis[0] * PAULI_X + axis[1] * PAULI_Y + axis[2] * PAULI_Z
    return phase * (
        math.cos(alpha * tf) * np.eye(2, dtype=np.complex128)
        - 1j * math.sin(alpha * tf) * n_sigma
    )


def _fix_column_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its first component above 1e-12 is real positive."""
    out = np.array(vecs, dtype=np.complex128)
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            pivot = col[idx[0]]
            out[:, j] = col * (pivot.conj() / abs(pivot))
    return out


def hermitian_eig(m, tol: float = STRUCTURAL_TOL) -> EigResult:
    """Eigendecomposition of a Hermitian matrix (dimension <= 64).

    Eigenvalues come back ascending; eigenvector column phases follow the
    first-nonzero-component-real-positive convention for determinism.
    """
    a = as_matrix(m)
    d = a.shape[0]
    if a.shape[1] != d:
        raise ValueError("matrix must be square")
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(a)
    return EigResult(vals.astype(float), _fix_column_phases(vecs))


def complete_orthonormal(columns: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    """Extend orthonormal vectors to a full basis of C^n by Gram-Schmidt.

    Candidate computational basis vectors are processed in index order;
    residuals below COMPLETION_RESIDUAL_TOL are skipped.
    """
    basis = [np.asarray(c, dtype=np.complex128) for c in columns]
    added: list[np.ndarray] = []
    for j in range(n):
        if len(basis) == n:
            break
        v = np.zeros(n, dtype=np.complex128)
        v[j] = 1.0
        for b in basis:
            v = v - np.vdot(b, v) * b
        norm = float(np.linalg.norm(v))
        if norm < COMPLETION_RESIDUAL_TOL:
            continue
        v = v / norm
        basis.append(v)
        added.append(v)
    if len(basis) != n:
        raise RuntimeError("failed to complete an orthonormal basis")
    return added


def svd_2xn(a) -> Svd2xN:
    """Singular value decomposition of a 2 x n matrix, n >= 2.

    Built by diagonalizing the 2x2 Gram matrix A A^dagger for U and the
    singular values, then w_i = A^dagger u_i / sigma_i; the kernel part of W
    is completed by Gram-Schmidt over the computational basis.
    """
    mat = as_matrix(a)
    if mat.shape[0] != 2 or mat.shape[1] < 2:
        raise ValueError(f"expected a 2 x n matrix with n >= 2, got {mat.shape}")
    n = mat.shape[1]
    gram = mat @ mat.conj().T
    vals, u = np.linalg.eigh(gram)
    u = _fix_column_phases(u)
    sigma = np.sqrt(np.clip(vals.real, 0.0, None))
    ah = mat.conj().T
    cols: list[np.ndarray | None] = []
    for i in range(2):
        if sigma[i] > 1e-12:
            col = ah @ u[:, i] / sigma[i]
            cols.append(col / np.linalg.norm(col))
        else:
            cols.append(None)
    fills = iter(complete_orthonormal([c for c in cols if c is not None], n))
    w_cols = [next(fills) if c is None else c for c in cols]
    w_cols.extend(fills)
    return Svd2xN(u, sigma, np.column_stack(w_cols))


def kron(a, b) -> np.ndarray:
    """Kronecker product with the standard block layout (block (i,j) = a_ij * b)."""
    return np.kron(as_matrix(a), as_matrix(b))
