"""Qubit and environment states: Bloch conversions, partial trace, trace distance."""

from __future__ import annotations

import numpy as np

from .linalg import PAULI, PAULI_X, PAULI_Y, PAULI_Z, as_matrix, is_hermitian, is_psd

BLOCH_TOL = 1e-10


def as_ket(psi, dim: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """Coerce to a normalized state vector (norm 1 within ``tol``)."""
    v = np.asarray(psi, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a state vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state vector contains non-finite entries")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError("state vector is not normalized")
    return v


def is_density_matrix(
    rho,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    psd_tol: float = 1e-9,
) -> bool:
    """Hermitian within 1e-10, unit trace within 1e-10, PSD within 1e-9.

    The PSD tolerance is looser on purpose: renormalizing a near-zero
    probability measurement branch amplifies rounding in the spectrum.
    """
    a = as_matrix(rho)
    if a.shape[0] != a.shape[1]:
        return False
    if not is_hermitian(a, herm_tol):
        return False
    if abs(np.trace(a).real - 1.0) > trace_tol or abs(np.trace(a).imag) > trace_tol:
        return False
    return is_psd(a, psd_tol)


def require_density_matrix(rho, dim: int | None = None) -> np.ndarray:
    a = as_matrix(rho)
    if dim is not None and a.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} density matrix, got {a.shape}")
    if not is_density_matrix(a):
        raise ValueError("matrix is not a valid density matrix")
    return a


def bloch_to_density(r) -> np.ndarray:
    """Density matrix (1 + r . sigma) / 2 for a Bloch vector inside the unit ball."""
    vec = np.asarray(r, dtype=float)
    if vec.shape != (3,):
        raise ValueError("Bloch vector must have three real components")
    if np.linalg.norm(vec) > 1.0 + BLOCH_TOL:
        raise ValueError("Bloch vector lies outside the unit ball")
    rho = 0.5 * (
        np.eye(2, dtype=np.complex128)
        + vec[0] * PAULI_X
        + vec[1] * PAULI_Y
        + vec[2] * PAULI_Z
    )
    return rho


def density_to_bloch(rho) -> np.ndarray:
    """Inverse of :func:`bloch_to_density`: r_i = tr(rho sigma_i)."""
    a = as_matrix(rho, (2, 2))
    return np.array([np.trace(a @ p).real for p in PAULI])


def ket_to_bloch(psi) -> np.ndarray:
    """Bloch vector of a pure qubit state."""
    v = as_ket(psi, 2)
    return np.array([np.vdot(v, p @ v).real for p in PAULI])


def ket_from_bloch_angles(theta: float, phi: float) -> np.ndarray:
    """Pure qubit state (cos(theta/2), e^{i phi} sin(theta/2))."""
    return np.array(
        [np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)],
        dtype=np.complex128,
    )


def orthogonal_ket(psi) -> np.ndarray:
    """The unique (up to phase) qubit state orthogonal to ``psi``."""
    v = as_ket(psi, 2)
    return np.array([-v[1].conj(), v[0].conj()])


def partial_trace_env(rho_se, env_dim: int) -> np.ndarray:
    """Trace out the environment of a qubit (x) environment operator.

    The system qubit is always the first tensor factor, the n-dimensional
    environment the second; the input dimension must factorize as 2 * n.
    """
    a = as_matrix(rho_se)
    n = int(env_dim)
    if n < 1 or a.shape != (2 * n, 2 * n):
        raise ValueError(
            f"operator of shape {a.shape} does not factorize as 2 x {n} system/environment"
        )
    return np.einsum("ikjk->ij", a.reshape(2, n, 2, n))


def trace_norm_distance(a, b) -> float:
    """Distance (1/2) sum |eigenvalues(a - b)| between equal-sized Hermitian operators.

    Note the 1/2 prefactor: for density matrices this is the usual trace
    distance, ranging from 0 (equal) to 1 (orthogonal support).
    """
    ma = as_matrix(a)
    mb = as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
