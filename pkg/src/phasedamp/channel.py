"""Single-qubit phase-damping channels generated by relative Hamiltonians.

A coupling of the form H = |0><0| (x) h1 + |1><1| (x) h2 dephases the qubit
without touching populations. Starting the n-dimensional environment in a
pure state psi0, the channel at time t is fully described by the overlap
C(t) = <psi2(t)|psi1(t)> of the two relative states psi_k(t) = exp(-i h_k t) psi0:
the coherence rho_12 is multiplied by C, rho_21 by its conjugate, and the
diagonal is untouched. This module builds those channels, their Kraus sets,
the Choi matrix, and the two-branch random-unitary (RU) decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, hermitian_eig, is_hermitian, is_unitary, mat_exp_su2
from .states import as_ket

OVERLAP_TOL = 1e-10

# Overlap magnitudes this close to 1 make the channel a single unitary
# branch; downstream code skips the zero-probability branch entirely.
UNIT_OVERLAP_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DephasingModel:
    """Relative Hamiltonians h1, h2 plus the initial environment state psi0.

    Hamiltonians must be Hermitian within 1e-10 (units hbar = 1) and psi0
    normalized; instances are immutable and safe to share across threads.
    """

    h1: np.ndarray
    h2: np.ndarray
    psi0: np.ndarray

    def __post_init__(self):
        h1 = as_matrix(self.h1)
        n = h1.shape[0]
        h2 = as_matrix(self.h2, (n, n))
        if h1.shape != (n, n):
            raise ValueError("h1 must be square")
        if not (is_hermitian(h1, 1e-10) and is_hermitian(h2, 1e-10)):
            raise ValueError("relative Hamiltonians must be Hermitian within 1e-10")
        psi0 = as_ket(self.psi0, n)
        object.__setattr__(self, "h1", _readonly(h1))
        object.__setattr__(self, "h2", _readonly(h2))
        object.__setattr__(self, "psi0", _readonly(psi0))

    @property
    def env_dim(self) -> int:
        return self.psi0.shape[0]


@dataclass(frozen=True)
class Overlap:
    """Relative-state overlap C = <psi2|psi1> at interaction time t."""

    value: complex
    t: float = 0.0

    def __post_init__(self):
        v = complex(self.value)
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise ValueError("overlap must be finite")
        if abs(v) > 1.0 + OVERLAP_TOL:
            raise ValueError(f"overlap magnitude {abs(v)} exceeds 1")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class KrausSet:
    """Diagonal Kraus operators L_beta of a phase-damping channel.

    Each operator is diag(<chi_beta|psi1>, <chi_beta|psi2>) for some
    orthonormal environment basis {chi_beta}; completeness
    sum L^dagger L = 1 is enforced within 1e-10.
    """

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(_readonly(as_matrix(op, (2, 2))) for op in self.operators)
        if not ops:
            raise ValueError("Kraus set is empty")
        for op in ops:
            if max(abs(op[0, 1]), abs(op[1, 0])) > 1e-10:
                raise ValueError("phase-damping Kraus operators must be diagonal")
        total = sum(op.conj().T @ op for op in ops)
        if float(np.max(np.abs(total - np.eye(2)))) > 1e-10:
            raise ValueError("Kraus set is not complete (sum L^dagger L != 1)")
        object.__setattr__(self, "operators", ops)

    def __len__(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class RUDecomposition:
    """Two-branch random-unitary decomposition p1 U1 . U1^dagger + p2 U2 . U2^dagger."""

    p1: float
    p2: float
    u1: np.ndarray = field(repr=False)
    u2: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.p1 < 0.0 or self.p2 < 0.0 or abs(self.p1 + self.p2 - 1.0) > 1e-12:
            raise ValueError("branch probabilities must be nonnegative and sum to 1")
        u1 = as_matrix(self.u1, (2, 2))
        u2 = as_matrix(self.u2, (2, 2))
        if not (is_unitary(u1, 1e-10) and is_unitary(u2, 1e-10)):
            raise ValueError("branch operators must be unitary within 1e-10")
        object.__setattr__(self, "u1", _readonly(u1))
        object.__setattr__(self, "u2", _readonly(u2))


def propagator(h, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h: closed form for 2x2, spectral otherwise."""
    a = as_matrix(h)
    if a.shape == (2, 2):
        return mat_exp_su2(a, t, 1e-10)
    vals, vecs = hermitian_eig(a, 1e-10)
    return (vecs * np.exp(-1j * vals * float(t))) @ vecs.conj().T


def env_propagators(model: DephasingModel, t: float) -> tuple[np.ndarray, np.ndarray]:
    """exp(-i h1 t) and exp(-i h2 t) for the model's relative Hamiltonians."""
    return propagator(model.h1, t), propagator(model.h2, t)


def relative_states(model: DephasingModel, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Environment states exp(-i h_k t) psi0 conditioned on the qubit basis."""
    u1, u2 = env_propagators(model, t)
    return u1 @ model.psi0, u2 @ model.psi0


def overlap(psi1, psi2, t: float = 0.0) -> Overlap:
    """Overlap <psi2|psi1> of two environment states."""
    v1 = as_ket(psi1)
    v2 = as_ket(psi2, v1.shape[0])
    return Overlap(complex(np.vdot(v2, v1)), t)


def channel_overlap(model: DephasingModel, t: float) -> Overlap:
    """The overlap C(t) determining the channel generated by ``model``."""
    psi1, psi2 = relative_states(model, t)
    return overlap(psi1, psi2, t)


def apply_channel(rho, c: Overlap) -> np.ndarray:
    """Phase-damping action: multiply rho_12 by C, rho_21 by conj(C).

    Diagonal entries are copied through untouched, so the channel is unital
    and the projectors |0><0|, |1><1| are exact fixed points.
    """
    a = as_matrix(rho, (2, 2))
    out = np.array(a)
    out[0, 1] *= c.value
    out[1, 0] *= np.conj(c.value)
    return out


def kraus_from_env_basis(model: DephasingModel, t: float, basis) -> KrausSet:
    """Kraus operators selected by an orthonormal environment basis.

    ``basis`` holds the chi_beta vectors as columns (an n x n unitary);
    operator beta is diag(<chi_beta|psi1>, <chi_beta|psi2>).
    """
    n = model.env_dim
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        chi = as_matrix(basis, (n, n))
    else:
        chi = np.column_stack([as_ket(b, n) for b in basis])
    if float(np.max(np.abs(chi.conj().T @ chi - np.eye(n)))) > 1e-10:
        raise ValueError("environment basis is not orthonormal")
    psi1, psi2 = relative_states(model, t)
    c1 = chi.conj().T @ psi1
    c2 = chi.conj().T @ psi2
    return KrausSet(tuple(np.diag([c1[b], c2[b]]) for b in range(n)))


def apply_kraus(rho, kraus: KrausSet) -> np.ndarray:
    """Operator-sum action sum_beta L_beta rho L_beta^dagger."""
    a = as_matrix(rho, (2, 2))
    out = np.zeros((2, 2), dtype=np.complex128)
    for op in kraus.operators:
        out += op @ a @ op.conj().T
    return out


def choi_matrix(c: Overlap) -> np.ndarray:
    """4x4 Choi matrix of the channel: the channel applied to the matrix units."""
    out = np.zeros((4, 4), dtype=np.complex128)
    out[0, 0] = 1.0
    out[3, 3] = 1.0
    out[0, 3] = c.value
    out[3, 0] = np.conj(c.value)
    return out


def overlap_phase(value: complex) -> complex:
    """C / |C| with the zero-overlap limit fixed to +1 for determinism."""
    mag = abs(value)
    if mag <= 1e-15:
        return 1.0 + 0.0j
    return value / mag


def ru_decomposition(c: Overlap) -> RUDecomposition:
    """Random-unitary decomposition read off the Choi eigenvectors.

    Branch 1 carries probability (1 - |C|)/2 with U1 = diag(-C/|C|, 1),
    branch 2 carries (1 + |C|)/2 with U2 = diag(C/|C|, 1). When |C| is
    within 1e-12 of 1 the first branch is reported with probability
    exactly 0 so callers can skip it.
    """
    mag = abs(c.value)
    phase = overlap_phase(c.value)
    if mag >= 1.0 - UNIT_OVERLAP_TOL:
        p1, p2 = 0.0, 1.0
    else:
        p1, p2 = 0.5 * (1.0 - mag), 0.5 * (1.0 + mag)
    u1 = np.diag([-phase, 1.0]).astype(np.complex128)
    u2 = np.diag([phase, 1.0]).astype(np.complex128)
    return RUDecomposition(p1, p2, u1, u2)


def apply_ru(rho, ru: RUDecomposition) -> np.ndarray:
    """Mixture p1 U1 rho U1^dagger + p2 U2 rho U2^dagger."""
    a = as_matrix(rho, (2, 2))
    return ru.p1 * (ru.u1 @ a @ ru.u1.conj().T) + ru.p2 * (ru.u2 @ a @ ru.u2.conj().T)


__all__ = [
    "DephasingModel",
    "Overlap",
    "KrausSet",
    "RUDecomposition",
    "propagator",
    "env_propagators",
    "relative_states",
    "overlap",
    "channel_overlap",
    "apply_channel",
    "kraus_from_env_basis",
    "apply_kraus",
    "choi_matrix",
    "overlap_phase",
    "ru_decomposition",
    "apply_ru",
]
