"""Correction of phase damping driven by a mixed two-level environment.

The environment starts in rho_E = w |psi0><psi0| + (1-w) |psi0_perp><psi0_perp|
and couples through H = k sigma_z (x) sigma_z + 1 (x) Gamma . sigma, i.e. the
relative Hamiltonians are h_{1,2} = +-k sigma_z + Gamma . sigma. The channel
keeps the pure-state form but with the effective coefficient
w C + (1-w) C_perp, where C_perp is the overlap of the relative states grown
out of psi0_perp. Because both Hamiltonians are traceless, C_perp is exactly
the complex conjugate of C.

A corrector who pretends the environment is pure builds the observable and
conditional unitaries either from psi0 (outcomes rho_{alpha,c}) or from
psi0_perp (outcomes sigma_{alpha,c}). Two ensemble protocols are compared:
rho_c averages the psi0-apparatus outcomes with the measured probabilities,
and rho_tilde_c = w rho_c + (1-w) sigma_c mirrors the mixture weights in the
choice of apparatus. Near times where the channel almost returns to the
identity (C = 1 - i*eps with eps^2 negligible) the five trace distances to
the input admit closed forms, implemented in :func:`analytic_distances`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import PAULI_X, PAULI_Y, PAULI_Z, as_matrix, pauli_coefficients
from .states import (
    as_ket,
    ket_from_bloch_angles,
    ket_to_bloch,
    orthogonal_ket,
    require_density_matrix,
    trace_norm_distance,
)
from .channel import (
    DephasingModel,
    Overlap,
    UNIT_OVERLAP_TOL,
    overlap_phase,
    _readonly,
    apply_channel,
    channel_overlap,
    kraus_from_env_basis,
    ru_decomposition,
)
from .correction import (
    correct_state,
    correction_basis,
    joint_evolve,
    measure_env,
    stack_kraus_diagonals,
)

# Mixture weights closer than this to 0 or 1 are treated as pure environments.
PURE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MixedEnvModel:
    """Mixture weight, coupling (k, Gamma), and the two environment states."""

    w: float
    k: float
    gamma: np.ndarray
    psi0: np.ndarray
    psi0_perp: np.ndarray

    def __post_init__(self):
        w = float(self.w)
        if not 0.0 <= w <= 1.0:
            raise ValueError("mixture weight must lie in [0, 1]")
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (3,) or not np.all(np.isfinite(gamma)):
            raise ValueError("Gamma must be a finite real 3-vector")
        psi0 = as_ket(self.psi0, 2)
        perp = as_ket(self.psi0_perp, 2)
        if abs(np.vdot(perp, psi0)) > 1e-12:
            raise ValueError("psi0_perp must be orthogonal to psi0 within 1e-12")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "gamma", _readonly(gamma))
        object.__setattr__(self, "psi0", _readonly(psi0))
        object.__setattr__(self, "psi0_perp", _readonly(perp))

    @classmethod
    def from_bloch_angles(cls, w, k, gamma, theta, phi) -> "MixedEnvModel":
        psi0 = ket_from_bloch_angles(theta, phi)
        return cls(w=w, k=k, gamma=gamma, psi0=psi0, psi0_perp=orthogonal_ket(psi0))

    @property
    def h1(self) -> np.ndarray:
        return self.k * PAULI_Z + self._field()

    @property
    def h2(self) -> np.ndarray:
        return -self.k * PAULI_Z + self._field()

    def _field(self) -> np.ndarray:
        return self.gamma[0] * PAULI_X + self.gamma[1] * PAULI_Y + self.gamma[2] * PAULI_Z

    def pure_model(self, perp: bool = False) -> DephasingModel:
        """The pure-environment model a corrector would assume."""
        psi = self.psi0_perp if perp else self.psi0
        return DephasingModel(h1=self.h1, h2=self.h2, psi0=psi)

    def env_state(self) -> np.ndarray:
        """The mixed initial environment density matrix."""
        return self.w * np.outer(self.psi0, self.psi0.conj()) + (1.0 - self.w) * np.outer(
            self.psi0_perp, self.psi0_perp.conj()
        )


@dataclass(frozen=True)
class OverlapPair:
    """The overlaps C (from psi0) and C_perp (from psi0_perp) at time t."""

    c: complex
    c_perp: complex
    t: float

    def __post_init__(self):
        for name in ("c", "c_perp"):
            v = complex(getattr(self, name))
            if abs(v) > 1.0 + 1e-10:
                raise ValueError(f"{name} magnitude {abs(v)} exceeds 1")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class CorrectedFamily:
    """Per-outcome corrected states and the two ensemble protocols."""

    rho_1c: np.ndarray = field(repr=False)
    rho_2c: np.ndarray = field(repr=False)
    sigma_1c: np.ndarray = field(repr=False)
    sigma_2c: np.ndarray = field(repr=False)
    rho_c: np.ndarray = field(repr=False)
    rho_tilde_c: np.ndarray = field(repr=False)
    p_lambda: tuple[float, float]
    p_mu: tuple[float, float]

    def __post_init__(self):
        if abs(sum(self.p_lambda) - 1.0) > 1e-10 or abs(sum(self.p_mu) - 1.0) > 1e-10:
            raise ValueError("branch probabilities must sum to 1")


@dataclass(frozen=True)
class DistanceReport:
    """Trace distances from the input state to the channel output and the
    four corrected alternatives, all with the 1/2-prefactor norm."""

    t: float
    d_uncorrected: float
    d_rho1c: float
    d_rho2c: float
    d_rhoc: float
    d_rhotildec: float


@dataclass(frozen=True)
class EpsilonRegime:
    """A time where C = 1 - i*eps holds up to the recorded residual |Re C - 1|."""

    t: float
    epsilon: float
    residual: float


def relative_overlaps(model: MixedEnvModel, t: float) -> OverlapPair:
    """C and C_perp for the two families of relative states."""
    c = channel_overlap(model.pure_model(), t)
    c_perp = channel_overlap(model.pure_model(perp=True), t)
    return OverlapPair(c=c.value, c_perp=c_perp.value, t=t)


def effective_overlap(pair: OverlapPair, w: float) -> Overlap:
    """Coefficient w C + (1-w) C_perp of the mixed-environment channel."""
    return Overlap(w * pair.c + (1.0 - w) * pair.c_perp, pair.t)


def overlap_curve(h1, h2, psi0, ts) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized C(t) and C_perp(t) for 2x2 relative Hamiltonians.

    Uses the closed form of the 2x2 exponential: with h_k = g0k + a_k n_k . sigma,
    U2^dagger U1 is a phase times an SU(2) element whose expectation in psi0
    (Bloch vector r) and in the orthogonal state (Bloch vector -r) gives both
    overlaps in one pass. Agrees with the propagator route to rounding.
    """
    ts = np.asarray(ts, dtype=float)
    g01, g1 = pauli_coefficients(as_matrix(h1, (2, 2)), 1e-10)
    g02, g2 = pauli_coefficients(as_matrix(h2, (2, 2)), 1e-10)
    a1 = float(np.linalg.norm(g1))
    a2 = float(np.linalg.norm(g2))
    n1 = g1 / a1 if a1 > 0 else np.array([0.0, 0.0, 1.0])
    n2 = g2 / a2 if a2 > 0 else np.array([0.0, 0.0, 1.0])
    r = ket_to_bloch(psi0)
    c1, s1 = np.cos(a1 * ts), np.sin(a1 * ts)
    c2, s2 = np.cos(a2 * ts), np.sin(a2 * ts)
    scalar = c1 * c2 + s1 * s2 * float(n1 @ n2)
    # (c1 s2 n2 - c2 s1 n1 + s1 s2 n2 x n1) . r, assembled from scalars
    dotted = (
        c1 * s2 * float(n2 @ r)
        - c2 * s1 * float(n1 @ r)
        + s1 * s2 * float(np.cross(n2, n1) @ r)
    )
    phase = np.exp(-1j * (g01 - g02) * ts)
    c = phase * (scalar + 1j * dotted)
    c_perp = phase * (scalar - 1j * dotted)
    return c, c_perp


def corrected_family(model: MixedEnvModel, rho, t: float) -> CorrectedFamily:
    """Run both pure-state correction apparatuses against the mixed truth.

    The joint state is evolved once with the true mixed environment; it is
    then measured with the psi0-derived observable and corrected with the
    psi0-derived unitaries (outcomes rho_{alpha,c}), and likewise with the
    psi0_perp apparatus (outcomes sigma_{alpha,c}). Probabilities are the
    exact measured ones. Overlaps within 1e-12 of unit magnitude make both
    apparatuses a single deterministic inverse, applied without measuring.
    """
    w = model.w
    if min(w, 1.0 - w) < PURE_WEIGHT_TOL:
        raise ValueError(
            "mixture weight is indistinguishable from a pure environment; "
            "use the pure-state pipeline (round_trip) instead"
        )
    sys_rho = require_density_matrix(rho, 2)
    pure0 = model.pure_model()
    pure_perp = model.pure_model(perp=True)
    c = channel_overlap(pure0, t)
    c_perp = channel_overlap(pure_perp, t)

    if abs(c.value) >= 1.0 - UNIT_OVERLAP_TOL:
        pair = OverlapPair(c=c.value, c_perp=c_perp.value, t=t)
        damped = apply_channel(sys_rho, effective_overlap(pair, w))
        u2 = np.diag([overlap_phase(c.value), 1.0])
        v2 = np.diag([overlap_phase(c_perp.value), 1.0])
        rho_corr = u2.conj().T @ damped @ u2
        sigma_corr = v2.conj().T @ damped @ v2
        return CorrectedFamily(
            rho_1c=rho_corr,
            rho_2c=rho_corr,
            sigma_1c=sigma_corr,
            sigma_2c=sigma_corr,
            rho_c=rho_corr,
            rho_tilde_c=w * rho_corr + (1.0 - w) * sigma_corr,
            p_lambda=(0.0, 1.0),
            p_mu=(0.0, 1.0),
        )

    joint = joint_evolve(sys_rho, model.env_state(), model.h1, model.h2, t)
    corrected: dict[bool, dict[int, np.ndarray]] = {}
    measured: dict[bool, tuple[float, float]] = {}
    for perp, pure, cc in ((False, pure0, c), (True, pure_perp, c_perp)):
        ru = ru_decomposition(cc)
        kraus = kraus_from_env_basis(pure, t, np.eye(2, dtype=np.complex128))
        _, obs = correction_basis(stack_kraus_diagonals(kraus), cc)
        outcomes = measure_env(joint, obs)
        by_alpha = {o.alpha: o for o in outcomes}
        corrected[perp] = {a: correct_state(by_alpha[a], ru) for a in (1, 2)}
        measured[perp] = (by_alpha[1].probability, by_alpha[2].probability)

    p_lambda = measured[False]
    p_mu = measured[True]
    rho_c = p_lambda[0] * corrected[False][1] + p_lambda[1] * corrected[False][2]
    sigma_c = p_mu[0] * corrected[True][1] + p_mu[1] * corrected[True][2]
    return CorrectedFamily(
        rho_1c=corrected[False][1],
        rho_2c=corrected[False][2],
        sigma_1c=corrected[True][1],
        sigma_2c=corrected[True][2],
        rho_c=rho_c,
        rho_tilde_c=w * rho_c + (1.0 - w) * sigma_c,
        p_lambda=p_lambda,
        p_mu=p_mu,
    )


def distance_report(rho, family: CorrectedFamily, model: MixedEnvModel, t: float) -> DistanceReport:
    """Trace distances from rho to the channel output and corrected states."""
    sys_rho = require_density_matrix(rho, 2)
    pair = relative_overlaps(model, t)
    damped = apply_channel(sys_rho, effective_overlap(pair, model.w))
    return DistanceReport(
        t=float(t),
        d_uncorrected=trace_norm_distance(sys_rho, damped),
        d_rho1c=trace_norm_distance(sys_rho, family.rho_1c),
        d_rho2c=trace_norm_distance(sys_rho, family.rho_2c),
        d_rhoc=trace_norm_distance(sys_rho, family.rho_c),
        d_rhotildec=trace_norm_distance(sys_rho, family.rho_tilde_c),
    )


def analytic_distances(rho12: complex, w: float, epsilon: float, t: float = 0.0) -> DistanceReport:
    """Closed-form distances for channels with C = 1 - i*eps, C_perp = 1 + i*eps.

    Valid to O(eps^2) for 0 < w < 1:

    =================  =========================================
    uncorrected        2 |rho12| |w - 1/2| eps
    rho_1c             2 |rho12| |1 + i eps|
    rho_2c             0
    rho_c              2 |rho12| (1 - w) |1 + i eps|
    rho_tilde_c        2 |rho12| (w (1 - w) + 1/2)
    =================  =========================================
    """
    if not 0.0 < w < 1.0:
        raise ValueError("closed forms require a strictly mixed environment, 0 < w < 1")
    eps = float(epsilon)
    if eps < 0.0:
        raise ValueError("epsilon must be nonnegative")
    a = abs(complex(rho12))
    one_plus = abs(1.0 + 1j * eps)
    return DistanceReport(
        t=float(t),
        d_uncorrected=2.0 * a * abs(w - 0.5) * eps,
        d_rho1c=2.0 * a * one_plus,
        d_rho2c=0.0,
        d_rhoc=2.0 * a * (1.0 - w) * one_plus,
        d_rhotildec=2.0 * a * abs(w * (1.0 - w) + 0.5),
    )


def find_epsilon_regime(model: MixedEnvModel, t_grid, tol: float) -> list[EpsilonRegime]:
    """Grid times where C = 1 - i*eps holds with a nontrivial eps.

    Keeps t with |Re C - 1| <= tol and |Im C| > sqrt(tol); the second filter
    drops the trivial eps = 0 returns (including t = 0). An empty result is a
    legitimate outcome, not an error.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence of times")
    c, _ = overlap_curve(model.h1, model.h2, model.psi0, ts)
    residual = np.abs(c.real - 1.0)
    mask = (residual <= tol) & (np.abs(c.imag) > np.sqrt(tol))
    return [
        EpsilonRegime(t=float(ts[i]), epsilon=float(-c.imag[i]), residual=float(residual[i]))
        for i in np.flatnonzero(mask)
    ]


__all__ = [
    "MixedEnvModel",
    "OverlapPair",
    "CorrectedFamily",
    "DistanceReport",
    "EpsilonRegime",
    "relative_overlaps",
    "effective_overlap",
    "overlap_curve",
    "corrected_family",
    "distance_report",
    "analytic_distances",
    "find_epsilon_regime",
]
