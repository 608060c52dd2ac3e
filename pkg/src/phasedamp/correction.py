"""Environment-assisted correction of a phase-damping channel.

The channel admits a two-branch random-unitary decomposition, so measuring a
suitable environment observable reveals which unitary branch occurred and the
error is undone by the inverse unitary. The observable is constructed from
the unitary mixing between the basis-selected Kraus set {L_beta} and the RU
Kraus set {K_alpha}: stacking the diagonals of the L_beta into a 2 x n matrix
A, the rows of the mixing matrix solve A v_alpha = b_alpha (b_alpha the
diagonal of K_alpha) for alpha = 1, 2 and A v_alpha = 0 otherwise. All
solutions come from the singular value decomposition of A, whose Gram matrix
is A A^dagger = [[1, C], [conj(C), 1]]: the measurement basis mu_alpha is the
conjugate of the right singular vectors, and column phases are pinned by
choosing u1 = (-C/|C|, 1)/sqrt(2), u2 = (C/|C|, 1)/sqrt(2) explicitly so the
inhomogeneous equations hold exactly rather than up to a phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import as_matrix, complete_orthonormal, is_unitary, kron
from .channel import (
    DephasingModel,
    KrausSet,
    Overlap,
    RUDecomposition,
    UNIT_OVERLAP_TOL,
    overlap_phase,
    _readonly,
    apply_channel,
    channel_overlap,
    kraus_from_env_basis,
    propagator,
    ru_decomposition,
)
from .states import partial_trace_env, require_density_matrix, trace_norm_distance

# Measurement branches below this probability are numerically absent.
BRANCH_PROBABILITY_FLOOR = 1e-12


class DegenerateChannelError(ValueError):
    """The overlap magnitude is indistinguishable from 1.

    The channel then consists of the single unitary branch U2 = diag(C/|C|, 1);
    no measurement is needed, callers should apply U2^dagger directly (or
    treat the channel as the identity when C itself is 1).
    """


class InvariantViolationError(RuntimeError):
    """A branch that must carry zero probability was observed."""


@dataclass(frozen=True)
class BasisChange:
    """Unitary v (rows mix L_beta into K_alpha) and w with v = w.T."""

    v: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = as_matrix(self.v)
        w = as_matrix(self.w)
        if v.shape != w.shape or not np.array_equal(v, w.T):
            raise ValueError("v must equal w.T")
        if not is_unitary(v, 1e-10):
            raise ValueError("basis change must be unitary within 1e-10")
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "w", _readonly(w))


@dataclass(frozen=True)
class CorrectionObservable:
    """Projective environment observable with rank-1 eigenprojectors.

    ``mu`` holds the orthonormal eigenstates as columns; ``labels`` are the
    distinct eigenvalues (consecutive integers, only distinctness matters).
    """

    mu: np.ndarray = field(repr=False)
    labels: tuple[int, ...]

    def __post_init__(self):
        mu = as_matrix(self.mu)
        n = mu.shape[0]
        if mu.shape != (n, n) or not is_unitary(mu, 1e-10):
            raise ValueError("measurement states must form an orthonormal basis")
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise ValueError("labels must be one distinct value per branch")
        object.__setattr__(self, "mu", _readonly(mu))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def env_dim(self) -> int:
        return self.mu.shape[0]

    def projector(self, alpha: int) -> np.ndarray:
        """Q_alpha = |mu_alpha><mu_alpha| for the 1-based branch index."""
        col = self.mu[:, alpha - 1]
        return np.outer(col, col.conj())


@dataclass(frozen=True)
class MeasurementOutcome:
    """One branch of the environment measurement.

    ``post_state`` is the normalized system state conditioned on the branch;
    ``corrected_state`` is filled once the conditional unitary was applied.
    """

    alpha: int
    probability: float
    post_state: np.ndarray = field(repr=False)
    corrected_state: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class RoundTripReport:
    """Channel + measure + correct summary for one (model, rho, t) point."""

    t: float
    overlap_value: complex
    probabilities: tuple[float, float]
    channel_state: np.ndarray = field(repr=False)
    dist_before: float = 0.0
    dist_after: tuple[float, float] = (0.0, 0.0)


def stack_kraus_diagonals(kraus: KrausSet) -> np.ndarray:
    """2 x n matrix A whose column beta is the diagonal of L_beta."""
    return np.array(
        [[op[0, 0] for op in kraus.operators], [op[1, 1] for op in kraus.operators]],
        dtype=np.complex128,
    )


def correction_basis(
    a, c: Overlap, tol: float = 1e-10
) -> tuple[BasisChange, CorrectionObservable]:
    """Mixing unitary and measurement observable from the Kraus matrix A.

    Requires A A^dagger = [[1, C], [conj(C), 1]] within ``tol`` and
    |C| < 1 - 1e-12 (otherwise the channel is a single unitary branch and
    DegenerateChannelError tells the caller to invert it directly).
    """
    mat = as_matrix(a)
    if mat.shape[0] != 2 or mat.shape[1] < 2:
        raise ValueError(f"expected a 2 x n Kraus matrix with n >= 2, got {mat.shape}")
    n = mat.shape[1]
    gram = mat @ mat.conj().T
    expected = np.array([[1.0, c.value], [np.conj(c.value), 1.0]])
    if float(np.max(np.abs(gram - expected))) > tol:
        raise ValueError("A A^dagger does not match the overlap structure [[1, C], [conj(C), 1]]")
    mag = abs(c.value)
    if mag >= 1.0 - UNIT_OVERLAP_TOL:
        raise DegenerateChannelError(
            "overlap magnitude is within 1e-12 of 1: the channel is the single "
            "unitary diag(C/|C|, 1); apply its inverse instead of measuring"
        )
    phase = overlap_phase(c.value)
    u1 = np.array([-phase, 1.0]) / np.sqrt(2.0)
    u2 = np.array([phase, 1.0]) / np.sqrt(2.0)
    lam1 = np.sqrt(1.0 - mag)
    lam2 = np.sqrt(1.0 + mag)
    ah = mat.conj().T
    w1 = ah @ u1 / lam1
    w2 = ah @ u2 / lam2
    # The division by a small lam1 amplifies rounding when |C| is close to 1;
    # renormalizing restores orthonormality without disturbing A w_i = b_i.
    w1 = w1 / np.linalg.norm(w1)
    w2 = w2 / np.linalg.norm(w2)
    w_cols = [w1, w2]
    w_cols.extend(complete_orthonormal(w_cols, n))
    w = np.column_stack(w_cols)
    basis_change = BasisChange(v=w.T, w=w)
    observable = CorrectionObservable(mu=w.conj(), labels=tuple(range(1, n + 1)))
    return basis_change, observable


def joint_evolve(rho, rho_env, h1, h2, t: float) -> np.ndarray:
    """Evolve rho (x) rho_env under H = |0><0| (x) h1 + |1><1| (x) h2.

    Returns the full system-environment state before any trace, so callers
    can either trace out the environment or measure it.
    """
    sys_rho = require_density_matrix(rho, 2)
    env_rho = require_density_matrix(rho_env)
    n = env_rho.shape[0]
    ha = as_matrix(h1, (n, n))
    hb = as_matrix(h2, (n, n))
    joint_u = kron(np.diag([1.0, 0.0]), propagator(ha, t)) + kron(
        np.diag([0.0, 1.0]), propagator(hb, t)
    )
    return joint_u @ kron(sys_rho, env_rho) @ joint_u.conj().T


def measure_env(
    rho_se,
    obs: CorrectionObservable,
    mode: str = "enumerate",
    seed: int | None = None,
    min_probability: float = BRANCH_PROBABILITY_FLOOR,
) -> list[MeasurementOutcome]:
    """Measure the observable on the environment factor of a joint state.

    ``enumerate`` (the default, exact) returns every branch whose probability
    exceeds ``min_probability``; ``sample`` draws a single branch with the
    same probabilities from a seeded 64-bit PCG generator
    (``numpy.random.default_rng``), so identical seeds reproduce identical draws.
    """
    n = obs.env_dim
    joint = as_matrix(rho_se, (2 * n, 2 * n))
    if float(np.max(np.abs(obs.mu @ obs.mu.conj().T - np.eye(n)))) > 1e-10:
        raise ValueError("observable projectors do not resolve the identity")
    eye2 = np.eye(2)
    branches: list[MeasurementOutcome] = []
    total = 0.0
    for alpha in range(1, n + 1):
        selected = joint @ kron(eye2, obs.projector(alpha))
        prob = float(np.trace(selected).real)
        total += prob
        if prob <= min_probability:
            continue
        reduced = partial_trace_env(selected, n) / prob
        reduced = 0.5 * (reduced + reduced.conj().T)
        branches.append(MeasurementOutcome(alpha=alpha, probability=prob, post_state=reduced))
    if abs(total - 1.0) > 1e-10:
        raise InvariantViolationError(f"branch probabilities sum to {total}, not 1")
    if mode == "enumerate":
        return branches
    if mode == "sample":
        rng = np.random.default_rng(seed)
        probs = np.array([b.probability for b in branches])
        idx = int(rng.choice(len(branches), p=probs / probs.sum()))
        return [branches[idx]]
    raise ValueError(f"unknown measurement mode {mode!r}")


def correct_state(outcome: MeasurementOutcome, ru: RUDecomposition) -> np.ndarray:
    """Undo the identified branch: U_alpha^dagger post_state U_alpha."""
    if outcome.alpha == 1:
        u = ru.u1
    elif outcome.alpha == 2:
        u = ru.u2
    else:
        raise InvariantViolationError(
            f"branch {outcome.alpha} observed with probability {outcome.probability:.3e}; "
            "only the two unitary branches may occur for a pure environment"
        )
    return u.conj().T @ outcome.post_state @ u


def round_trip(model: DephasingModel, rho, t: float) -> RoundTripReport:
    """Send rho through the channel, measure the environment, undo each branch.

    For a pure environment every branch recovers rho, so both after-distances
    should sit at numerical zero. Overlaps within 1e-12 of unit magnitude skip
    the measurement and apply the single branch inverse deterministically.
    """
    sys_rho = require_density_matrix(rho, 2)
    c = channel_overlap(model, t)
    damped = apply_channel(sys_rho, c)
    before = trace_norm_distance(sys_rho, damped)
    ru = ru_decomposition(c)

    if abs(c.value) >= 1.0 - UNIT_OVERLAP_TOL:
        corrected = ru.u2.conj().T @ damped @ ru.u2
        return RoundTripReport(
            t=float(t),
            overlap_value=c.value,
            probabilities=(0.0, 1.0),
            channel_state=damped,
            dist_before=before,
            dist_after=(0.0, trace_norm_distance(sys_rho, corrected)),
        )

    n = model.env_dim
    kraus = kraus_from_env_basis(model, t, np.eye(n, dtype=np.complex128))
    _, observable = correction_basis(stack_kraus_diagonals(kraus), c)
    joint = joint_evolve(sys_rho, np.outer(model.psi0, model.psi0.conj()), model.h1, model.h2, t)
    outcomes = [
        replace(o, corrected_state=correct_state(o, ru)) for o in measure_env(joint, observable)
    ]
    probs = {o.alpha: o.probability for o in outcomes}
    dists = {o.alpha: trace_norm_distance(sys_rho, o.corrected_state) for o in outcomes}
    return RoundTripReport(
        t=float(t),
        overlap_value=c.value,
        probabilities=(probs.get(1, 0.0), probs.get(2, 0.0)),
        channel_state=damped,
        dist_before=before,
        dist_after=(dists.get(1, 0.0), dists.get(2, 0.0)),
    )


__all__ = [
    "BasisChange",
    "CorrectionObservable",
    "MeasurementOutcome",
    "RoundTripReport",
    "DegenerateChannelError",
    "InvariantViolationError",
    "stack_kraus_diagonals",
    "correction_basis",
    "joint_evolve",
    "measure_env",
    "correct_state",
    "round_trip",
]
