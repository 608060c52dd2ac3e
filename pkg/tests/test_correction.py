import numpy as np
import pytest

from phasedamp.linalg import PAULI_Z, kron
from phasedamp.states import (
    bloch_to_density,
    orthogonal_ket,
    partial_trace_env,
    trace_norm_distance,
)
from phasedamp.channel import (
    DephasingModel,
    KrausSet,
    Overlap,
    apply_channel,
    channel_overlap,
    kraus_from_env_basis,
    ru_decomposition,
)
from phasedamp.correction import (
    CorrectionObservable,
    DegenerateChannelError,
    InvariantViolationError,
    MeasurementOutcome,
    correct_state,
    correction_basis,
    joint_evolve,
    measure_env,
    round_trip,
    stack_kraus_diagonals,
)

from _helpers import rand_density, rand_hermitian, rand_ket

PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def symmetric_model(psi0=PLUS) -> DephasingModel:
    """C(t) = cos(2t) for psi0 = |+>, so |C| is tunable through t."""
    return DephasingModel(h1=PAULI_Z, h2=-PAULI_Z, psi0=psi0)


def rand_model(rng, n):
    return DephasingModel(rand_hermitian(rng, n), rand_hermitian(rng, n), rand_ket(rng, n))


def half_overlap_kraus() -> KrausSet:
    """Hand-built Kraus pair with relative states psi1 = (1,0), psi2 = (1/2, sqrt(3)/2)."""
    return KrausSet((
        np.diag([1.0, 0.5]).astype(complex),
        np.diag([0.0, np.sqrt(0.75)]).astype(complex),
    ))


class TestStackKrausDiagonals:
    def test_initial_time_aligned_basis(self):
        rng = np.random.default_rng(0)
        psi0 = rand_ket(rng, 2)
        model = DephasingModel(rand_hermitian(rng, 2), rand_hermitian(rng, 2), psi0)
        basis = np.column_stack([psi0, orthogonal_ket(psi0)])
        a = stack_kraus_diagonals(kraus_from_env_basis(model, 0.0, basis))
        np.testing.assert_allclose(a, np.array([[1.0, 0.0], [1.0, 0.0]]), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_gram_matrix_structure(self, n):
        rng = np.random.default_rng(n)
        model = rand_model(rng, n)
        t = float(rng.uniform(0.2, 3.0))
        a = stack_kraus_diagonals(kraus_from_env_basis(model, t, np.eye(n, dtype=complex)))
        gram = a @ a.conj().T
        np.testing.assert_allclose(np.diag(gram), np.ones(2), atol=1e-12)
        assert abs(gram[0, 1] - channel_overlap(model, t).value) < 1e-12


class TestCorrectionBasis:
    def test_half_overlap_solution_vector(self):
        a = stack_kraus_diagonals(half_overlap_kraus())
        basis, _ = correction_basis(a, Overlap(0.5))
        u1 = np.array([-1.0, 1.0]) / np.sqrt(2.0)
        expected_w1 = a.conj().T @ u1 / np.sqrt(0.5)
        np.testing.assert_allclose(basis.w[:, 0], expected_w1, atol=1e-12)

    def test_half_overlap_recovers_ru_kraus(self):
        kraus = half_overlap_kraus()
        a = stack_kraus_diagonals(kraus)
        basis, _ = correction_basis(a, Overlap(0.5))
        k1 = sum(basis.v[0, b] * kraus.operators[b] for b in range(2))
        k2 = sum(basis.v[1, b] * kraus.operators[b] for b in range(2))
        np.testing.assert_allclose(k1, 0.5 * np.diag([-1.0, 1.0]), atol=1e-12)
        np.testing.assert_allclose(k2, np.sqrt(0.75) * np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_linear_system_residuals(self, n):
        rng = np.random.default_rng(20 + n)
        model = rand_model(rng, n)
        t = float(rng.uniform(0.3, 2.5))
        c = channel_overlap(model, t)
        kraus = kraus_from_env_basis(model, t, np.eye(n, dtype=complex))
        a = stack_kraus_diagonals(kraus)
        basis, obs = correction_basis(a, c)
        mag = abs(c.value)
        phase = c.value / mag if mag > 1e-15 else 1.0
        b1 = np.sqrt((1 - mag) / 2) * np.array([-phase, 1.0])
        b2 = np.sqrt((1 + mag) / 2) * np.array([phase, 1.0])
        assert np.linalg.norm(a @ basis.w[:, 0] - b1) < 1e-10
        assert np.linalg.norm(a @ basis.w[:, 1] - b2) < 1e-10
        for i in range(2, n):
            assert np.linalg.norm(a @ basis.w[:, i]) < 1e-10
        np.testing.assert_allclose(basis.v @ basis.v.conj().T, np.eye(n), atol=1e-10)
        np.testing.assert_allclose(obs.mu.conj().T @ obs.mu, np.eye(n), atol=1e-10)
        # mixing the basis Kraus set reproduces the RU set, zero for alpha >= 3
        ru = ru_decomposition(c)
        k_ops = [np.sqrt(ru.p1) * ru.u1, np.sqrt(ru.p2) * ru.u2]
        for alpha in range(n):
            combo = sum(basis.v[alpha, b] * kraus.operators[b] for b in range(n))
            expected = k_ops[alpha] if alpha < 2 else np.zeros((2, 2))
            np.testing.assert_allclose(combo, expected, atol=1e-10)

    def test_degenerate_overlap_rejected(self):
        rng = np.random.default_rng(1)
        psi0 = rand_ket(rng, 2)
        model = DephasingModel(rand_hermitian(rng, 2), rand_hermitian(rng, 2), psi0)
        kraus = kraus_from_env_basis(model, 0.0, np.eye(2, dtype=complex))
        with pytest.raises(DegenerateChannelError):
            correction_basis(stack_kraus_diagonals(kraus), Overlap(1.0))

    def test_gram_structure_mismatch_rejected(self):
        a = stack_kraus_diagonals(half_overlap_kraus())
        with pytest.raises(ValueError):
            correction_basis(a, Overlap(0.25))

    def test_observable_labels_distinct(self):
        a = stack_kraus_diagonals(half_overlap_kraus())
        _, obs = correction_basis(a, Overlap(0.5))
        assert obs.labels == (1, 2)


class TestJointEvolve:
    def test_initial_time_is_product(self):
        rng = np.random.default_rng(2)
        rho = rand_density(rng)
        rho_env = rand_density(rng, 3)
        h = rand_hermitian(rng, 3)
        got = joint_evolve(rho, rho_env, h, h + rand_hermitian(rng, 3), 0.0)
        np.testing.assert_allclose(got, kron(rho, rho_env), atol=1e-14)

    def test_equal_hamiltonians_do_not_dephase(self):
        rng = np.random.default_rng(3)
        rho = rand_density(rng)
        rho_env = rand_density(rng, 2)
        h = rand_hermitian(rng, 2)
        reduced = partial_trace_env(joint_evolve(rho, rho_env, h, h, 1.7), 2)
        np.testing.assert_allclose(reduced, rho, atol=1e-12)

    def test_unitary_invariants(self):
        rng = np.random.default_rng(4)
        rho = rand_density(rng)
        rho_env = rand_density(rng, 4)
        out = joint_evolve(rho, rho_env, rand_hermitian(rng, 4), rand_hermitian(rng, 4), 2.2)
        assert abs(np.trace(out) - 1) < 1e-12
        np.testing.assert_allclose(
            np.linalg.eigvalsh(out), np.linalg.eigvalsh(kron(rho, rho_env)), atol=1e-10
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_reduced_state_matches_overlap_route(self, seed):
        rng = np.random.default_rng(30 + seed)
        model = rand_model(rng, 2)
        rho = rand_density(rng)
        t = float(rng.uniform(0, 4))
        joint = joint_evolve(
            rho, np.outer(model.psi0, model.psi0.conj()), model.h1, model.h2, t
        )
        np.testing.assert_allclose(
            partial_trace_env(joint, 2),
            apply_channel(rho, channel_overlap(model, t)),
            atol=1e-10,
        )

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            joint_evolve(rand_density(rng), rand_density(rng, 3), np.eye(2), np.eye(2), 1.0)


def _observable_for(model: DephasingModel, t: float) -> CorrectionObservable:
    kraus = kraus_from_env_basis(model, t, np.eye(model.env_dim, dtype=complex))
    _, obs = correction_basis(stack_kraus_diagonals(kraus), channel_overlap(model, t))
    return obs


class TestMeasureEnv:
    def test_unit_overlap_single_branch(self):
        # at t = 0 the (psi0, perp) measurement basis leaves only one branch
        rng = np.random.default_rng(6)
        psi0 = rand_ket(rng, 2)
        model = DephasingModel(rand_hermitian(rng, 2), rand_hermitian(rng, 2), psi0)
        rho = rand_density(rng)
        joint = joint_evolve(rho, np.outer(psi0, psi0.conj()), model.h1, model.h2, 0.0)
        obs = CorrectionObservable(
            mu=np.column_stack([orthogonal_ket(psi0), psi0]), labels=(1, 2)
        )
        outcomes = measure_env(joint, obs)
        assert len(outcomes) == 1 and outcomes[0].alpha == 2
        assert abs(outcomes[0].probability - 1.0) < 1e-12

    def test_zero_overlap_balanced_branches(self):
        model = symmetric_model()
        t = np.pi / 4  # C = cos(pi/2) = 0
        joint = joint_evolve(
            bloch_to_density((0, 0, 0.3)), np.outer(PLUS, PLUS.conj()), model.h1, model.h2, t
        )
        outcomes = measure_env(joint, _observable_for(model, t))
        probs = sorted(o.probability for o in outcomes)
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-12)

    def test_half_overlap_probabilities(self):
        model = symmetric_model()
        t = np.pi / 6  # C = cos(pi/3) = 1/2
        joint = joint_evolve(
            rand_density(np.random.default_rng(7)),
            np.outer(PLUS, PLUS.conj()),
            model.h1,
            model.h2,
            t,
        )
        outcomes = {o.alpha: o.probability for o in measure_env(joint, _observable_for(model, t))}
        assert abs(outcomes[1] - 0.25) < 1e-10
        assert abs(outcomes[2] - 0.75) < 1e-10

    @pytest.mark.parametrize("n", [3, 4])
    def test_branch_probabilities_match_ru_weights(self, n):
        rng = np.random.default_rng(50 + n)
        model = rand_model(rng, n)
        t = float(rng.uniform(0.2, 2.0))
        c = channel_overlap(model, t)
        joint = joint_evolve(
            rand_density(rng), np.outer(model.psi0, model.psi0.conj()), model.h1, model.h2, t
        )
        outcomes = {o.alpha: o.probability for o in measure_env(joint, _observable_for(model, t))}
        assert set(outcomes) <= {1, 2}
        assert abs(outcomes[1] - 0.5 * (1 - abs(c.value))) < 1e-10
        assert abs(outcomes[2] - 0.5 * (1 + abs(c.value))) < 1e-10

    def test_sample_mode_is_seed_deterministic(self):
        model = symmetric_model()
        t = np.pi / 6
        joint = joint_evolve(
            bloch_to_density((1, 0, 0)), np.outer(PLUS, PLUS.conj()), model.h1, model.h2, t
        )
        obs = _observable_for(model, t)
        draws_a = [measure_env(joint, obs, mode="sample", seed=s)[0].alpha for s in range(12)]
        draws_b = [measure_env(joint, obs, mode="sample", seed=s)[0].alpha for s in range(12)]
        assert draws_a == draws_b
        assert set(draws_a) == {1, 2}

    def test_rejects_unknown_mode(self):
        model = symmetric_model()
        joint = joint_evolve(
            bloch_to_density((1, 0, 0)), np.outer(PLUS, PLUS.conj()), model.h1, model.h2, 0.4
        )
        with pytest.raises(ValueError):
            measure_env(joint, _observable_for(model, 0.4), mode="metropolis")

    def test_rejects_dimension_mismatch(self):
        model = symmetric_model()
        with pytest.raises(ValueError):
            measure_env(np.eye(6) / 6, _observable_for(model, 0.4))


class TestCorrectState:
    def test_unit_overlap_branch_two_is_identity(self):
        rho = rand_density(np.random.default_rng(8))
        ru = ru_decomposition(Overlap(1.0))
        outcome = MeasurementOutcome(alpha=2, probability=1.0, post_state=rho)
        np.testing.assert_allclose(correct_state(outcome, ru), rho, atol=1e-14)

    def test_plus_state_branch_one(self):
        model = symmetric_model()
        t = np.pi / 6
        rho = bloch_to_density((1, 0, 0))
        joint = joint_evolve(rho, np.outer(PLUS, PLUS.conj()), model.h1, model.h2, t)
        ru = ru_decomposition(channel_overlap(model, t))
        outcomes = {o.alpha: o for o in measure_env(joint, _observable_for(model, t))}
        corrected = correct_state(outcomes[1], ru)
        assert trace_norm_distance(corrected, rho) < 1e-10

    def test_every_branch_recovers_random_state(self):
        rng = np.random.default_rng(9)
        model = rand_model(rng, 4)
        rho = rand_density(rng)
        t = 1.4
        joint = joint_evolve(rho, np.outer(model.psi0, model.psi0.conj()), model.h1, model.h2, t)
        ru = ru_decomposition(channel_overlap(model, t))
        for outcome in measure_env(joint, _observable_for(model, t)):
            assert trace_norm_distance(correct_state(outcome, ru), rho) < 1e-10

    def test_rejects_spurious_branch(self):
        ru = ru_decomposition(Overlap(0.5))
        outcome = MeasurementOutcome(alpha=3, probability=1e-6, post_state=np.eye(2) / 2)
        with pytest.raises(InvariantViolationError):
            correct_state(outcome, ru)


class TestRoundTrip:
    def test_initial_time(self):
        rep = round_trip(symmetric_model(), bloch_to_density((1, 0, 0)), 0.0)
        assert rep.dist_before < 1e-12
        assert max(rep.dist_after) < 1e-12
        assert rep.probabilities == (0.0, 1.0)

    def test_full_dephasing_point(self):
        # C = 0 zeroes the coherence: distance |rho12| before, recovery after
        rep = round_trip(symmetric_model(), bloch_to_density((1, 0, 0)), np.pi / 4)
        assert abs(rep.overlap_value) < 1e-12
        assert abs(rep.dist_before - 0.5) < 1e-12
        assert max(rep.dist_after) < 1e-10

    def test_sweep_recovers_everywhere(self):
        rng = np.random.default_rng(10)
        model = rand_model(rng, 2)
        rho = rand_density(rng)
        for t in np.linspace(0.0, 5.0, 50):
            rep = round_trip(model, rho, float(t))
            assert max(rep.dist_after) < 1e-10

    @pytest.mark.parametrize("n", [2, 3, 4, 8])
    def test_recovery_across_environment_dimensions(self, n):
        rng = np.random.default_rng(60 + n)
        for _ in range(3):
            model = rand_model(rng, n)
            rep = round_trip(model, rand_density(rng), float(rng.uniform(0.1, 4.0)))
            assert max(rep.dist_after) < 1e-10
            assert abs(sum(rep.probabilities) - 1.0) < 1e-10
