"""Phase-damping channels on a qubit and environment-assisted error correction.

The package covers the full pipeline at desk scale: channel construction from
relative Hamiltonians, random-unitary decomposition via the Choi matrix,
construction of the environment measurement observable, conditional unitary
recovery, and the mixed-environment extension with its trace-distance study.
"""

from .linalg import (
    PAULI,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    EigResult,
    Svd2xN,
    hermitian_eig,
    is_hermitian,
    is_psd,
    is_unitary,
    kron,
    mat_exp_su2,
    pauli_coefficients,
    svd_2xn,
)
from .states import (
    bloch_to_density,
    density_to_bloch,
    is_density_matrix,
    ket_from_bloch_angles,
    ket_to_bloch,
    orthogonal_ket,
    partial_trace_env,
    trace_norm_distance,
)
from .channel import (
    DephasingModel,
    KrausSet,
    Overlap,
    RUDecomposition,
    apply_channel,
    apply_kraus,
    apply_ru,
    channel_overlap,
    choi_matrix,
    kraus_from_env_basis,
    overlap,
    relative_states,
    ru_decomposition,
)
from .correction import (
    BasisChange,
    CorrectionObservable,
    DegenerateChannelError,
    InvariantViolationError,
    MeasurementOutcome,
    RoundTripReport,
    correct_state,
    correction_basis,
    joint_evolve,
    measure_env,
    round_trip,
    stack_kraus_diagonals,
)
from .mixedenv import (
    CorrectedFamily,
    DistanceReport,
    EpsilonRegime,
    MixedEnvModel,
    OverlapPair,
    analytic_distances,
    corrected_family,
    distance_report,
    effective_overlap,
    find_epsilon_regime,
    overlap_curve,
    relative_overlaps,
)

__version__ = "0.1.0"
