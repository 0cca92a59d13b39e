"""Numerical laboratory for slowly decaying transverse-field anneals.

Builds diagonal Ising cost Hamiltonians, certifies decay schedules
Gamma(t) = (delta*t + c)^(-g(t)) against the convergence conditions,
integrates the Schrodinger dynamics, and evaluates the rigorous excitation
bound term by term, including the closed-form tails beyond the simulated
horizon.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateGroundStateError,
    GapAnomalyError,
    ProvenanceMismatchError,
    SizeCapError,
    ValidationError,
)
from .ising import (
    DiagonalIsing,
    IsingProblem,
    apply_hamiltonian,
    build_diagonal,
    transverse_norm,
)
from .schedule import (
    ConditionCertificate,
    ConstantG,
    PowerDecayG,
    Schedule,
    TabulatedG,
    certify,
    compute_m,
    g_function_from_json,
)
from .spectrum import (
    GapBoundFit,
    GapCurve,
    SpectrumSnapshot,
    build_gap_curve,
    check_ising_nondegenerate,
    diagonalize,
    fit_gap_constants,
    gap_profile,
    instance_gap_constant,
    profile_to_csv,
)
from .dynamics import (
    IntegratorConfig,
    TrajectoryRecord,
    evolve,
    excitation_norm,
    initial_state,
    trajectory_sidecar,
    trajectory_to_csv,
)
from .quadrature import (
    QuadratureResult,
    adaptive_integrate,
    cumulative_at,
    log_clock_edges,
)
from .bound import (
    BoundReport,
    ComparisonVerdict,
    FiniteTimeBound,
    compare,
    derivative_norms,
    evaluate_bound,
    finite_time_rhs,
    integrand_samples_to_csv,
)
from .reparam import (
    RationalFromSchedule,
    ReparamMap,
    TabulatedS,
    TanhS,
    build_reparam_map,
    gamma_of_ttilde,
    s_asymptotic,
    s_from_schedule,
    s_function_from_json,
    t_tilde,
)
from .experiment import (
    ExperimentConfig,
    RunManifest,
    generate_random_problem,
    run_experiment,
)

__all__ = [
    "__version__",
    "adaptive_integrate",
    "apply_hamiltonian",
    "BoundReport",
    "build_diagonal",
    "build_gap_curve",
    "build_reparam_map",
    "certify",
    "check_ising_nondegenerate",
    "compare",
    "ComparisonVerdict",
    "compute_m",
    "ConditionCertificate",
    "ConfigError",
    "ConstantG",
    "cumulative_at",
    "DegenerateGroundStateError",
    "derivative_norms",
    "DiagonalIsing",
    "diagonalize",
    "evaluate_bound",
    "evolve",
    "excitation_norm",
    "ExperimentConfig",
    "finite_time_rhs",
    "FiniteTimeBound",
    "fit_gap_constants",
    "g_function_from_json",
    "gamma_of_ttilde",
    "gap_profile",
    "GapAnomalyError",
    "GapBoundFit",
    "GapCurve",
    "generate_random_problem",
    "initial_state",
    "instance_gap_constant",
    "integrand_samples_to_csv",
    "IntegratorConfig",
    "IsingProblem",
    "log_clock_edges",
    "PowerDecayG",
    "profile_to_csv",
    "ProvenanceMismatchError",
    "QuadratureResult",
    "RationalFromSchedule",
    "ReparamMap",
    "run_experiment",
    "RunManifest",
    "s_asymptotic",
    "s_from_schedule",
    "s_function_from_json",
    "Schedule",
    "SizeCapError",
    "SpectrumSnapshot",
    "t_tilde",
    "TabulatedG",
    "TabulatedS",
    "TanhS",
    "trajectory_sidecar",
    "trajectory_to_csv",
    "TrajectoryRecord",
    "transverse_norm",
    "ValidationError",
]
