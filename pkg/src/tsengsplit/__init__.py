"""Solver library and benchmark tools for monotone inclusions ``0 in (A+B)x``.

The iteration engine combines double inertial extrapolation, relaxation,
and a self-adaptive step size that needs no Lipschitz constant.  Schedule
validators, empirical convergence-rate certificates, and generators for
the benchmark problem families round out the package; the ``tsengsplit``
CLI drives them from JSON configs.
"""

from .linalg import (
    DimensionMismatchError,
    Matrix,
    NonFiniteError,
    RngStream,
    Vector,
    axpby,
    inner,
    norm,
    spectral_norm_estimate,
    uniform_matrix,
)
from .operators import (
    ConvexSetProjector,
    ForwardOperator,
    Resolvent,
    affine_forward,
    least_squares_gradient,
    orthant_projector,
    pointwise_max_zero,
    projector_as_resolvent,
    soft_threshold_resolvent,
    weighted_hyperplane_projector,
)
from .problems import (
    AffineVIInstance,
    L2VIInstance,
    LassoInstance,
    gen_affine_vi,
    gen_l2_vi,
    gen_lasso,
    gen_oracle_strong,
    oracle_orthant_vi,
)
from .schedules import (
    PRESET_NAMES,
    ScheduleSet,
    SequenceSpec,
    StrongParams,
    StrongReport,
    ValidationReport,
    beta_bound,
    constant,
    contraction_factor,
    find_feasible_strong,
    inverse_square,
    one_minus_pow10,
    preset,
    rational,
    validate_c3,
    validate_strong,
)
from .solver import (
    DescentViolationError,
    DivergenceError,
    IterationState,
    Problem,
    RateReport,
    SolverConfig,
    SolverError,
    SolverTrace,
    TraceRow,
    certify_linear_rate,
    certify_sqrt_rate,
    extrapolate,
    read_trace_csv,
    solve,
    step_size_update,
    trace_to_csv,
    tseng_step,
    write_trace_csv,
    write_trace_jsonl,
)

__version__ = "0.1.0"
