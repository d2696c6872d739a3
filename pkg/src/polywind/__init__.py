"""Winding times of rod polymers: simulation, asymptotics, validation."""

from . import backend
from .analytic import (
    F,
    G,
    MrtConstants,
    QuadratureSpec,
    constants,
    f_prime,
    fg_identity_residual,
    mrt_general,
    mrt_stretched,
    mrt_uniform,
    neg_moment_A,
    ou_hitting_expectation,
    ou_time_change,
    ou_time_change_inverse,
    proposition_variances,
)
from .cltlab import (
    QvPath,
    ZnReport,
    compare_Zn_to_limit,
    empirical_qv,
    sample_limit_Z,
    sample_limit_Z_final,
    theory_qv,
)
from .model import (
    InfeasibleModelError,
    InitialConfig,
    InitialConstant,
    PolymerParams,
    ScaledParams,
    bead_positions,
    boundary_layer,
    chain_windings,
    explicit,
    free_end,
    initial_constant,
    initial_winding,
    mean_free_end,
    realize_angles,
    rescale,
    stretched,
    uniform_random,
)
from .montecarlo import (
    EstimationError,
    LaplaceCheck,
    McConfig,
    McEstimate,
    SweepRow,
    bm_winding_times,
    estimate_mmrt,
    estimate_mrt,
    exp_functional_inverse_moment,
    laplace_check,
    sweep,
)
from .sde import (
    OriginFailure,
    StopOutcome,
    WindingState,
    boundary_layer_config,
    eligible_kmin,
    evolve_step,
    first_rotation_time,
    initial_state,
    min_rotation_time,
    rotation_times_from_increments,
    winding_increment,
)

__version__ = "0.1.0"
