"""Online gradient-flow feedback optimization for LTI plants with
concurrently learned convex costs and verified tracking-error envelopes."""

from .certificates import (
    BoundTrajectory,
    Certificate,
    check_gain,
    compute_constants,
    compute_theta,
    delta_signal,
    epsilon_condition,
    evaluate_bound,
    gain_bound,
    iss_asymptote,
)
from .config import (
    ExperimentConfig,
    config_from_dict,
    dump_config,
    exact_parameter_config,
    fig2a_config,
    fig2b_config,
    load_config,
)
from .costs import (
    BasisExpansion,
    BasisSet,
    CallableBasis,
    CompositeCost,
    QuadraticBasis,
    QuadraticCost,
    SmoothnessConstants,
    check_pl,
    composite_gradient,
    composite_value,
    grad_phi_hat,
    grad_psi_hat,
    optimizer_oracle,
    pack_quadratic,
    quadratic_basis,
    smoothness_constants,
    unpack_quadratic,
)
from .experiment import ExperimentResult, certify_only, run_experiment
from .learning import (
    Dataset,
    EvaluationRecord,
    ParameterEstimate,
    RlsState,
    estimation_error,
    fit_lasso,
    fit_ls,
    fit_ridge,
    ls_residual,
    rls_init,
    rls_update,
    running_sup_error,
    soft_threshold,
)
from .plant import (
    LyapunovCertificate,
    PlantModel,
    SteadyStateMaps,
    equilibrium_state,
    lyapunov_certificate,
    plant_output,
    plant_rhs,
    solve_lyapunov,
    steady_state_maps,
    validate_hurwitz,
)
from .reporting import (
    RunReport,
    certificate_report,
    render_run_figure,
    trajectory_csv_text,
    write_trajectory_csv,
)
from .simulate import (
    ClosedLoopTrajectory,
    ConstantDisturbance,
    DisturbanceSignal,
    PiecewiseLinearDisturbance,
    SimulationConfig,
    SinusoidalDisturbance,
    closed_loop_field,
    controller_rhs,
    rk4_step,
    run_simulation,
    sample_arrivals,
)

__version__ = "0.1.0"
