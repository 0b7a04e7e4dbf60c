"""Nonlinear semigroups from discretized accretive operators, with
closed-form smoothing exponents and verified decay estimates."""

from .exponents import (
    INF,
    ConditionError,
    ExponentTriple,
    GNParams,
    IterationParams,
    IterationResult,
    SExponents,
    StarExponents,
    barenblatt_exponent,
    doubly_nonlinear_exponents,
    dtn_exponents,
    extrapolate_to_infinity,
    extrapolate_to_s,
    fractional_exponents,
    iteration_sequence,
    moser_exponents,
    moser_q_sequence,
    plaplace_exponents,
    smoothing_exponents,
)
from .harness import (
    DecayFit,
    Report,
    barenblatt_comparison,
    config_hash,
    contraction_suite,
    conservation_suite,
    convergence_study,
    default_barenblatt_config,
    default_decay_config,
    default_pme_config,
    exponents_from_query,
    fit_power_law,
    gn_suite,
    initial_condition,
    order_suite,
    run_decay_experiment,
    run_suite,
    smooth_bump,
    spec_from_config,
)
from .measure import (
    DiscreteSpace,
    GridFunction,
    absolute,
    inf,
    lq_norm,
    mass,
    negative_part,
    positive_part,
    q_bracket,
    save_grid_function,
    load_grid_function,
    sup,
    uniform_space,
)
from .operators import (
    BarenblattQuery,
    BoundaryCondition,
    DiscreteOperator,
    GNCheckResult,
    Grid,
    LipschitzF,
    OperatorSpec,
    PhiSpec,
    apply_operator,
    barenblatt_on_grid,
    barenblatt_profile,
    barenblatt_support_radius,
    energy,
    gn_check,
    interval,
    linear_perturbation,
    rectangle,
    tanh_perturbation,
)
from .resolvent import (
    NonConvergenceError,
    PreconditionError,
    ResolventQuery,
    ResolventResult,
    resolvent_power,
    solve_resolvent,
)
from .semigroup import (
    ProbeRecord,
    TimeGrid,
    Trajectory,
    evolve,
    exponential_formula_probe,
    trajectory_to_csv,
)

__version__ = "0.1.0"
