"""Spatial SIR threshold analysis on interval and rectangle domains.

A finite-volume / spectral toolkit for the heterogeneous diffusive SIR system:
principal-eigenvalue propagation criteria, critical diffusivities, final-size
computations, and quantitative comparisons between the diffusive model and its
spatially averaged reduction.
"""

from .analysis import (
    CRITICAL,
    FADES_OFF,
    PROPAGATES,
    ComparisonReport,
    ComparisonRow,
    SweepResult,
    ThresholdReport,
    classify,
    compare_models,
    monotonicity_sweep,
    propagation_probe,
)
from .errors import (
    ConditionNotMetError,
    EpithresholdError,
    InvalidConfigError,
    NumericalError,
)
from .grids import (
    Constant,
    Cosine,
    DiffusionSpec,
    GaussBump,
    Grid,
    Numerics,
    ScalarField,
    Scenario,
    ScenarioSpec,
    Table,
    build_grid,
    integrate,
    linf_norm,
    make_field,
    mean,
    min_value,
    sample_field,
)
from .ode import (
    OdeParams,
    OdeRun,
    averaged_params,
    basic_reproduction_number,
    final_size,
    simulate_sir,
)
from .operators import EllipticOperator, apply_operator, assemble
from .pde import (
    ExtinctionResult,
    PdeState,
    Stepper,
    Trace,
    averaged_final_size_discrete,
    dissipation_increment,
    energy_functional,
    estimate_decay_rate,
    gradient_energy,
    run_steps,
    run_to_extinction,
    step,
)
from .scenario_io import (
    parse_scenario,
    parse_scenario_spec,
    scenario_hash,
    serialize_scenario,
)
from .spectral import (
    EigenResult,
    critical_diffusivity,
    eigenvalue_at_diffusivity,
    neumann_gap,
    principal_eigenpair,
    rayleigh_quotient,
    threshold_eigenpair,
    threshold_potential,
)

__version__ = "0.1.0"

__all__ = [
    "CRITICAL",
    "FADES_OFF",
    "PROPAGATES",
    "ComparisonReport",
    "ComparisonRow",
    "ConditionNotMetError",
    "Constant",
    "Cosine",
    "DiffusionSpec",
    "EigenResult",
    "EllipticOperator",
    "EpithresholdError",
    "ExtinctionResult",
    "GaussBump",
    "Grid",
    "InvalidConfigError",
    "Numerics",
    "NumericalError",
    "OdeParams",
    "OdeRun",
    "PdeState",
    "ScalarField",
    "Scenario",
    "ScenarioSpec",
    "Stepper",
    "SweepResult",
    "Table",
    "ThresholdReport",
    "Trace",
    "apply_operator",
    "assemble",
    "averaged_final_size_discrete",
    "averaged_params",
    "basic_reproduction_number",
    "build_grid",
    "classify",
    "compare_models",
    "critical_diffusivity",
    "dissipation_increment",
    "eigenvalue_at_diffusivity",
    "energy_functional",
    "estimate_decay_rate",
    "final_size",
    "gradient_energy",
    "integrate",
    "linf_norm",
    "make_field",
    "mean",
    "min_value",
    "monotonicity_sweep",
    "neumann_gap",
    "parse_scenario",
    "parse_scenario_spec",
    "principal_eigenpair",
    "propagation_probe",
    "rayleigh_quotient",
    "run_steps",
    "run_to_extinction",
    "sample_field",
    "scenario_hash",
    "serialize_scenario",
    "simulate_sir",
    "step",
    "threshold_eigenpair",
    "threshold_potential",
]
