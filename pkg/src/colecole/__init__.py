"""Energy-decay preserving time integration for 2D Maxwell's equations in a
Cole-Cole dispersive medium.

The package provides the fractional convolution-quadrature weight machinery
(:mod:`colecole.weights`), a staggered transverse-electric grid with adjoint
discrete curls (:mod:`colecole.mesh`), the implicit shifted-trapezoidal
theta integrator and a fractional BDF-2 variant (:mod:`colecole.stepper`),
the discrete energy functional and decay diagnostics (:mod:`colecole.energy`),
a manufactured-solution convergence harness (:mod:`colecole.manufactured`),
and a CSV-emitting experiment CLI (:mod:`colecole.cli`).
"""

from .energy import (
    DecayReport,
    EnergyTrace,
    decay_report,
    discrete_energy,
    dissipation_residual,
    energy_tolerance,
    run_decay_experiment,
)
from .manufactured import (
    ConvergenceRow,
    ManufacturedCase,
    convergence_table,
    decay_initial_data,
    error_norms,
    run_case,
)
from .mesh import (
    GridSpec,
    ScalarField,
    VecField,
    combine_theta,
    curl_e,
    curl_h,
    inner_e,
    inner_h,
    norm_e,
    norm_h,
)
from .stepper import (
    MaterialParams,
    Quadrature,
    SchemeConfig,
    SimState,
    SolverError,
    SourceSet,
    UniformStepper,
    frac_deriv_current,
    init_state,
    run,
    scheme_residual,
    solve_spd,
    step,
)
from .weights import (
    SchemeParams,
    SymbolKind,
    WeightKind,
    WeightSequence,
    binomial_series,
    cumulative_weights,
    fbdf2_weights,
    min_theta_gap_grid,
    sftr_weights,
    shift_combine,
    symbol_residual,
    theta_gap,
    varpi_weights,
)

__all__ = [
    "ConvergenceRow",
    "DecayReport",
    "EnergyTrace",
    "GridSpec",
    "ManufacturedCase",
    "MaterialParams",
    "Quadrature",
    "ScalarField",
    "SchemeConfig",
    "SchemeParams",
    "SimState",
    "SolverError",
    "SourceSet",
    "SymbolKind",
    "UniformStepper",
    "VecField",
    "WeightKind",
    "WeightSequence",
    "binomial_series",
    "combine_theta",
    "convergence_table",
    "cumulative_weights",
    "curl_e",
    "curl_h",
    "decay_initial_data",
    "decay_report",
    "discrete_energy",
    "dissipation_residual",
    "energy_tolerance",
    "error_norms",
    "fbdf2_weights",
    "frac_deriv_current",
    "init_state",
    "inner_e",
    "inner_h",
    "min_theta_gap_grid",
    "norm_e",
    "norm_h",
    "run",
    "run_case",
    "run_decay_experiment",
    "scheme_residual",
    "sftr_weights",
    "shift_combine",
    "solve_spd",
    "step",
    "symbol_residual",
    "theta_gap",
    "varpi_weights",
]

__version__ = "0.1.0"
