"""Superintegrable 2D Hamiltonians on constant-curvature surfaces.

The library constructs the two families of separable systems whose radial
effective potential is isochronous (the oscillator and Kepler families on
the sphere, plane, and hyperbolic plane), computes their action variables
and periods by singularity-aware quadrature, inverts period functions into
angular wells, integrates orbits symplectically, and verifies the
period-commensurability and closed-orbit properties numerically.
"""

from .geometry import Curvature, metric_factor, r_of_rho, rho_of_r
from .potentials import (
    AngularPotential,
    CustomTilde,
    Free,
    Kepler,
    Oscillator,
    PoschlTeller,
    RadialPotential,
    Tabulated,
    TaylorExpansion,
    anharmonic_frequency,
    effective_potential,
    eval_angular,
    eval_radial,
    eval_tilde,
    isochrony_residual,
    preset,
    taylor_coefficients,
)
from .actions import (
    PeriodReport,
    TurningPair,
    angular_action,
    angular_period,
    bound_energy_range,
    closed_form_angular_action,
    closed_form_period,
    closed_form_radial_period,
    isochrony_scan,
    radial_action,
    radial_period,
    radial_turning_points,
    rational_from_ratio,
    turning_points,
)
from .abel import (
    BranchFunction,
    ConstantG,
    TTWG,
    delta_phi_closed,
    delta_phi_numeric,
    g_ttw,
    reconstruct_angular,
    sampled_period_function,
)
from .dynamics import (
    ClosureRecord,
    PhaseState,
    Trajectory,
    export_trajectory,
    generalized_momentum,
    hamiltonian,
    initial_state,
    integrate,
    measure_frequencies,
    orbit_closure,
    third_integral_check,
)
from .classify import Verdict, central_q, superintegrability_report
from . import errors

__version__ = "0.1.0"
