"""Radial Lane-Emden type systems driven by measures.

Closed-form moments and potentials of radial measures feed the existence
criteria and a monotone sub/supersolution solver, whose output is then
checked against two-sided bounds.
"""
from .criteria import (
    BOUNDED,
    DIVERGENT,
    INCONCLUSIVE,
    CriteriaReport,
    check_c114,
    check_con2,
    check_criteria,
    check_finpot,
    check_limc,
    check_radialcond,
)
from .exponents import ExponentSet, ParameterError, derive_exponents
from .grid import GridFunction, RadialGrid
from .measures import (
    ZERO,
    PowerPiece,
    RadialMeasure,
    ShellAtom,
    ball_mass,
    ball_mass_offcenter,
    from_components,
    lacunary,
    moment,
    power,
    scale_measure,
    shell,
)
from .potentials import (
    k_potential,
    riesz_comparable,
    riesz_exact,
    weighted_potential,
    wolff,
)
from .solver import (
    SolveConfig,
    SolveResult,
    calibrate_lambda_sub,
    monotone_solve,
    monotone_solve_inhom,
    subsolution_seed,
    supersolution_check,
)
from .verify import (
    BoundReport,
    domination_check,
    energy_test,
    growth_test,
    kappa_lowerbound_test,
    verify_profile,
    verify_sandwich,
)

__version__ = "0.1.0"
