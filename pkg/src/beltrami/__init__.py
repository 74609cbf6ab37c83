"""Numerical principal solutions of Beltrami equations with two characteristics.

Grids and fields live in :mod:`beltrami.grid`, coefficients and truncation in
:mod:`beltrami.coefficients`, the Cauchy/Beurling transforms in
:mod:`beltrami.transforms`, the fixed-point solver and map inversion in
:mod:`beltrami.solver`, inverse-map dilatations in :mod:`beltrami.dilatation`,
capacity/majorant analysis in :mod:`beltrami.analysis` and the closed-form
radial example in :mod:`beltrami.oracle`.
"""

from .analysis import (
    Annulus,
    ClassificationVerdict,
    annulus_capacity,
    circle_integrability_scan,
    classify,
    discrete_capacity,
    divergence_check,
    equicontinuity_bound,
    fmo_estimate,
    inverse_poletsky_check,
)
from .coefficients import CoefficientField, TruncationLevel, joint_dilatation, truncate
from .dilatation import change_of_variables_check, dilatation_report, integral_inner_p, k_inner_p, k_mu_g
from .errors import (
    BeltramiError,
    DegenerateNode,
    FormatError,
    InvalidArgument,
    NoConvergence,
    SamplingFailure,
    SolverDivergence,
    SupportOverflow,
)
from .grid import ComplexField, GridSpec, make_grid, sample, wirtinger
from .regions import Box, Disk
from .solver import SampledMap, far_field_profile, inverse_map, invert_map, run_ladder, solve_principal
from .transforms import beurling_transform, cauchy_transform, make_plan

__version__ = "0.1.0"
