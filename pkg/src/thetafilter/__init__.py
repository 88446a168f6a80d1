"""Theta method with a three-point time filter: stepping, accuracy and
stability analysis, adaptive control, and reference problems."""
from thetafilter.accuracy import (
    LteReport,
    implied_theta,
    lte_report,
    second_order_nu,
    second_order_nu_variable,
)
from thetafilter.adaptive import ControllerConfig, NuPolicy, solve_adaptive, solve_fixed
from thetafilter.core import (
    DegenerateDenominator,
    InvalidRatio,
    IvpProblem,
    LinearStructure,
    MethodParams,
    NonConvergence,
    SigmaVanishes,
    SingularJacobian,
    StepMode,
    StepRecord,
    StepUnderflow,
    ThetaFilterError,
    Trajectory,
)
from thetafilter.kernels import BACKEND
from thetafilter.problems import get_problem, linear_test, lorenz, pendulum
from thetafilter.reference import rk_reference
from thetafilter.stability import (
    a_stability_oracle,
    boundary_locus,
    characteristic_polys,
    dahlquist_abc,
    is_a0_stable,
    is_a_stable,
    is_zero_stable,
    region_raster,
)
from thetafilter.stepper import FilterCoefficients, NewtonConfig, filter_constant, filter_variable, filtered_step, theta_step

__all__ = [
    "BACKEND", "ControllerConfig", "DegenerateDenominator", "FilterCoefficients", "InvalidRatio",
    "IvpProblem", "LinearStructure", "LteReport", "MethodParams", "NewtonConfig", "NonConvergence",
    "NuPolicy", "SigmaVanishes", "SingularJacobian", "StepMode", "StepRecord", "StepUnderflow",
    "ThetaFilterError", "Trajectory", "a_stability_oracle", "boundary_locus", "characteristic_polys",
    "dahlquist_abc", "filter_constant", "filter_variable", "filtered_step", "get_problem",
    "implied_theta", "is_a0_stable", "is_a_stable", "is_zero_stable", "linear_test", "lorenz",
    "lte_report", "pendulum", "region_raster", "rk_reference", "second_order_nu",
    "second_order_nu_variable", "solve_adaptive", "solve_fixed", "theta_step",
]
