"""Nonlocal boundary value problems for implicit fractional differential
equations with the Hilfer derivative taken with respect to a function phi.

The usual entry points are :class:`ProblemSpec`, :func:`check_existence`,
:func:`picard_solve` and :func:`certify_perturbation`.
"""

from fracbvp.bvp import (
    BoundaryTerm,
    ExistenceCertificate,
    ProblemSpec,
    check_existence,
    compute_A_tilde,
    compute_lambda,
    compute_omega,
    compute_sigma,
    compute_xi,
    is_lambda_singular,
)
from fracbvp.errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ExprSyntaxError,
    FracBVPError,
    InnerDivergence,
    MissingBinding,
    OuterDivergence,
    SingularLambda,
    UnknownIdentifier,
)
from fracbvp.expr import Expr, evaluate, parse
from fracbvp.fracops import (
    frac_integral,
    frac_integral_weighted,
    hilfer_annihilation_check,
    powerlaw_oracle,
    rl_weights,
    weighted_norm,
)
from fracbvp.grid import GridFunction, PhiFunction, PhiGrid
from fracbvp.solver import Solution, SolverConfig, boundary_check, picard_solve, resolve_g
from fracbvp.special import MlfParams, gamma, mittag_leffler
from fracbvp.stability import (
    StabilityCertificate,
    certify,
    certify_perturbation,
    gronwall_bound,
    residual_epsilon,
    ulam_hyers_constant,
    ulam_hyers_rassias_constant,
    verify_K_star,
)

__all__ = [
    "BoundaryTerm",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "ExistenceCertificate",
    "Expr",
    "ExprSyntaxError",
    "FracBVPError",
    "GridFunction",
    "InnerDivergence",
    "MissingBinding",
    "MlfParams",
    "OuterDivergence",
    "PhiFunction",
    "PhiGrid",
    "ProblemSpec",
    "SingularLambda",
    "Solution",
    "SolverConfig",
    "StabilityCertificate",
    "UnknownIdentifier",
    "boundary_check",
    "certify",
    "certify_perturbation",
    "check_existence",
    "compute_A_tilde",
    "compute_lambda",
    "compute_omega",
    "compute_sigma",
    "compute_xi",
    "evaluate",
    "frac_integral",
    "frac_integral_weighted",
    "gamma",
    "gronwall_bound",
    "hilfer_annihilation_check",
    "is_lambda_singular",
    "mittag_leffler",
    "parse",
    "picard_solve",
    "powerlaw_oracle",
    "residual_epsilon",
    "resolve_g",
    "rl_weights",
    "ulam_hyers_constant",
    "ulam_hyers_rassias_constant",
    "verify_K_star",
    "weighted_norm",
]
