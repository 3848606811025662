"""Builtin example problems.

The reference problem is a Caputo-type (``nu = 1``) equation of order 3/2 on
``[0, 1]`` with ``phi(t) = t``, two nonlocal boundary terms and the
nonlinearity ``cos(t) / (10 e^(t+1)) * (sin(y) + d)``, whose Lipschitz
constants are ``K = L = 1/(10e)``. The variants swap in ``phi = log(1+t)`` and
``phi = t^(1/2)`` and keep everything else.
"""

from __future__ import annotations

import math

from fracbvp.config import RunConfig, loads_config

K_EXAMPLE = 1.0 / (10.0 * math.e)

# published values of the boundary determinant, Omega and sigma for the
# identity variant, with the tolerances they are quoted to
REFERENCE_CONSTANTS = {
    "Lambda": (0.87045, 5.0e-5),
    "Omega": (1.35464, 5.0e-5),
    "sigma": (0.0881987, 1.0e-4),
}

VARIANTS = ("identity", "log", "power")

_PHI = {
    "identity": ('phi = "identity"', "t"),
    "log": ('phi = "log_shift"', "log(t + 1)"),
    "power": ('phi = "power_rho"\nrho = 0.5', "t^0.5"),
}

_TEMPLATE = """\
[problem]
mu = 1.5
nu = 1.0
a = 0.0
b = 1.0
{phi}
f = "cos(t)/(10*e^(t+1))*(sin(y)+d)"
K = {K!r}
L = {K!r}

[[boundary]]
lambda = {lam1!r}
delta = 0.8
tau = {tau1!r}

[[boundary]]
lambda = {lam2!r}
delta = {delta2!r}
tau = 0.5

[solver]
N = 1024
grading = 2.0
outer_tol = 1e-10
outer_max_iters = 200
inner_tol = 1e-12
inner_max_iters = 100
initial_guess = "zero"

[stability]
chi = "mlf(1.5, (1/9)*({shift})^1.5)"
K_star = {K_star!r}
perturbation = "cos(t)"
amplitude = 0.01
"""


def example_toml(variant: str = "identity") -> str:
    """Configuration text for one of :data:`VARIANTS`."""
    if variant not in _PHI:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    phi, shift = _PHI[variant]
    return _TEMPLATE.format(
        phi=phi,
        shift=shift,
        K=K_EXAMPLE,
        lam1=10 / 7,
        tau1=1 / 3,
        lam2=13 / 6,
        delta2=8 / 3,
        K_star=1 / 9,
    )


def example_config(variant: str = "identity") -> RunConfig:
    return loads_config(example_toml(variant))
