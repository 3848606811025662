r"""Nonlocal boundary value problems and the constants derived from them.

The problem is

.. math::

    {}^H D^{\mu,\nu;\varphi}_{a+} y(t) = f(t, y(t), {}^H D^{\mu,\nu;\varphi}_{a+} y(t)),
    \quad y(a) = 0,
    \quad y(b) = \sum_i \lambda_i I^{\delta_i;\varphi} y(\tau_i),

with :math:`1 < \mu < 2`, :math:`0 \le \nu \le 1` and :math:`f` Lipschitz with
constants :math:`K` (in :math:`y`) and :math:`L < 1` (in the derivative
argument).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from fracbvp.errors import DomainError, SingularLambda
from fracbvp.expr import Expr, parse
from fracbvp.fracops import frac_integral
from fracbvp.grid import GridFunction, PhiFunction
from fracbvp.special import gamma

LAMBDA_RTOL = 1.0e-12


@dataclass(frozen=True)
class BoundaryTerm:
    """One term ``lambda * I^delta y(tau)`` of the nonlocal condition."""

    lam: float
    delta: float
    tau: float

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise DomainError(f"boundary order delta must be positive: {self.delta}")


@dataclass(frozen=True)
class ProblemSpec:
    mu: float
    nu: float
    phi: PhiFunction
    a: float
    b: float
    f: Expr
    K: float
    L: float
    boundary: tuple[BoundaryTerm, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", tuple(self.boundary))
        if not 1.0 < self.mu < 2.0:
            raise DomainError(f"mu must lie in (1, 2): got {self.mu}")
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"nu must lie in [0, 1]: got {self.nu}")
        if not self.a < self.b:
            raise DomainError(f"need a < b: got [{self.a}, {self.b}]")
        if not self.K > 0:
            raise DomainError(f"Lipschitz constant K must be positive: {self.K}")
        if not 0.0 < self.L < 1.0:
            raise DomainError(f"Lipschitz constant L must lie in (0, 1): {self.L}")
        if not self.f.free_vars <= {"t", "y", "d"}:
            raise DomainError(f"f may only depend on t, y, d: {self.f.source!r}")

        taus = [term.tau for term in self.boundary]
        for tau in taus:
            if not self.a <= tau <= self.b:
                raise DomainError(f"boundary node {tau} outside [{self.a}, {self.b}]")
        if any(t1 >= t2 for t1, t2 in zip(taus, taus[1:])):
            raise DomainError("boundary nodes tau_i must be strictly increasing")

    @classmethod
    def create(
        cls,
        *,
        mu: float,
        nu: float,
        f: str | Expr,
        K: float,
        L: float,
        a: float = 0.0,
        b: float = 1.0,
        phi: PhiFunction | None = None,
        boundary: Sequence[tuple[float, float, float] | BoundaryTerm] = (),
    ) -> ProblemSpec:
        """Convenience constructor accepting expression text and plain tuples."""
        if isinstance(f, str):
            f = parse(f, ("t", "y", "d"))
        terms = tuple(
            bt if isinstance(bt, BoundaryTerm) else BoundaryTerm(*bt) for bt in boundary
        )
        return cls(
            mu=float(mu),
            nu=float(nu),
            phi=PhiFunction.identity() if phi is None else phi,
            a=float(a),
            b=float(b),
            f=f,
            K=float(K),
            L=float(L),
            boundary=terms,
        )

    @property
    def xi(self) -> float:
        return compute_xi(self.mu, self.nu)

    @property
    def length(self) -> float:
        r""":math:`\varphi(b) - \varphi(a)`."""
        return float(self.phi(self.b)) - float(self.phi(self.a))

    def shift(self, tau: float) -> float:
        return float(self.phi(tau)) - float(self.phi(self.a))


@dataclass(frozen=True)
class ExistenceCertificate:
    xi: float
    Lambda: float
    Omega: float
    sigma: float
    lambda_nonzero: bool
    sigma_lt_one: bool
    L_lt_one: bool

    @property
    def passed(self) -> bool:
        return self.lambda_nonzero and self.sigma_lt_one and self.L_lt_one

    def as_dict(self) -> dict[str, float | bool]:
        return {
            "xi": self.xi,
            "Lambda": self.Lambda,
            "Omega": self.Omega,
            "sigma": self.sigma,
            "lambda_nonzero": self.lambda_nonzero,
            "sigma_lt_one": self.sigma_lt_one,
            "L_lt_one": self.L_lt_one,
            "passed": self.passed,
        }


def compute_xi(mu: float, nu: float) -> float:
    if not 1.0 < mu < 2.0 or not 0.0 <= nu <= 1.0:
        raise DomainError(f"need 1 < mu < 2 and 0 <= nu <= 1: got mu={mu}, nu={nu}")
    return mu + nu * (2.0 - mu)


def _lambda_terms(spec: ProblemSpec) -> tuple[float, float]:
    xi = spec.xi
    head = spec.length ** (xi - 1) / gamma(xi)
    tail = sum(
        bt.lam / gamma(xi + bt.delta) * spec.shift(bt.tau) ** (xi + bt.delta - 1)
        for bt in spec.boundary
    )
    return head, tail


def compute_lambda(spec: ProblemSpec) -> float:
    r"""The boundary determinant :math:`\Lambda`; zero means no equivalent integral equation."""
    head, tail = _lambda_terms(spec)
    return head - tail


def is_lambda_singular(spec: ProblemSpec) -> bool:
    head, tail = _lambda_terms(spec)
    return abs(head - tail) < LAMBDA_RTOL * max(1.0, abs(head), abs(tail))


def compute_omega(spec: ProblemSpec) -> float:
    xi, mu = spec.xi, spec.mu
    total = 1.0 / gamma(xi + mu - 1)
    for bt in spec.boundary:
        total += bt.lam * spec.length**bt.delta / gamma(xi + mu + bt.delta - 1)
    return total


def compute_sigma(spec: ProblemSpec) -> float:
    """Existence budget; a value below one certifies a solution."""
    if is_lambda_singular(spec):
        raise SingularLambda("Lambda vanishes, so sigma is undefined")

    xi, mu, K, L = spec.xi, spec.mu, spec.K, spec.L
    length = spec.length
    Lam = compute_lambda(spec)
    Om = compute_omega(spec)

    prefactor = K * gamma(xi - 1) * length**mu / (1 - L)
    return prefactor * (length ** (xi - 1) / (gamma(xi) * Lam) * Om + 1 / gamma(xi + mu - 1))


def check_existence(spec: ProblemSpec) -> ExistenceCertificate:
    xi = spec.xi
    Lam = compute_lambda(spec)
    Om = compute_omega(spec)
    nonzero = not is_lambda_singular(spec)
    sigma = compute_sigma(spec) if nonzero else float("inf")
    return ExistenceCertificate(
        xi=xi,
        Lambda=Lam,
        Omega=Om,
        sigma=sigma,
        lambda_nonzero=nonzero,
        sigma_lt_one=bool(sigma < 1.0),
        L_lt_one=bool(spec.L < 1.0),
    )


def compute_A_tilde(spec: ProblemSpec, g: GridFunction) -> float:
    r"""Coefficient of :math:`(\varphi(t) - \varphi(a))^{\xi - 1}` in the solution.

    Every :math:`\tau_i` must be a node of ``g.grid`` (see
    :meth:`~fracbvp.grid.PhiGrid.build` with ``snap``).
    """
    if is_lambda_singular(spec):
        raise SingularLambda("Lambda vanishes, so the boundary coefficient is undefined")

    grid = g.grid
    if not np.isclose(grid.a, spec.a) or not np.isclose(grid.b, spec.b):
        raise ValueError("grid does not cover the problem interval")

    xi, mu = spec.xi, spec.mu
    total = -frac_integral(g, mu, grid.n)
    for bt in spec.boundary:
        k = grid.index_of(bt.tau)
        if k > 0:
            total += bt.lam * frac_integral(g, mu + bt.delta, k)

    return total / (compute_lambda(spec) * gamma(xi))
