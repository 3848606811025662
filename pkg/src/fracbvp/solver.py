r"""Fixed-point solution of the equivalent integral equation.

A solution satisfies

.. math::

    y(t) = (\varphi(t) - \varphi(a))^{\xi - 1} \tilde{A}(g) + I^{\mu;\varphi} g(t),
    \qquad g(t) = f(t, y(t), g(t)),

where :math:`\tilde{A}` is :func:`~fracbvp.bvp.compute_A_tilde`. The implicit
equation for :math:`g` is resolved pointwise (inner loop) before every global
Picard update of :math:`y` (outer loop).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from fracbvp.bvp import ExistenceCertificate, ProblemSpec, check_existence, compute_A_tilde
from fracbvp.errors import DomainError, InnerDivergence, OuterDivergence
from fracbvp.fracops import frac_integral, rl_matrix
from fracbvp.grid import GridFunction, PhiGrid

log = logging.getLogger(__name__)

INITIAL_GUESSES = ("zero", "boundary_shape")


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 1024
    outer_tol: float = 1.0e-10
    outer_max_iters: int = 200
    inner_tol: float = 1.0e-12
    inner_max_iters: int = 100
    initial_guess: str = "zero"
    grading: float = 2.0

    def __post_init__(self) -> None:
        if self.grid_size < 2:
            raise DomainError(f"grid_size must be at least 2: {self.grid_size}")
        if not (self.outer_tol > 0 and self.inner_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.outer_max_iters < 1 or self.inner_max_iters < 1:
            raise DomainError("iteration caps must be at least 1")
        if self.initial_guess not in INITIAL_GUESSES:
            raise DomainError(f"unknown initial guess: {self.initial_guess!r}")
        if self.grading < 1:
            raise DomainError(f"grading exponent must be >= 1: {self.grading}")


@dataclass(frozen=True)
class Solution:
    y: GridFunction
    """Solution, stored in the weighted representation."""
    g: GridFunction
    """Resolved right-hand side :math:`g(t) = f(t, y(t), g(t))`."""
    A_tilde: float
    outer_iters: int
    converged: bool
    final_update_norm: float
    residual: float
    """Weighted norm of the integral-equation defect at the final iterate."""
    update_norms: tuple[float, ...] = ()
    existence: ExistenceCertificate | None = None
    warning: str | None = None

    @property
    def grid(self) -> PhiGrid:
        return self.y.grid


def build_grid(spec: ProblemSpec, cfg: SolverConfig | None = None) -> PhiGrid:
    """Graded grid for *spec* with every boundary node ``tau_i`` as an exact node."""
    cfg = SolverConfig() if cfg is None else cfg
    return PhiGrid.build(
        spec.phi,
        spec.a,
        spec.b,
        cfg.grid_size,
        grading=cfg.grading,
        snap=[bt.tau for bt in spec.boundary],
    )


def resolve_g(spec: ProblemSpec, y: GridFunction, cfg: SolverConfig | None = None) -> GridFunction:
    """Solve ``g = f(t, y(t), g)`` at every node by direct iteration.

    The Lipschitz constant ``L < 1`` of ``f`` in its last argument makes the
    iteration a contraction.

    :raises InnerDivergence: if the iteration cap is reached.
    """
    cfg = SolverConfig() if cfg is None else cfg
    t = y.grid.nodes
    y_vals = y.plain_values()

    def f(d: np.ndarray) -> np.ndarray:
        return spec.f.eval({"t": t, "y": y_vals, "d": d})

    g = f(np.zeros_like(t))
    for _ in range(cfg.inner_max_iters):
        g_next = f(g)
        step = np.abs(g_next - g)
        g = g_next
        if np.all(step <= cfg.inner_tol):
            return GridFunction(y.grid, g)

    worst = int(np.argmax(step))
    raise InnerDivergence(
        f"implicit equation not resolved after {cfg.inner_max_iters} iterations "
        f"(worst node t={t[worst]:.6g}, last step {step[worst]:.3e}); "
        "f may violate the Lipschitz bound L < 1"
    )


def _update(spec: ProblemSpec, grid: PhiGrid, g: GridFunction) -> tuple[np.ndarray, float]:
    """Weighted values of the right-hand side of the integral equation."""
    xi = spec.xi
    u = grid.u
    A = compute_A_tilde(spec, g)
    ig = rl_matrix(grid, spec.mu) @ g.values

    y_w = u * A
    y_w[1:] += u[1:] ** (2.0 - xi) * ig[1:]
    return y_w, A


def picard_solve(
    spec: ProblemSpec,
    cfg: SolverConfig | None = None,
    *,
    grid: PhiGrid | None = None,
) -> Solution:
    """Solve the boundary value problem by Picard iteration.

    Problems that do not pass :func:`~fracbvp.bvp.check_existence` are still
    attempted; the returned solution then carries a warning.

    :raises OuterDivergence: if the iteration cap is reached while the update
        norms grow, or the iterates stop being finite.
    """
    cfg = SolverConfig() if cfg is None else cfg
    grid = build_grid(spec, cfg) if grid is None else grid
    xi = spec.xi

    existence = check_existence(spec)
    warning = None
    if not existence.passed:
        warning = (
            f"existence not certified (sigma={existence.sigma:.6g}, "
            f"Lambda={existence.Lambda:.6g}); convergence is not guaranteed"
        )
        log.warning(warning)

    if cfg.initial_guess == "zero":
        y_w = np.zeros(len(grid))
    else:
        y_w = grid.u.copy()

    norms: list[float] = []
    converged = False
    for it in range(1, cfg.outer_max_iters + 1):
        g = resolve_g(spec, GridFunction.weighted(grid, y_w, xi), cfg)
        y_next, _ = _update(spec, grid, g)
        if not np.all(np.isfinite(y_next)):
            raise OuterDivergence(f"non-finite iterate at outer iteration {it}", norms)

        norms.append(float(np.max(np.abs(y_next - y_w))))
        y_w = y_next
        if norms[-1] <= cfg.outer_tol:
            converged = True
            break
    else:
        if norms[-1] > norms[0]:
            raise OuterDivergence(
                f"Picard iteration diverged: update norm grew from {norms[0]:.3e} "
                f"to {norms[-1]:.3e} in {len(norms)} iterations",
                norms,
            )
        log.warning("Picard iteration stopped at the cap without converging")

    y = GridFunction.weighted(grid, y_w, xi)
    g = resolve_g(spec, y, cfg)
    y_rhs, A = _update(spec, grid, g)

    return Solution(
        y=y,
        g=g,
        A_tilde=A,
        outer_iters=len(norms),
        converged=converged,
        final_update_norm=norms[-1],
        residual=float(np.max(np.abs(y_w - y_rhs))),
        update_norms=tuple(norms),
        existence=existence,
        warning=warning,
    )


@dataclass(frozen=True)
class BoundaryResiduals:
    left: float
    right: float

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter((self.left, self.right))


def boundary_check(spec: ProblemSpec, sol: Solution) -> BoundaryResiduals:
    """Residuals of ``y(a) = 0`` and of the nonlocal condition at ``b``.

    The left residual extrapolates the first two interior plain values to
    ``t = a`` along ``s = u^(xi - 1)``, the leading behaviour of a solution
    (plain linear extrapolation in ``u`` when ``xi = 2``).
    """
    y = sol.y
    grid = y.grid
    s = grid.u ** (spec.xi - 1.0)
    y_plain = y.plain_values()

    slope = (y_plain[2] - y_plain[1]) / (s[2] - s[1])
    left = abs(y_plain[1] - slope * s[1])

    nonlocal_sum = 0.0
    for bt in spec.boundary:
        k = grid.index_of(bt.tau)
        if k > 0:
            nonlocal_sum += bt.lam * frac_integral(y, bt.delta, k)
    right = abs(y_plain[-1] - nonlocal_sum)

    return BoundaryResiduals(float(left), float(right))
