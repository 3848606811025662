r"""Fractional integrals with respect to :math:`\varphi` on graded grids.

All quadratures work in the variable :math:`u = \varphi(s) - \varphi(a)`, in
which

.. math::

    I^{\mu;\varphi} h(t) = \frac{1}{\Gamma(\mu)}
        \int_0^{U} (U - u)^{\mu - 1} h(u) \,\mathrm{d}u,
    \qquad U = \varphi(t) - \varphi(a).

The integrand is interpolated linearly in :math:`u` on each panel and the
kernel (and, for weighted integrands, the factor :math:`u^{\xi - 2}`) is
integrated exactly, so both endpoint singularities are handled analytically.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import scipy.special as sc

from fracbvp.errors import DomainError
from fracbvp.grid import GridFunction, PhiFunction, PhiGrid
from fracbvp.special import gamma


# {{{ weights


def _plain_row(u: np.ndarray, k: int, mu: float) -> np.ndarray:
    w = np.zeros(k + 1)
    if k == 0:
        return w

    U = u[k]
    dist = U - u[:k]
    du = np.diff(u[: k + 1])
    ratio = du / dist

    with np.errstate(divide="ignore"):
        # int over the panel of (U - u)^(mu - 1), stable for thin panels
        m0 = dist**mu / mu * -np.expm1(mu * np.log1p(-ratio))
    # int over the panel of (U - u)^(mu - 1) (u - u_j)
    m1 = dist ** (mu + 1) * sc.betainc(2.0, mu, ratio) / (mu * (mu + 1))

    right = m1 / du
    w[:k] += m0 - right
    w[1:] += right
    return w / math.gamma(mu)


def _weighted_row(u: np.ndarray, k: int, mu: float, beta: float) -> np.ndarray:
    w = np.zeros(k + 1)
    if k == 0:
        return w

    U = u[k]
    x = u[: k + 1] / U
    x[-1] = 1.0
    du = np.diff(u[: k + 1])

    # moments of (U - u)^(mu - 1) u^beta and (U - u)^(mu - 1) u^(beta + 1)
    c0 = U ** (mu + beta) * sc.beta(beta + 1.0, mu)
    c1 = U ** (mu + beta + 1.0) * sc.beta(beta + 2.0, mu)
    m0 = c0 * np.diff(sc.betainc(beta + 1.0, mu, x))
    m1 = c1 * np.diff(sc.betainc(beta + 2.0, mu, x))

    left = (u[1 : k + 1] * m0 - m1) / du
    right = (m1 - u[:k] * m0) / du
    w[:k] += left
    w[1:] += right
    return w / math.gamma(mu)


def rl_weights(grid: PhiGrid, mu: float, k: int, beta: float = 0.0) -> np.ndarray:
    r"""Quadrature weights for :math:`I^{\mu;\varphi}` at node *k*.

    With ``beta != 0`` the weights integrate :math:`u^\beta \tilde{h}(u)` where
    :math:`\tilde{h}` is the linear interpolant of the supplied values.
    Returns an array of length ``k + 1``.
    """
    if not mu > 0:
        raise DomainError(f"order of integration must be positive: {mu}")
    if not beta > -1:
        raise DomainError(f"weight exponent must exceed -1: {beta}")
    if not 0 <= k < len(grid):
        raise IndexError(f"node index out of range: {k}")

    key = ("rl", float(mu), float(beta))
    if key in grid._cache:
        return grid._cache[key][k, : k + 1]

    if beta == 0.0:
        return _plain_row(grid.u, k, mu)
    return _weighted_row(grid.u, k, mu, beta)


def rl_matrix(grid: PhiGrid, mu: float, beta: float = 0.0) -> np.ndarray:
    """Lower-triangular matrix of :func:`rl_weights` for every node (cached)."""
    key = ("rl", float(mu), float(beta))
    if key not in grid._cache:
        n = len(grid)
        mat = np.zeros((n, n))
        for k in range(1, n):
            mat[k, : k + 1] = rl_weights(grid, mu, k, beta)
        mat.flags.writeable = False
        grid._cache[key] = mat
    return grid._cache[key]


# }}}


# {{{ integrals


def _apply(grid: PhiGrid, values: np.ndarray, mu: float, k: int | None, beta: float) -> Any:
    if k is None:
        return rl_matrix(grid, mu, beta) @ values
    return float(rl_weights(grid, mu, k, beta) @ values[: k + 1])


def frac_integral(h: GridFunction, mu: float, k: int | None = None) -> Any:
    r"""Approximate :math:`I^{\mu;\varphi} h(t_k)`.

    Plain grid functions must be finite everywhere. Weighted grid functions
    (which may be unbounded at :math:`a`) are routed to
    :func:`frac_integral_weighted`. With ``k=None`` the integral is returned
    at every node.
    """
    if not mu > 0:
        raise DomainError(f"order of integration must be positive: {mu}")

    if h.representation == "weighted":
        assert h.xi is not None
        return frac_integral_weighted(h, h.xi, mu, k)

    if not np.all(np.isfinite(h.values)):
        raise DomainError("plain integrand must be finite; use the weighted representation")
    return _apply(h.grid, h.values, mu, k, 0.0)


def frac_integral_weighted(
    h_weighted: GridFunction, xi: float, mu: float, k: int | None = None
) -> Any:
    r"""Approximate :math:`I^{\mu;\varphi}` of :math:`u^{\xi - 2} \tilde{h}(u)`.

    Here :math:`\tilde{h}` are the weighted values. Both the kernel and the
    weight are integrated exactly on every panel against the linear
    interpolant of :math:`\tilde{h}`.
    """
    if not 1.0 < xi <= 2.0:
        raise DomainError(f"xi must lie in (1, 2]: got {xi}")
    if not mu > 0:
        raise DomainError(f"order of integration must be positive: {mu}")

    values = h_weighted.values
    if h_weighted.representation == "weighted" and h_weighted.xi != xi:
        values = h_weighted.to_weighted(xi).values
    elif h_weighted.representation == "plain":
        # plain values taken as the weighted ones, as documented
        pass

    return _apply(h_weighted.grid, values, mu, k, xi - 2.0)


def weighted_norm(y: GridFunction, xi: float) -> float:
    r""":math:`\max_i |(\varphi(t_i) - \varphi(a))^{2 - \xi} y(t_i)|`."""
    return float(np.max(np.abs(y.to_weighted(xi).values)))


def powerlaw_oracle(mu: float, delta: float, phi: PhiFunction, a: float, t: Any) -> Any:
    r"""Exact :math:`I^{\mu;\varphi}` of :math:`(\varphi(s) - \varphi(a))^{\delta - 1}`."""
    if not mu > 0 or not delta > 0:
        raise DomainError(f"need mu > 0 and delta > 0: got mu={mu}, delta={delta}")
    u = np.asarray(phi(t), dtype=float) - float(phi(a))
    value = gamma(delta) / gamma(mu + delta) * u ** (mu + delta - 1)
    return float(value) if np.ndim(value) == 0 else value


def hilfer_annihilation_check(xi: float, grid: PhiGrid) -> float:
    r"""Residual of :math:`{}^H D^{\mu,\nu;\varphi} (\varphi - \varphi(a))^{\xi - 1} = 0`.

    The Hilfer derivative is :math:`I^{\nu(2-\mu)} D_\varphi^2 I^{2-\xi}`, so
    the identity holds iff :math:`I^{2 - \xi}` maps the power law to a function
    that is linear in :math:`u` and vanishes at :math:`a`. The returned value
    is the largest deviation of the quadrature result from that line.
    """
    if not 1.0 < xi <= 2.0:
        raise DomainError(f"xi must lie in (1, 2]: got {xi}")

    u = grid.u
    if xi == 2.0:
        inner = u.copy()
    else:
        # u^(xi - 1) = u^(xi - 2) * u, and u is linear in the weighted values
        power = GridFunction.weighted(grid, u, xi)
        inner = frac_integral(power, 2.0 - xi)

    line = u * inner[-1] / u[-1]
    return float(np.max(np.abs(inner - line)))


# }}}
