"""Gamma and one-parameter Mittag-Leffler functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.special

from fracbvp.errors import ConvergenceError, DomainError

DEFAULT_TOL = 1.0e-14
DEFAULT_MAX_TERMS = 500


def gamma(x: Any) -> Any:
    """Gamma function restricted to positive arguments.

    Scalars go through :func:`math.gamma`, arrays through
    :func:`scipy.special.gamma`; both are accurate to a few ulps.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if not x > 0:
            raise DomainError(f"gamma is only defined here for x > 0: got {x}")
        return math.gamma(x)

    x = np.asarray(x, dtype=float)
    if not np.all(x > 0):
        raise DomainError("gamma is only defined here for x > 0")
    return scipy.special.gamma(x)


@dataclass(frozen=True)
class MlfParams:
    mu: float
    tol: float = DEFAULT_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise DomainError(f"Mittag-Leffler order must be positive: {self.mu}")
        if not self.tol > 0:
            raise DomainError(f"tolerance must be positive: {self.tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1: {self.max_terms}")


def mittag_leffler(
    mu: float | MlfParams,
    z: Any,
    *,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> Any:
    r"""Evaluate :math:`E_\mu(z) = \sum_{k \ge 0} z^k / \Gamma(k \mu + 1)`.

    The power series is truncated once a term drops below
    ``tol * max(1, |partial sum|)`` while the terms are decreasing. Meant for
    moderate arguments; there is no asymptotic expansion for large
    :math:`|z|`. The terms peak near :math:`k \mu \approx |z|^{1/\mu}`, so
    small orders exhaust the default 500 terms already at :math:`|z|` of a
    few units, and for negative :math:`z` the cancellation between large
    terms costs digits.

    :arg mu: order, or a :class:`MlfParams` (which then overrides *tol* and
        *max_terms*).
    :arg z: real scalar or array.
    :raises ConvergenceError: if *max_terms* is reached first or the terms
        overflow.
    """
    p = mu if isinstance(mu, MlfParams) else MlfParams(float(mu), tol, max_terms)

    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    shape = z_arr.shape
    z_arr = z_arr.ravel()
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("Mittag-Leffler argument must be finite")

    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(z_arr))
    negative = z_arr < 0

    total = np.ones_like(z_arr)
    prev = np.ones_like(z_arr)
    active = z_arr != 0
    for k in range(1, p.max_terms + 1):
        if not np.any(active):
            break

        log_term = k * log_abs[active] - math.lgamma(k * p.mu + 1)
        if np.any(log_term > 700.0):
            raise ConvergenceError(
                f"Mittag-Leffler series overflows for mu={p.mu} "
                f"(|z| up to {np.max(np.abs(z_arr)):.3g})"
            )

        mag = np.exp(log_term)
        term = np.where(negative[active] & (k % 2 == 1), -mag, mag)
        total[active] += term

        done = (mag < p.tol * np.maximum(1.0, np.abs(total[active]))) & (
            mag <= prev[active]
        )
        prev[active] = mag
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    else:
        if np.any(active):
            raise ConvergenceError(
                f"Mittag-Leffler series did not converge in {p.max_terms} terms"
            )

    return float(total[0]) if scalar else total.reshape(shape)
