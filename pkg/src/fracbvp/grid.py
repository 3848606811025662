"""The function phi, graded grids built around it, and sampled functions."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from fracbvp.errors import DomainError
from fracbvp.expr import Expr, parse

FAMILIES = ("identity", "log_shift", "power_rho", "custom")


# {{{ phi


@dataclass(frozen=True)
class PhiFunction:
    r"""An increasing function :math:`\varphi` and its derivative.

    Use the constructors :meth:`identity`, :meth:`log_shift`, :meth:`power` or
    :meth:`custom` rather than building instances by hand.
    """

    phi: Expr
    phi_prime: Expr
    family: str = "custom"
    params: tuple[tuple[str, float], ...] = ()
    """Family parameters, e.g. ``(("rho", 0.5),)``."""

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown phi family: {self.family!r}")

    @classmethod
    def identity(cls) -> PhiFunction:
        return cls(parse("t"), parse("1"), "identity")

    @classmethod
    def log_shift(cls, a: float = 0.0) -> PhiFunction:
        """:math:`\\varphi(t) = \\log(1 + t - a)`, so that :math:`\\varphi(a) = 0`."""
        shift = f"(1 - {float(a)!r})"
        return cls(
            parse(f"log(t + {shift})"),
            parse(f"1 / (t + {shift})"),
            "log_shift",
            (("a", float(a)),),
        )

    @classmethod
    def power(cls, rho: float = 0.5) -> PhiFunction:
        """:math:`\\varphi(t) = t^\\rho` on :math:`t \\ge 0`."""
        if not rho > 0:
            raise DomainError(f"power family needs rho > 0: {rho}")
        rho = float(rho)
        return cls(
            parse(f"t^{rho!r}"),
            parse(f"{rho!r} * t^({rho!r} - 1)"),
            "power_rho",
            (("rho", rho),),
        )

    @classmethod
    def custom(cls, phi: str | Expr, phi_prime: str | Expr) -> PhiFunction:
        if isinstance(phi, str):
            phi = parse(phi, ["t"])
        if isinstance(phi_prime, str):
            phi_prime = parse(phi_prime, ["t"])
        for e in (phi, phi_prime):
            if not e.free_vars <= {"t"}:
                raise DomainError(f"phi may only depend on t: {e.source!r}")
        return cls(phi, phi_prime, "custom")

    @property
    def param(self) -> dict[str, float]:
        return dict(self.params)

    def __call__(self, t: Any) -> Any:
        return self.phi.eval({"t": t})

    def derivative(self, t: Any) -> Any:
        return self.phi_prime.eval({"t": t})

    def inverse(self, u: Any, a: float, b: float) -> Any:
        """Solve :math:`\\varphi(t) = u` for :math:`t \\in [a, b]`."""
        u = np.asarray(u, dtype=float)
        if self.family == "identity":
            t = u.copy()
        elif self.family == "log_shift":
            t = np.expm1(u) + self.param["a"]
        elif self.family == "power_rho":
            t = np.power(u, 1.0 / self.param["rho"])
        else:
            t = _bisect(self, u, a, b)
        return np.clip(t, a, b)


def _bisect(phi: PhiFunction, u: np.ndarray, a: float, b: float) -> np.ndarray:
    lo = np.full(u.shape, float(a))
    hi = np.full(u.shape, float(b))
    # 100 halvings take any double interval below one ulp
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        below = phi(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.spacing(np.maximum(np.abs(lo), np.abs(hi)))):
            break
    return 0.5 * (lo + hi)


# }}}


# {{{ grid


@dataclass(frozen=True, eq=False)
class PhiGrid:
    r"""Nodes :math:`a = t_0 < \dots < t_N = b` graded in :math:`u = \varphi(t)`.

    Without snapping, :math:`\varphi(t_i) = \varphi(a) + (\varphi(b) - \varphi(a))
    (i / N)^r`, so the nodes cluster near :math:`a` for ``grading`` :math:`r > 1`.
    """

    nodes: np.ndarray
    phi_vals: np.ndarray
    phi_prime_vals: np.ndarray
    grading: float
    phi: PhiFunction

    _cache: dict[Any, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.nodes.shape != self.phi_vals.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and phi values must be 1d arrays of equal size")
        if self.nodes.size < 2:
            raise ValueError("a grid needs at least two nodes")
        if not np.all(np.diff(self.nodes) > 0):
            raise DomainError("grid nodes must be strictly increasing")
        if not np.all(np.diff(self.phi_vals) > 0):
            raise DomainError("phi must be strictly increasing on the grid")

        finite = np.isfinite(self.phi_prime_vals)
        if not np.all(self.phi_prime_vals[finite] > 0):
            raise DomainError("phi' must be positive at every grid node")

        for arr in (self.nodes, self.phi_vals, self.phi_prime_vals):
            arr.flags.writeable = False

    @classmethod
    def build(
        cls,
        phi: PhiFunction,
        a: float,
        b: float,
        n: int = 1024,
        *,
        grading: float = 2.0,
        snap: Iterable[float] = (),
    ) -> PhiGrid:
        """Build a graded grid with *n* intervals on :math:`[a, b]`.

        Every point in *snap* becomes an exact node: it replaces the nearest
        interior node, or is inserted if that node is already taken.
        """
        if not a < b:
            raise DomainError(f"need a < b: got [{a}, {b}]")
        if n < 1:
            raise DomainError(f"need at least one interval: n = {n}")
        if grading < 1:
            raise DomainError(f"grading exponent must be >= 1: {grading}")

        ua, ub = float(phi(a)), float(phi(b))
        if not ub > ua:
            raise DomainError("phi must be increasing on [a, b]")

        s = (np.arange(n + 1) / n) ** grading
        t = phi.inverse(ua + (ub - ua) * s, a, b)
        t[0], t[-1] = a, b

        taken = {0, n}
        extra = []
        for tau in sorted(set(float(x) for x in snap)):
            if not a <= tau <= b:
                raise DomainError(f"snap point {tau} outside [{a}, {b}]")
            if tau in (a, b):
                continue
            j = int(np.argmin(np.abs(t - tau)))
            if j in taken:
                extra.append(tau)
            else:
                t[j] = tau
                taken.add(j)

        if extra:
            t = np.unique(np.concatenate([t, extra]))

        return cls.from_nodes(phi, t, grading=grading)

    @classmethod
    def from_nodes(cls, phi: PhiFunction, nodes: Any, *, grading: float = 1.0) -> PhiGrid:
        t = np.array(nodes, dtype=float)
        u = np.asarray(phi(t), dtype=float)
        return cls(t, u, _safe_derivative(phi, t), float(grading), phi)

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.nodes.size - 1

    @property
    def u(self) -> np.ndarray:
        r""":math:`\varphi(t_i) - \varphi(a)` at every node."""
        if "u" not in self._cache:
            u = self.phi_vals - self.phi_vals[0]
            u.flags.writeable = False
            self._cache["u"] = u
        return self._cache["u"]

    def index_of(self, t: float) -> int:
        """Index of the node equal to *t* (up to rounding)."""
        j = int(np.argmin(np.abs(self.nodes - t)))
        scale = max(1.0, abs(t))
        if abs(self.nodes[j] - t) > 8 * np.finfo(float).eps * scale:
            raise KeyError(f"{t} is not a grid node")
        return j

    def __len__(self) -> int:
        return self.nodes.size


def _safe_derivative(phi: PhiFunction, t: np.ndarray) -> np.ndarray:
    # phi' may be singular at the left end (t^rho at t = 0); store +inf there
    try:
        return np.asarray(phi.derivative(t), dtype=float)
    except DomainError:
        out = np.empty_like(t)
        for i, ti in enumerate(t):
            try:
                out[i] = phi.derivative(ti)
            except DomainError:
                if i != 0:
                    raise
                out[i] = np.inf
        return out


# }}}


# {{{ grid functions

REPRESENTATIONS = ("plain", "weighted")


@dataclass(frozen=True, eq=False)
class GridFunction:
    r"""Values of a real function at the nodes of a :class:`PhiGrid`.

    In the ``"weighted"`` representation the stored values are
    :math:`(\varphi(t) - \varphi(a))^{2 - \xi} y(t)`, which stay bounded at
    :math:`t = a` for members of the weighted space even when :math:`y` does
    not.
    """

    grid: PhiGrid
    values: np.ndarray
    representation: str = "plain"
    xi: float | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"expected {self.grid.nodes.size} values, got shape {values.shape}"
            )
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation: {self.representation!r}")
        if self.representation == "weighted":
            if self.xi is None:
                raise ValueError("weighted grid functions must carry xi")
            _check_xi(self.xi)

        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def plain(cls, grid: PhiGrid, values: Any) -> GridFunction:
        return cls(grid, np.broadcast_to(values, grid.nodes.shape))

    @classmethod
    def weighted(cls, grid: PhiGrid, values: Any, xi: float) -> GridFunction:
        return cls(grid, np.broadcast_to(values, grid.nodes.shape), "weighted", float(xi))

    @classmethod
    def from_function(
        cls,
        grid: PhiGrid,
        fn: Callable[[np.ndarray], Any],
        representation: str = "plain",
        xi: float | None = None,
    ) -> GridFunction:
        return cls(grid, np.broadcast_to(fn(grid.nodes), grid.nodes.shape), representation, xi)

    def to_weighted(self, xi: float) -> GridFunction:
        """Weighted representation with respect to *xi*."""
        _check_xi(xi)
        if self.representation == "weighted" and self.xi == xi:
            return self

        src = 2.0 if self.representation == "plain" else self.xi
        assert src is not None
        return GridFunction(self.grid, _rescale(self.grid.u, self.values, src - xi), "weighted", xi)

    def plain_values(self) -> np.ndarray:
        """Plain values; the node at :math:`t = a` follows the limit of the weight."""
        if self.representation == "plain":
            return self.values
        assert self.xi is not None
        return _rescale(self.grid.u, self.values, self.xi - 2.0)

    def to_plain(self) -> GridFunction:
        return self if self.representation == "plain" else GridFunction(self.grid, self.plain_values())

    def _binary(self, other: Any, op: Callable[[Any, Any], Any]) -> GridFunction:
        if isinstance(other, GridFunction):
            if other.grid is not self.grid:
                raise ValueError("grid functions live on different grids")
            if (other.representation, other.xi) != (self.representation, self.xi):
                other = other.to_weighted(self.xi) if self.xi is not None else other.to_plain()
            return GridFunction(self.grid, op(self.values, other.values), self.representation, self.xi)
        return GridFunction(self.grid, op(self.values, other), self.representation, self.xi)

    def __add__(self, other: Any) -> GridFunction:
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other: Any) -> GridFunction:
        return self._binary(other, np.subtract)

    def __rsub__(self, other: Any) -> GridFunction:
        return self._binary(other, lambda x, y: np.subtract(y, x))

    def __mul__(self, scalar: float) -> GridFunction:
        if isinstance(scalar, GridFunction):
            raise TypeError("products of grid functions are not supported")
        return GridFunction(self.grid, self.values * scalar, self.representation, self.xi)

    __rmul__ = __mul__

    def __neg__(self) -> GridFunction:
        return self * -1.0

    def __len__(self) -> int:
        return self.values.size


def _check_xi(xi: float) -> None:
    if not 1.0 < xi <= 2.0:
        raise DomainError(f"xi must lie in (1, 2]: got {xi}")


def _rescale(u: np.ndarray, values: np.ndarray, power: float) -> np.ndarray:
    # values * u**power, using the limit at u = 0
    out = np.array(values, dtype=float)
    if power == 0.0:
        return out
    out[1:] *= u[1:] ** power
    if power > 0:
        out[0] = 0.0 if np.isfinite(out[0]) else np.nan
    elif out[0] != 0.0:
        out[0] = np.copysign(np.inf, out[0])
    return out


# }}}
