"""Problem configuration files (TOML).

A configuration has a ``[problem]`` table, any number of ``[[boundary]]``
tables, and optional ``[solver]`` and ``[stability]`` tables::

    [problem]
    mu = 1.5
    nu = 1.0
    a = 0.0
    b = 1.0
    phi = "identity"     # identity | log_shift | power_rho | an expression in t
    f = "cos(t)/(10*e^(t+1))*(sin(y)+d)"
    K = 0.0367879441171
    L = 0.0367879441171

    [[boundary]]
    lambda = 1.4285714285714286
    delta = 0.8
    tau = 0.3333333333333333

``power_rho`` takes ``rho`` and a custom expression requires ``phi_prime``.
Errors carry the line of the offending key where it can be located.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli

from fracbvp.bvp import BoundaryTerm, ProblemSpec
from fracbvp.errors import ConfigError, FracBVPError
from fracbvp.expr import Expr, parse
from fracbvp.grid import PhiFunction
from fracbvp.solver import INITIAL_GUESSES, SolverConfig

PROBLEM_KEYS = {"mu", "nu", "a", "b", "phi", "phi_prime", "rho", "f", "K", "L"}
BOUNDARY_KEYS = {"lambda", "delta", "tau"}
SOLVER_KEYS = {
    "N",
    "grading",
    "outer_tol",
    "outer_max_iters",
    "inner_tol",
    "inner_max_iters",
    "initial_guess",
}
STABILITY_KEYS = {"chi", "K_star", "perturbation", "amplitude", "epsilon"}
SECTIONS = {"problem", "boundary", "solver", "stability"}
BUILTIN_PHI = ("identity", "log_shift", "power_rho")


@dataclass(frozen=True)
class StabilityOptions:
    chi: Expr | None = None
    K_star: float | None = None
    perturbation: str = "cos(t)"
    amplitude: float = 0.01
    epsilon: float | None = None


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    solver: SolverConfig = field(default_factory=SolverConfig)
    stability: StabilityOptions | None = None


# {{{ locating keys


class _Locator:
    """Maps ``(section, index, key)`` to line numbers in the source text."""

    _header = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_]+)\s*\]\]?")
    _key = re.compile(r"^\s*([A-Za-z0-9_]+)\s*=")

    def __init__(self, text: str) -> None:
        self.lines: dict[tuple[str, int, str | None], int] = {}
        counts: dict[str, int] = {}
        section, index = "", 0
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = self._header.match(line)
            if m:
                section = m.group(2)
                index = counts.get(section, 0)
                counts[section] = index + 1
                self.lines.setdefault((section, index, None), lineno)
                continue
            m = self._key.match(line)
            if m:
                self.lines.setdefault((section, index, m.group(1)), lineno)

    def __call__(self, section: str, key: str | None = None, index: int = 0) -> int | None:
        return self.lines.get((section, index, key), self.lines.get((section, index, None)))


# }}}


# {{{ loading


class _Reader:
    def __init__(self, table: dict[str, Any], section: str, where: _Locator, index: int = 0):
        self.table = table
        self.section = section
        self.where = where
        self.index = index

    def error(self, message: str, key: str | None = None) -> ConfigError:
        label = f"[{self.section}]" + (f".{key}" if key else "")
        return ConfigError(f"{label}: {message}", self.where(self.section, key, self.index))

    def check_keys(self, allowed: set[str]) -> None:
        for key in self.table:
            if key not in allowed:
                raise self.error(f"unknown key (expected one of {sorted(allowed)})", key)

    def number(self, key: str, default: float | None = None) -> float:
        if key not in self.table:
            if default is None:
                raise self.error("missing required key", key)
            return default
        value = self.table[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"expected a number, got {value!r}", key)
        return float(value)

    def optional_number(self, key: str) -> float | None:
        return self.number(key) if key in self.table else None

    def integer(self, key: str, default: int) -> int:
        value = self.table.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(f"expected an integer, got {value!r}", key)
        return value

    def string(self, key: str, default: str | None = None) -> str:
        if key not in self.table:
            if default is None:
                raise self.error("missing required key", key)
            return default
        value = self.table[key]
        if not isinstance(value, str):
            raise self.error(f"expected a string, got {value!r}", key)
        return value

    def expr(self, key: str, variables: tuple[str, ...], default: str | None = None) -> Expr:
        source = self.string(key, default)
        try:
            return parse(source, variables)
        except FracBVPError as exc:
            raise self.error(str(exc), key) from exc

    def require(self, ok: bool, message: str, key: str) -> None:
        if not ok:
            raise self.error(message, key)


def _read_phi(r: _Reader, a: float) -> PhiFunction:
    name = r.string("phi", "identity")
    if name != "power_rho" and "rho" in r.table:
        r.require(False, "rho only applies to phi = \"power_rho\"", "rho")
    if name in BUILTIN_PHI and "phi_prime" in r.table:
        r.require(False, f"phi_prime is implied by phi = {name!r}", "phi_prime")

    if name == "identity":
        return PhiFunction.identity()
    if name == "log_shift":
        return PhiFunction.log_shift(a)
    if name == "power_rho":
        rho = r.number("rho", 0.5)
        r.require(rho > 0, f"rho must be positive: {rho}", "rho")
        r.require(a >= 0, "phi = \"power_rho\" needs a >= 0", "phi")
        return PhiFunction.power(rho)

    if "phi_prime" not in r.table:
        raise r.error("a custom phi expression requires phi_prime", "phi")
    try:
        return PhiFunction.custom(r.expr("phi", ("t",)), r.expr("phi_prime", ("t",)))
    except FracBVPError as exc:
        raise r.error(str(exc), "phi") from exc


def _read_problem(doc: dict[str, Any], where: _Locator) -> ProblemSpec:
    if "problem" not in doc or not isinstance(doc["problem"], dict):
        raise ConfigError("missing [problem] section", None)
    r = _Reader(doc["problem"], "problem", where)
    r.check_keys(PROBLEM_KEYS)

    mu = r.number("mu")
    r.require(1 < mu < 2, f"mu must lie in (1, 2): {mu}", "mu")
    nu = r.number("nu")
    r.require(0 <= nu <= 1, f"nu must lie in [0, 1]: {nu}", "nu")
    a = r.number("a", 0.0)
    b = r.number("b", 1.0)
    r.require(a < b, f"need a < b: got a={a}, b={b}", "b")
    K = r.number("K")
    r.require(K > 0, f"Lipschitz constant K of f in y must be positive: {K}", "K")
    L = r.number("L")
    r.require(
        0 < L < 1,
        f"Lipschitz constant L of f in its derivative argument must lie in (0, 1): {L}",
        "L",
    )
    f = r.expr("f", ("t", "y", "d"))
    phi = _read_phi(r, a)

    raw = doc.get("boundary", [])
    if not isinstance(raw, list):
        raise ConfigError("boundary terms must be written as [[boundary]] tables", where("boundary"))
    terms = []
    for i, table in enumerate(raw):
        br = _Reader(table, "boundary", where, i)
        br.check_keys(BOUNDARY_KEYS)
        lam, delta, tau = br.number("lambda"), br.number("delta"), br.number("tau")
        br.require(delta > 0, f"delta must be positive: {delta}", "delta")
        br.require(a <= tau <= b, f"tau must lie in [{a}, {b}]: {tau}", "tau")
        if terms and tau <= terms[-1].tau:
            raise br.error("tau values must be strictly increasing", "tau")
        terms.append(BoundaryTerm(lam, delta, tau))

    try:
        return ProblemSpec(mu=mu, nu=nu, phi=phi, a=a, b=b, f=f, K=K, L=L, boundary=tuple(terms))
    except FracBVPError as exc:
        raise r.error(str(exc)) from exc


def _read_solver(doc: dict[str, Any], where: _Locator) -> SolverConfig:
    r = _Reader(doc.get("solver", {}), "solver", where)
    r.check_keys(SOLVER_KEYS)
    d = SolverConfig()

    n = r.integer("N", d.grid_size)
    r.require(n >= 2, f"N must be at least 2: {n}", "N")
    grading = r.number("grading", d.grading)
    r.require(grading >= 1, f"grading must be >= 1: {grading}", "grading")
    outer_tol = r.number("outer_tol", d.outer_tol)
    r.require(outer_tol > 0, "outer_tol must be positive", "outer_tol")
    inner_tol = r.number("inner_tol", d.inner_tol)
    r.require(inner_tol > 0, "inner_tol must be positive", "inner_tol")
    outer_max = r.integer("outer_max_iters", d.outer_max_iters)
    r.require(outer_max >= 1, "outer_max_iters must be at least 1", "outer_max_iters")
    inner_max = r.integer("inner_max_iters", d.inner_max_iters)
    r.require(inner_max >= 1, "inner_max_iters must be at least 1", "inner_max_iters")
    guess = r.string("initial_guess", d.initial_guess)
    r.require(guess in INITIAL_GUESSES, f"initial_guess must be one of {INITIAL_GUESSES}", "initial_guess")

    return SolverConfig(
        grid_size=n,
        outer_tol=outer_tol,
        outer_max_iters=outer_max,
        inner_tol=inner_tol,
        inner_max_iters=inner_max,
        initial_guess=guess,
        grading=grading,
    )


def _read_stability(doc: dict[str, Any], where: _Locator) -> StabilityOptions | None:
    if "stability" not in doc:
        return None
    r = _Reader(doc["stability"], "stability", where)
    r.check_keys(STABILITY_KEYS)

    chi = r.expr("chi", ("t",)) if "chi" in r.table else None
    K_star = r.optional_number("K_star")
    if K_star is not None:
        r.require(K_star >= 0, f"K_star must be nonnegative: {K_star}", "K_star")
    perturbation = r.expr("perturbation", ("t",), "cos(t)").source
    amplitude = r.number("amplitude", 0.01)
    epsilon = r.optional_number("epsilon")
    if epsilon is not None:
        r.require(epsilon >= 0, f"epsilon must be nonnegative: {epsilon}", "epsilon")
    return StabilityOptions(chi, K_star, perturbation, amplitude, epsilon)


def loads_config(text: str) -> RunConfig:
    """Parse configuration text.

    :raises ConfigError: with the offending line number where possible.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed configuration: {exc}", int(m.group(1)) if m else None) from exc

    where = _Locator(text)
    for section in doc:
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", where(section))

    return RunConfig(_read_problem(doc, where), _read_solver(doc, where), _read_stability(doc, where))


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_config(text)


# }}}


# {{{ dumping


def _value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    # TOML basic strings accept JSON escapes
    return json.dumps(v, ensure_ascii=False)


def _table(header: str, items: list[tuple[str, Any]]) -> str:
    lines = [header] + [f"{k} = {_value(v)}" for k, v in items if v is not None]
    return "\n".join(lines) + "\n"


def dumps_config(config: RunConfig | ProblemSpec) -> str:
    """Serialize to configuration text that :func:`loads_config` reads back to an equal value."""
    if isinstance(config, ProblemSpec):
        config = RunConfig(config)
    spec, cfg = config.problem, config.solver

    phi = spec.phi
    if phi.family == "custom":
        phi_items: list[tuple[str, Any]] = [("phi", phi.phi.source), ("phi_prime", phi.phi_prime.source)]
    elif phi.family == "power_rho":
        phi_items = [("phi", "power_rho"), ("rho", phi.param["rho"])]
    else:
        phi_items = [("phi", phi.family)]

    blocks = [
        _table(
            "[problem]",
            [("mu", spec.mu), ("nu", spec.nu), ("a", spec.a), ("b", spec.b)]
            + phi_items
            + [("f", spec.f.source), ("K", spec.K), ("L", spec.L)],
        )
    ]
    for bt in spec.boundary:
        blocks.append(
            _table("[[boundary]]", [("lambda", bt.lam), ("delta", bt.delta), ("tau", bt.tau)])
        )
    blocks.append(
        _table(
            "[solver]",
            [
                ("N", cfg.grid_size),
                ("grading", cfg.grading),
                ("outer_tol", cfg.outer_tol),
                ("outer_max_iters", cfg.outer_max_iters),
                ("inner_tol", cfg.inner_tol),
                ("inner_max_iters", cfg.inner_max_iters),
                ("initial_guess", cfg.initial_guess),
            ],
        )
    )
    st = config.stability
    if st is not None:
        blocks.append(
            _table(
                "[stability]",
                [
                    ("chi", st.chi.source if st.chi is not None else None),
                    ("K_star", st.K_star),
                    ("perturbation", st.perturbation),
                    ("amplitude", st.amplitude),
                    ("epsilon", st.epsilon),
                ],
            )
        )
    return "\n".join(blocks)


# }}}
