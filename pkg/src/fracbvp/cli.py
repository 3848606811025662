"""Command-line front end.

Subcommands::

    fracbvp check --config problem.toml
    fracbvp solve --config problem.toml --out solution.csv
    fracbvp certify --config problem.toml --kind uh --perturb-amplitude 0.01
    fracbvp reproduce-example [--phi-variant log]

Exit codes: 0 success, 1 a verdict failed, 2 configuration error,
3 computation error, 4 outer iteration diverged.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from fracbvp.benchmarks import REFERENCE_CONSTANTS, VARIANTS, example_config
from fracbvp.bvp import ExistenceCertificate, check_existence
from fracbvp.config import RunConfig, load_config
from fracbvp.errors import ConfigError, FracBVPError, OuterDivergence
from fracbvp.solver import Solution, boundary_check, picard_solve
from fracbvp.stability import StabilityCertificate, certify_perturbation

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_DIVERGED = 4

CSV_HEADER = ["t", "phi_t", "y_weighted", "y_plain", "g"]
KIND_NAMES = {"uh": "ulam_hyers", "rassias": "ulam_hyers_rassias"}


def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _round(obj: Any) -> Any:
    # JSON payloads carry the same 12 significant digits as the tables
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _dump_json(payload: dict[str, Any]) -> str:
    return json.dumps(_round(payload), indent=2, sort_keys=True) + "\n"


def _table(rows: Sequence[tuple[str, Any]]) -> str:
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {fmt(value)}" for name, value in rows) + "\n"


# {{{ pipeline pieces


def _existence_rows(cert: ExistenceCertificate) -> list[tuple[str, Any]]:
    return [
        ("xi", cert.xi),
        ("Lambda", cert.Lambda),
        ("Omega", cert.Omega),
        ("sigma", cert.sigma),
        ("Lambda != 0", "PASS" if cert.lambda_nonzero else "FAIL"),
        ("sigma < 1", "PASS" if cert.sigma_lt_one else "FAIL"),
        ("L < 1", "PASS" if cert.L_lt_one else "FAIL"),
    ]


def _solution_summary(config: RunConfig, sol: Solution) -> dict[str, Any]:
    left, right = boundary_check(config.problem, sol)
    return {
        "A_tilde": sol.A_tilde,
        "outer_iters": sol.outer_iters,
        "converged": sol.converged,
        "final_update_norm": sol.final_update_norm,
        "residual": sol.residual,
        "boundary_residual_left": left,
        "boundary_residual_right": right,
        "grid_size": config.solver.grid_size,
        "warning": sol.warning,
    }


def _certificate_rows(cert: StabilityCertificate) -> list[tuple[str, Any]]:
    rows: list[tuple[str, Any]] = [
        ("kind", cert.kind),
        ("epsilon", cert.epsilon),
        ("C", cert.C),
    ]
    if cert.K_star is not None:
        rows += [
            ("K_star", cert.K_star),
            ("max I^mu chi / chi", cert.K_star_ratio),
            ("K_star condition", "PASS" if cert.K_star_verified else "FAIL"),
        ]
    rows += [
        ("observed deviation", cert.observed_deviation),
        ("observed gap", cert.observed_gap),
        ("bound", "HOLDS" if cert.bound_holds else "VIOLATED"),
    ]
    return rows


def _certify(config: RunConfig, kind: str, amplitude: float | None) -> StabilityCertificate:
    full = KIND_NAMES[kind]
    st = config.stability
    if full == "ulam_hyers_rassias":
        if st is None:
            raise ConfigError("--kind rassias needs a [stability] section with chi and K_star")
        if st.chi is None or st.K_star is None:
            raise ConfigError("--kind rassias needs chi and K_star in [stability]")

    shape = st.perturbation if st is not None else "cos(t)"
    if amplitude is None:
        amplitude = st.amplitude if st is not None else 0.01
    cert, _, _ = certify_perturbation(
        config.problem,
        amplitude,
        full,
        shape=shape,
        chi=st.chi if st is not None else None,
        K_star=st.K_star if st is not None else None,
        epsilon=st.epsilon if st is not None else None,
        cfg=config.solver,
    )
    return cert


# }}}


# {{{ commands


def cmd_check(config: RunConfig, out: Path | None = None) -> int:
    cert = check_existence(config.problem)
    sys.stdout.write(_table(_existence_rows(cert)))
    if out is not None:
        out.write_text(_dump_json(cert.as_dict()), encoding="utf-8")
    return EXIT_OK if cert.passed else EXIT_FAILED


def _write_csv(path: Path, sol: Solution) -> None:
    grid = sol.grid
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    columns = zip(
        grid.nodes,
        grid.phi_vals,
        sol.y.values,
        sol.y.plain_values(),
        sol.g.values,
    )
    for row in columns:
        writer.writerow([fmt(float(v)) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def cmd_solve(config: RunConfig, out: Path) -> int:
    sidecar = out.with_suffix(".json")
    try:
        sol = picard_solve(config.problem, config.solver)
    except OuterDivergence as exc:
        sidecar.write_text(
            _dump_json({"error": str(exc), "update_norms": exc.update_norms}), encoding="utf-8"
        )
        raise

    _write_csv(out, sol)
    summary = _solution_summary(config, sol)
    sys.stdout.write(_table([(k, v) for k, v in summary.items() if k != "warning"]))

    summary["update_norms"] = list(sol.update_norms)
    summary["existence"] = sol.existence.as_dict() if sol.existence else None
    sidecar.write_text(_dump_json(summary), encoding="utf-8")
    return EXIT_OK if sol.converged else EXIT_FAILED


def cmd_certify(
    config: RunConfig, kind: str, amplitude: float | None = None, out: Path | None = None
) -> int:
    cert = _certify(config, kind, amplitude)
    sys.stdout.write(_table(_certificate_rows(cert)))
    if out is not None:
        out.write_text(_dump_json(cert.as_dict()), encoding="utf-8")
    return EXIT_OK if cert.bound_holds else EXIT_FAILED


def reproduce_report(variants: Sequence[str], grid_size: int | None = None) -> tuple[str, bool]:
    """Run the builtin examples and return the report and whether the reference constants match."""
    lines: list[str] = []
    matched = True
    for variant in variants:
        config = _override(example_config(variant), grid_size)
        spec = config.problem
        lines.append(f"== example: phi {variant} ({spec.phi.phi.source}) ==\n")

        cert = check_existence(spec)
        lines.append("-- existence --\n")
        lines.append(_table(_existence_rows(cert)))

        if variant == "identity":
            lines.append("-- published constants --\n")
            rows = []
            for name, (published, tol) in REFERENCE_CONSTANTS.items():
                computed = getattr(cert, name)
                diff = abs(computed - published)
                ok = diff <= tol
                matched &= ok
                rows.append(
                    f"{name:<7} computed {fmt(computed):<16} published {fmt(published):<10} "
                    f"|diff| {fmt(diff):<18} tol {fmt(tol):<7} {'OK' if ok else 'MISMATCH'}"
                )
            lines.append("\n".join(rows) + "\n")
        else:
            lines.append("-- published constants --\nnone for this variant (informational run)\n")

        sol = picard_solve(spec, config.solver)
        lines.append("-- solve --\n")
        summary = _solution_summary(config, sol)
        lines.append(_table([(k, v) for k, v in summary.items() if k != "warning"]))

        for kind in ("uh", "rassias"):
            lines.append(f"-- certificate: {KIND_NAMES[kind]} --\n")
            lines.append(_table(_certificate_rows(_certify(config, kind, None))))
        lines.append("\n")

    lines.append(f"reference constants: {'MATCH' if matched else 'MISMATCH'}\n")
    return "".join(lines), matched


def cmd_reproduce_example(
    variant: str | None = None, grid_size: int | None = None, out: Path | None = None
) -> int:
    variants = VARIANTS if variant is None else (variant,)
    report, matched = reproduce_report(variants, grid_size)
    sys.stdout.write(report)
    if out is not None:
        out.write_text(report, encoding="utf-8")
    return EXIT_OK if matched else EXIT_FAILED


# }}}


# {{{ entry point


def _override(config: RunConfig, grid_size: int | None) -> RunConfig:
    if grid_size is None:
        return config
    if grid_size < 2:
        raise ConfigError(f"--grid-size must be at least 2: {grid_size}")
    return dataclasses.replace(
        config, solver=dataclasses.replace(config.solver, grid_size=grid_size)
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbvp",
        description="Solve and certify nonlocal boundary value problems for implicit "
        "Hilfer-type fractional differential equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            p.add_argument("--config", type=Path, required=True, help="problem configuration (TOML)")
        p.add_argument("--out", type=Path, help="output file")
        p.add_argument("--grid-size", type=int, help="override the number of grid intervals")

    common(sub.add_parser("check", help="existence certificate"))
    common(sub.add_parser("solve", help="solve and write CSV plus a JSON sidecar"))

    p = sub.add_parser("certify", help="stability certificate for an injected perturbation")
    common(p)
    p.add_argument("--kind", choices=sorted(KIND_NAMES), default="uh")
    p.add_argument("--perturb-amplitude", type=float, help="amplitude of the injected forcing")

    p = sub.add_parser("reproduce-example", help="run the builtin example problems")
    common(p, config=False)
    p.add_argument(
        "--phi-variant", choices=VARIANTS, help="run a single variant (default: all)"
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce-example":
            return cmd_reproduce_example(args.phi_variant, args.grid_size, args.out)

        config = _override(load_config(args.config), args.grid_size)
        if args.command == "check":
            return cmd_check(config, args.out)
        if args.command == "solve":
            if args.out is None:
                raise ConfigError("solve needs --out for the CSV file")
            return cmd_solve(config, args.out)
        return cmd_certify(config, args.kind, args.perturb_amplitude, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OuterDivergence as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (FracBVPError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


# }}}
