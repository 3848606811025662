"""The same boundary value problem under the three builtin phi families."""

from fracbvp.benchmarks import VARIANTS, example_config
from fracbvp.bvp import check_existence
from fracbvp.solver import boundary_check, picard_solve
from fracbvp.stability import certify_perturbation

for variant in VARIANTS:
    config = example_config(variant)
    spec = config.problem.__class__.create(
        mu=config.problem.mu,
        nu=0.5,
        phi=config.problem.phi,
        f=config.problem.f.source + " + cos(t)",
        K=config.problem.K,
        L=config.problem.L,
        boundary=[(bt.lam, bt.delta, bt.tau) for bt in config.problem.boundary],
    )
    cert = check_existence(spec)
    sol = picard_solve(spec, config.solver)
    left, right = boundary_check(spec, sol)
    uh, _, _ = certify_perturbation(spec, 0.01, cfg=config.solver)
    print(f"phi = {spec.phi.phi.source}")
    print(f"  Lambda {cert.Lambda:.8f}  Omega {cert.Omega:.8f}  sigma {cert.sigma:.8f}")
    print(f"  A_tilde {sol.A_tilde:.10f}  iterations {sol.outer_iters}  boundary residuals {left:.1e} {right:.1e}")
    print(f"  Ulam-Hyers: |z - y| {uh.observed_deviation:.4e} <= {uh.C * uh.epsilon:.4e}: {uh.bound_holds}")
