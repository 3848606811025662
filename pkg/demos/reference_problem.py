"""Existence constants and a convergence study for the reference problem.

The reference nonlinearity vanishes at y = 0, so its solution is zero. A
``+ cos(t)`` forcing gives a nontrivial solution to look at.
"""

import math

from fracbvp import ProblemSpec, SolverConfig, boundary_check, check_existence, picard_solve

K = 1 / (10 * math.e)
F = "cos(t)/(10*e^(t+1))*(sin(y)+d)"
BOUNDARY = [(10 / 7, 0.8, 1 / 3), (13 / 6, 8 / 3, 0.5)]

spec = ProblemSpec.create(mu=1.5, nu=1.0, f=F, K=K, L=K, boundary=BOUNDARY)
cert = check_existence(spec)
print(f"xi = {cert.xi}  Lambda = {cert.Lambda:.10f}  Omega = {cert.Omega:.10f}  sigma = {cert.sigma:.10f}")
print(f"existence certificate passed: {cert.passed}")

sol = picard_solve(spec)
print(f"reference problem: max |y| = {abs(sol.y.values).max():g} after {sol.outer_iters} iteration(s)")

forced = ProblemSpec.create(mu=1.5, nu=1.0, f=F + " + cos(t)", K=K, L=K, boundary=BOUNDARY)
print()
print(f"{'N':>6} {'iters':>6} {'A_tilde':>18} {'left':>10} {'right':>10} {'ratio':>6}")
prev = None
for n in (64, 128, 256, 512, 1024, 2048):
    sol = picard_solve(forced, SolverConfig(grid_size=n))
    res = boundary_check(forced, sol)
    ratio = f"{prev / res.right:6.2f}" if prev else ""
    print(f"{n:6d} {sol.outer_iters:6d} {sol.A_tilde:18.12f} {res.left:10.2e} {res.right:10.2e} {ratio}")
    prev = res.right

# the Hilfer type parameter only moves the weight exponent xi
print()
for nu in (0.0, 0.5, 1.0):
    s = ProblemSpec.create(mu=1.5, nu=nu, f=F + " + cos(t)", K=K, L=K, boundary=BOUNDARY)
    sol = picard_solve(s)
    print(f"nu = {nu}: xi = {s.xi:.2f}  y(b) = {sol.y.plain_values()[-1]:.10f}  A_tilde = {sol.A_tilde:.10f}")
