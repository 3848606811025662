"""Inject eps*w(t) into the reference problem and compare the deviation with C_f*eps."""

import math

from fracbvp import ProblemSpec, certify_perturbation, ulam_hyers_constant, verify_K_star
from fracbvp.special import mittag_leffler

K = 1 / (10 * math.e)
F = "cos(t)/(10*e^(t+1))*(sin(y)+d)"
BOUNDARY = [(10 / 7, 0.8, 1 / 3), (13 / 6, 8 / 3, 0.5)]
spec = ProblemSpec.create(mu=1.5, nu=1.0, f=F, K=K, L=K, boundary=BOUNDARY)

print(f"C_f = {ulam_hyers_constant(spec):.10f}")
print(f"{'shape':>10} {'eps':>8} {'measured':>12} {'|z - y|':>12} {'C_f eps':>12} {'holds':>6}")
for shape in ("cos(t)", "1", "t^2", "exp(-3*t)"):
    for amplitude in (1e-1, 1e-2, 1e-3):
        cert, _, _ = certify_perturbation(spec, amplitude, shape=shape)
        print(
            f"{shape:>10} {amplitude:8.0e} {cert.epsilon_measured:12.4e} "
            f"{cert.observed_deviation:12.4e} {cert.C * cert.epsilon:12.4e} {cert.bound_holds!s:>6}"
        )

# Rassias weights: I^mu E_mu(c u^mu) = (E_mu(c u^mu) - 1) / c, so the
# comparison ratio is (1 - 1/chi) / c. It stays below 1/c, so K* = 1/c works
# on any interval while smaller values depend on the length.
print()
for c in (1 / 9, 1.0, 9.0):
    chi = f"mlf(1.5, {c!r}*t^1.5)"
    ok, ratio = verify_K_star(spec, chi, 1 / 9)
    e = mittag_leffler(1.5, c)
    print(f"chi = E_1.5({c:.4g} t^1.5): worst ratio {ratio:.7f} (closed form {(e - 1) / (c * e):.7f}), K* = 1/9 ok: {ok}")

for K_star in (1 / 9, 0.72):
    cert, _, _ = certify_perturbation(
        spec, 0.01, "ulam_hyers_rassias", chi="mlf(1.5, (1/9)*t^1.5)", K_star=K_star
    )
    print(
        f"Rassias certificate with K* = {K_star:.4f}: holds {cert.bound_holds}, "
        f"K* verified {cert.K_star_verified}, gap {cert.observed_gap:.3e}"
    )
