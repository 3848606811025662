import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbvp.bvp import ProblemSpec
from fracbvp.errors import DomainError
from fracbvp.fracops import rl_matrix
from fracbvp.grid import GridFunction, PhiFunction, PhiGrid
from fracbvp.solver import SolverConfig, build_grid, picard_solve
from fracbvp.special import gamma, mittag_leffler
from fracbvp.stability import (
    StabilityCertificate,
    certify,
    certify_perturbation,
    defect,
    gronwall_bound,
    perturbed_problem,
    residual_epsilon,
    uh_constant,
    ulam_hyers_constant,
    ulam_hyers_rassias_constant,
    verify_K_star,
)

K6 = 1 / (10 * math.e)
BOUNDARY = [(10 / 7, 0.8, 1 / 3), (13 / 6, 8 / 3, 0.5)]
F6 = "cos(t)/(10*e^(t+1))*(sin(y)+d)"
CHI = "mlf(1.5, (1/9)*t^1.5)"


def example(**overrides):
    data = dict(mu=1.5, nu=1.0, f=F6, K=K6, L=K6, boundary=BOUNDARY)
    data.update(overrides)
    return ProblemSpec.create(**data)


def ml_mp(mu, z):
    mpmath.mp.dps = 30
    return float(mpmath.nsum(lambda k: mpmath.mpf(z) ** k / mpmath.gamma(k * mu + 1), [0, mpmath.inf]))


# {{{ gronwall


GRID6 = build_grid(example())


def test_gronwall_zero_rate_is_identity():
    v = GridFunction.plain(GRID6, GRID6.nodes**2)
    np.testing.assert_array_equal(gronwall_bound(v, 0.0, 1.5).values, v.values)


def test_gronwall_classical_limit():
    v = GridFunction.plain(GRID6, 1.0)
    np.testing.assert_allclose(
        gronwall_bound(v, 0.7, 1.0, PhiFunction.identity()).values, np.exp(0.7 * GRID6.nodes), rtol=1e-13
    )


def test_gronwall_rejects_decreasing_v_and_negative_rate():
    with pytest.raises(DomainError):
        gronwall_bound(GridFunction.plain(GRID6, -GRID6.nodes), 1.0, 1.5)
    with pytest.raises(DomainError):
        gronwall_bound(GridFunction.plain(GRID6, 1.0), -1.0, 1.5)


@pytest.mark.parametrize("seed", range(5))
def test_gronwall_domination(seed):
    rng = np.random.default_rng(seed)
    v = GridFunction.plain(GRID6, np.cumsum(rng.uniform(0, 0.01, len(GRID6))) + rng.uniform(0, 1))
    g = rng.uniform(0, 2)
    mu = 1.5
    W = rl_matrix(GRID6, mu)
    u = v.values.copy()
    for _ in range(rng.integers(1, 6)):
        u = v.values + g * gamma(mu) * (W @ u)
    assert np.all(u <= gronwall_bound(v, g, mu).values + 1e-8)


def test_gronwall_bound_inside_the_stability_argument():
    # v = eps u_b^mu / Gamma(mu + 1), g = K / ((1 - L) Gamma(mu)) gives the growth factor of C_f
    spec = example()
    eps = 0.01
    v = GridFunction.plain(GRID6, eps / gamma(2.5))
    bound = gronwall_bound(v, K6 / ((1 - K6) * gamma(1.5)), 1.5)
    assert bound.values[-1] == pytest.approx(ulam_hyers_constant(spec) * eps, rel=1e-14)


# }}}


# {{{ constants


def test_uh_constant_value():
    want = 1 / float(mpmath.gamma(2.5)) * ml_mp(1.5, K6 / (1 - K6))
    assert ulam_hyers_constant(example()) == pytest.approx(want, rel=1e-13)


def test_uh_constant_limits():
    assert ulam_hyers_constant(example(K=1e-12, L=1e-12)) == pytest.approx(1 / gamma(2.5), rel=1e-10)
    assert uh_constant(1.5, 2.0, 0.1, 0.1, 0.0) == 0.0
    with pytest.raises(DomainError):
        uh_constant(1.5, 2.0, 0.1, 1.0, 1.0)


def test_uh_constant_uses_the_weighted_exponent():
    spec = example(nu=0.0, b=2.0)
    growth = mittag_leffler(1.5, K6 / (1 - K6) * 2.0**1.5)
    assert ulam_hyers_constant(spec) == pytest.approx(2.0 ** (1.5 + 2 - 1.5) / gamma(2.5) * growth, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1e-3, 2.0), st.floats(1e-3, 2.0), st.floats(0.01, 0.95), st.floats(0.01, 0.95),
    st.floats(0.5, 3.0), st.floats(0.5, 3.0),
)
def test_uh_constant_monotone(K1, K2, L1, L2, b1, b2):
    K1, K2 = sorted((K1, K2))
    L1, L2 = sorted((L1, L2))
    b1, b2 = sorted((b1, b2))
    c = lambda K, L, b: ulam_hyers_constant(example(K=K, L=L, b=b, boundary=[], nu=0.5))  # noqa: E731
    assert c(K1, L1, b1) <= c(K2, L1, b1)
    assert c(K1, L1, b1) <= c(K1, L2, b1)
    assert c(K1, L1, b1) <= c(K1, L1, b2)


def test_uhr_constant():
    spec = example()
    want = (1 / 9) * ml_mp(1.5, K6 / (1 - K6))
    assert ulam_hyers_rassias_constant(spec, 1 / 9) == pytest.approx(want, rel=1e-13)
    assert ulam_hyers_rassias_constant(spec, 0.0) == 0.0
    spec_b = example(b=2.0)  # xi = 2: no length factor
    growth = mittag_leffler(1.5, K6 / (1 - K6) * 2.0**1.5)
    assert ulam_hyers_rassias_constant(spec_b, 0.3) == pytest.approx(0.3 * growth, rel=1e-14)


# }}}


# {{{ K* condition


def test_K_star_for_constant_weight_is_sharp():
    spec = example()
    K_exact = 1.0 / gamma(2.5)
    ok, ratio = verify_K_star(spec, "1", K_exact)
    assert ok
    assert ratio == pytest.approx(K_exact, rel=1e-8)
    assert not verify_K_star(spec, "1", K_exact / 2)[0]


def test_K_star_weight_must_be_positive():
    with pytest.raises(DomainError):
        verify_K_star(example(), "t", 1.0)


def test_K_star_ratio_for_mittag_leffler_weight():
    # I^mu E_mu(c u^mu) = (E_mu(c u^mu) - 1) / c, so the ratio is (1 - 1/chi) / c,
    # largest at t = b
    spec = example()
    chi_b = mittag_leffler(1.5, 1 / 9)
    _, ratio = verify_K_star(spec, CHI, 1 / 9)
    assert ratio == pytest.approx(9 * (chi_b - 1) / chi_b, rel=1e-6)


def test_K_star_one_ninth_holds_for_the_steep_weight():
    ok, ratio = verify_K_star(example(), "mlf(1.5, 9*t^1.5)", 1 / 9)
    assert ok
    assert ratio < 1 / 9


def test_K_star_one_ninth_fails_for_the_shallow_weight():
    # the shallow weight E_mu(u^mu / 9) needs K* close to 0.71 rather than 1/9
    ok, ratio = verify_K_star(example(), CHI, 1 / 9)
    assert not ok
    assert ratio > 0.7


# }}}


# {{{ defect measurement


def test_exact_solution_has_no_defect():
    spec = example(f=F6 + " + cos(t)", nu=0.5)
    sol = picard_solve(spec)
    assert residual_epsilon(spec, sol.y) <= max(sol.residual, 1e-9)
    sol0 = picard_solve(example())
    assert residual_epsilon(example(), sol0.y) <= max(sol0.residual, 1e-9)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0])
def test_injected_forcing_is_recovered(nu):
    spec = example(nu=nu)
    grid = build_grid(spec)
    z = picard_solve(perturbed_problem(spec, 0.01, "cos(t)"), grid=grid)
    w = defect(spec, z.y)
    np.testing.assert_allclose(w.values, 0.01 * np.cos(grid.nodes), rtol=0, atol=1e-6)
    eps = residual_epsilon(spec, z.y)
    assert 0.01 / 1.5 <= eps <= 0.01 * 1.5


def test_weighted_defect():
    spec = example()
    grid = build_grid(spec)
    z = picard_solve(perturbed_problem(spec, 0.01, "cos(t)", CHI), grid=grid)
    eps = residual_epsilon(spec, z.y, chi=CHI)
    assert eps == pytest.approx(0.01, rel=1e-4)


# }}}


# {{{ certificates


def test_certificate_for_the_exact_solution():
    spec = example(f=F6 + " + t")
    sol = picard_solve(spec)
    cert = certify(spec, sol.y, reference=sol)
    assert cert.bound_holds
    assert cert.observed_deviation == 0.0
    assert cert.observed_gap == pytest.approx(cert.C * cert.epsilon)


@pytest.mark.parametrize("amplitude", [1e-2, 1e-3])
@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0])
def test_uh_bound_holds_for_injected_perturbations(amplitude, nu):
    cert, _, _ = certify_perturbation(example(nu=nu), amplitude, "ulam_hyers")
    assert cert.bound_holds
    assert cert.observed_gap >= 0
    assert cert.epsilon == pytest.approx(amplitude, rel=1e-4)


def test_rassias_bound_on_the_reference_problem():
    cert, _, _ = certify_perturbation(example(), 0.01, "ulam_hyers_rassias", chi=CHI, K_star=1 / 9)
    assert cert.bound_holds
    # the bound holds here even though the K* comparison condition does not
    assert cert.K_star_verified is False


def test_supplied_epsilon_wins_when_larger():
    spec = example(f=F6 + " + t")
    sol = picard_solve(spec)
    cert = certify(spec, sol.y, epsilon=0.5, reference=sol)
    assert cert.epsilon == 0.5
    assert cert.epsilon_measured < 1e-9


def test_generalized_kinds_fix_the_defect_scale():
    spec = example()
    cert, _, _ = certify_perturbation(spec, 0.01, "generalized_uh")
    assert cert.epsilon == 1.0
    assert cert.bound_holds


def test_rassias_needs_weight_and_constant():
    spec = example()
    sol = picard_solve(spec, SolverConfig(grid_size=32))
    with pytest.raises(DomainError):
        certify(spec, sol.y, "ulam_hyers_rassias", reference=sol)
    with pytest.raises(DomainError):
        certify(spec, sol.y, "nonsense", reference=sol)


def test_certificate_invariants():
    with pytest.raises(DomainError):
        StabilityCertificate("bogus", 0.1, 1.0, True, 0.0)
    d = StabilityCertificate("ulam_hyers", 0.1, 1.0, True, 0.05).as_dict()
    assert d["bound_holds"] is True and d["K_star"] is None


def test_reference_on_another_grid_is_rejected():
    spec = example()
    a = picard_solve(spec, SolverConfig(grid_size=32))
    b = picard_solve(spec, SolverConfig(grid_size=32))
    with pytest.raises(ValueError):
        certify(spec, a.y, reference=b)


@settings(max_examples=8, deadline=None)
@given(
    st.floats(1e-4, 5e-2),
    st.sampled_from(["cos(t)", "1", "t", "sin(3*t)", "exp(-t)"]),
    st.sampled_from([0.0, 0.5, 1.0]),
)
def test_certificate_soundness(amplitude, shape, nu):
    spec = example(nu=nu)
    cfg = SolverConfig(grid_size=256)
    cert, _, _ = certify_perturbation(spec, amplitude, shape=shape, cfg=cfg)
    assert cert.bound_holds
    assert (cert.observed_gap >= 0) == cert.bound_holds


# }}}


def test_grid_for_power_phi_excludes_the_singular_derivative():
    grid = PhiGrid.build(PhiFunction.power(0.5), 0.0, 1.0, 16)
    v = GridFunction.plain(grid, 1.0)
    out = gronwall_bound(v, 0.5, 1.5)
    assert np.all(np.isfinite(out.values))
