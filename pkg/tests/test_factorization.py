import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calogero import factorization as fz
from calogero.factorization import (
    Bump,
    CouplingParams,
    DerivativeMissingError,
    FactorizationParams,
    InvalidParamsError,
    NoFactorizationError,
    PhiFamily,
    SampledFunction,
)
from calogero.specfun import DomainError

mp.mp.dps = 40
HALF_PI = math.pi / 2


def family(kappa, mu, s, k0=1.0):
    return PhiFamily(CouplingParams.from_kappa(kappa, k0), FactorizationParams(mu, s))


def mp_phi(kappa, mu, s, x, k0=1.0):
    """Reference phi in extended precision."""
    sin_mu, cos_mu = (mp.mpf(1), mp.mpf(0)) if mu == HALF_PI else (mp.sin(mu), mp.cos(mu))
    kappa, s, xi = mp.mpf(kappa), mp.mpf(s), mp.mpf(k0) * x
    if s == 0:
        if kappa == 0:
            return mp.sqrt(xi)
        return sin_mu * xi ** (0.5 + kappa) + cos_mu * xi ** (0.5 - kappa)
    if kappa == 0:
        p, q = sin_mu, cos_mu
    else:
        p = sin_mu * mp.gamma(1 + kappa) * (s / 2) ** -kappa
        q = cos_mu * 2 / mp.gamma(kappa) * (s / 2) ** kappa
    z = s * xi
    return mp.sqrt(xi) * (p * mp.besseli(kappa, z) + q * mp.besselk(kappa, z))


# --- parameter records -----------------------------------------------------


def test_coupling_branches():
    c = CouplingParams.from_alpha(0.75)
    assert c.kappa == 1.0 and c.sigma is None
    c = CouplingParams.from_alpha(-1.25)
    assert c.sigma == pytest.approx(1.0) and c.kappa is None
    assert CouplingParams.from_kappa(0.3).alpha == pytest.approx(0.09 - 0.25)
    assert CouplingParams.from_sigma(2.0).alpha == pytest.approx(-4.25)
    with pytest.raises(InvalidParamsError):
        CouplingParams.from_alpha(0.0, k0=-1)
    with pytest.raises(InvalidParamsError):
        FactorizationParams(2.0, 1.0)
    with pytest.raises(InvalidParamsError):
        FactorizationParams(0.5, -1.0)


def test_forbidden_corner_and_no_factorization():
    with pytest.raises(InvalidParamsError):
        family(0.0, 0.3, 0.0)
    family(0.0, HALF_PI, 0.0)
    with pytest.raises(NoFactorizationError):
        PhiFamily(CouplingParams.from_alpha(-1.0), FactorizationParams(0.0, 1.0))


def test_small_kappa_warns():
    with pytest.warns(RuntimeWarning):
        family(1e-4, 0.3, 1.0)


# --- phi ---------------------------------------------------------------------


def test_phi_documented_values():
    assert fz.phi(family(0.5, HALF_PI, 0.0), 2.5) == pytest.approx(2.5, rel=1e-15)
    # Gamma(3/2) sqrt(2) I_{1/2}(1) collapses to sinh(1)
    assert fz.phi(family(0.5, HALF_PI, 1.0), 1.0) == pytest.approx(math.sinh(1), rel=1e-14)
    assert fz.phi(family(0.5, 0.0, 1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-14)


@pytest.mark.parametrize("kappa,mu,s,k0", [
    (0.3, 0.7, 0.7, 1.0), (1.0, 0.0, 1.0, 1.0), (1.7, 1.2, 4.0, 2.0), (0.0, 0.4, 2.0, 1.0),
    (0.0, HALF_PI, 0.0, 0.5), (0.8, 0.2, 0.0, 1.0), (2.0, HALF_PI, 0.3, 3.0),
])
def test_phi_matches_mpmath(kappa, mu, s, k0):
    fam = family(kappa, mu, s, k0)
    x = np.geomspace(1e-6, 30, 25) / k0
    got = fz.phi(fam, x)
    ref = np.array([float(mp_phi(kappa, mu, s, xi, k0)) for xi in x])
    np.testing.assert_allclose(got, ref, rtol=1e-12)
    lp = fz.log_phi(fam, x)
    np.testing.assert_allclose(lp, np.log(ref), rtol=1e-12, atol=1e-13)


def test_log_phi_has_no_overflow():
    fam = family(0.4, 0.5, 3.0)
    x = 2000.0
    assert np.isinf(fz.phi(fam, x))
    ref = mp.log(mp_phi(0.4, 0.5, 3.0, x))
    assert fz.log_phi(fam, x) == pytest.approx(float(ref), rel=1e-13)


def test_domain_errors():
    fam = family(0.5, 0.3, 1.0)
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(DomainError):
            fz.phi(fam, bad)
        with pytest.raises(DomainError):
            fz.h(fam, bad)


@pytest.mark.parametrize("kappa,mu,s", [(0.3, 0.0, 0.01), (1.2, 0.8, 5.0), (0.0, 0.0, 0.5), (0.6, HALF_PI, 0.0)])
def test_positivity_on_wide_grid(kappa, mu, s):
    fam = family(kappa, mu, s)
    assert fz.positive_on(fam, fz.log_grid(lo=1e-8, hi=1e3, per_decade=50))


# --- h, h' ------------------------------------------------------------------


def test_h_documented_values():
    for kappa in (0.3, 1.0, 2.2):
        x = np.array([0.01, 1.0, 7.0])
        np.testing.assert_allclose(fz.h(family(kappa, HALF_PI, 0.0), x), (0.5 + kappa) / x, rtol=1e-14)
    np.testing.assert_allclose(fz.h(family(0.5, 0.0, 1.0), np.geomspace(1e-3, 30, 20)), -1.0, rtol=1e-12)


@pytest.mark.parametrize("kappa,mu,s", [(0.3, 1.0, 0.7), (0.0, 0.2, 1.5), (1.5, 0.0, 2.0)])
def test_h_and_h_prime_against_mpmath(kappa, mu, s):
    fam = family(kappa, mu, s)
    for x in (1e-3, 0.2, 3.0):
        d1 = mp.diff(lambda t: mp.log(mp_phi(kappa, mu, s, t)), x)
        d2 = mp.diff(lambda t: mp.log(mp_phi(kappa, mu, s, t)), x, 2)
        assert fz.h(fam, x) == pytest.approx(float(d1), rel=1e-11)
        assert fz.h_prime(fam, x) == pytest.approx(float(d2), rel=1e-9)


def test_riccati_documented_cases():
    grid = fz.log_grid(lo=1e-4, hi=1e2, per_decade=100)
    assert fz.riccati_residual(family(0.7, HALF_PI, 0.0), grid) <= 1e-12
    assert fz.riccati_residual(family(0.5, 0.0, 1.0), grid) <= 1e-14
    assert fz.riccati_residual(family(0.3, 1.0, 0.7), grid) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(kappa=st.just(0.0) | st.floats(1e-3, 3.0), mu=st.floats(0.0, HALF_PI), s=st.floats(0.01, 8.0),
       k0=st.floats(0.2, 5.0))
def test_riccati_property(kappa, mu, s, k0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fam = family(kappa, mu, s, k0)
    grid = fz.log_grid(k0, lo=1e-3, hi=1e3, per_decade=30)
    assert fz.riccati_residual(fam, grid) <= 1e-7
    assert fz.positive_on(fam, grid)


@pytest.mark.parametrize("kappa", [0.3, 1.0, 1.7])
@pytest.mark.parametrize("mu", [0.0, math.pi / 4, HALF_PI])
def test_h_at_large_x_second_order(kappa, mu):
    # h -> h_inf (1 + (4 kappa^2 - 1) / (8 z^2)) with h_inf = +s k0 when the I branch is present
    s, k0 = 2.0, 1.5
    fam = family(kappa, mu, s, k0)
    lim = fz.h_limit_at_infinity(fam)
    assert lim == pytest.approx(-s * k0 if mu == 0.0 else s * k0)
    z = 100.0
    expected = lim * (1 + (4 * kappa**2 - 1) / (8 * z * z))
    assert abs(fz.h(fam, z / (s * k0)) - expected) <= 5e-6 * s * k0


@pytest.mark.parametrize("kappa", [0.3, 0.7, 1.0, 1.4])
@pytest.mark.parametrize("mu", [0.0, 0.9, HALF_PI])
def test_h_limit_invariant_where_first_order_suffices(kappa, mu):
    s = 2.0
    fam = family(kappa, mu, s)
    assert abs(fz.h(fam, 100 / s) - fz.h_limit_at_infinity(fam)) <= 1e-4 * s


def test_h_limit_for_pure_i_branch_is_positive():
    fam = family(0.6, HALF_PI, 1.0)
    assert fz.h(fam, 500.0) > 0.99


# --- first-order operations ----------------------------------------------------


def _phi_sample(fam, grid):
    v = fz.phi(fam, grid)
    hh = fz.h(fam, grid)
    return SampledFunction(grid, v, v * hh, v * (fz.h_prime(fam, grid) + hh * hh))


@pytest.mark.parametrize("kappa,mu,s", [(0.3, 0.2, 1.0), (0.0, 0.9, 2.0), (1.6, HALF_PI, 0.5), (0.9, 0.0, 0.0)])
def test_kernel_of_a(kappa, mu, s):
    fam = family(kappa, mu, s)
    grid = np.geomspace(1e-4, 20, 200)
    f = _phi_sample(fam, grid)
    out = fz.apply_a(fam, f)
    assert np.max(np.abs(out.values) / np.abs(f.derivative).clip(min=np.abs(f.values))) <= 1e-10


def test_b_annihilates_inverse_phi():
    fam = family(0.4, 0.6, 1.3)
    grid = np.geomspace(0.05, 10, 100)
    v = fz.phi(fam, grid)
    inv = SampledFunction(grid, 1 / v, -fz.h(fam, grid) / v)
    out = fz.apply_b(fam, inv)
    assert np.max(np.abs(out.values) * v) <= 1e-12


def test_missing_derivative_is_an_error():
    fam = family(0.4, 0.6, 1.3)
    grid = np.linspace(1, 2, 5)
    with pytest.raises(DerivativeMissingError):
        fz.apply_a(fam, SampledFunction(grid, grid))
    with pytest.raises(DerivativeMissingError):
        fz.apply_b(fam, SampledFunction(grid, grid))


def test_sampled_function_validation():
    with pytest.raises(ValueError):
        SampledFunction([1.0, 0.5], [1.0, 2.0])
    with pytest.raises(ValueError):
        SampledFunction([1.0, 2.0], [1.0])


def test_bump_derivatives_by_finite_differences():
    b = Bump(1.0, 0.5)
    x = np.linspace(0.6, 1.4, 9)
    d = 1e-6
    f, f1, f2 = b(x)
    np.testing.assert_allclose(f1, (b(x + d)[0] - b(x - d)[0]) / (2 * d), atol=1e-7)
    np.testing.assert_allclose(f2, (b(x + d)[1] - b(x - d)[1]) / (2 * d), atol=1e-6)


@pytest.mark.parametrize("kappa,mu,s", [(0.0, HALF_PI, 0.0), (1.0, 0.0, 1.0), (0.25, 1.1, 3.0), (2.0, 0.4, 0.0)])
def test_factorization_identity(kappa, mu, s):
    assert fz.factorization_residual(family(kappa, mu, s)) <= 1e-8


def test_factorization_two_ways_on_phi_times_bump():
    # b a (phi c) = -phi (c'' + 2 h c')
    fam = family(0.35, 0.8, 1.7)
    bump = Bump(1.2, 0.8)
    grid = bump.support_grid(401)
    c, c1, c2 = bump(grid)
    p = fz.phi(fam, grid)
    hh = fz.h(fam, grid)
    hp = fz.h_prime(fam, grid)
    f = SampledFunction(grid, p * c, p * (c1 + hh * c), p * (c2 + 2 * hh * c1 + (hp + hh * hh) * c))
    direct = fz.apply_b(fam, fz.apply_a(fam, f)).values
    expanded = -p * (c2 + 2 * hh * c1)
    assert np.max(np.abs(direct - expanded)) <= 1e-9 * np.max(np.abs(expanded))


# --- s -> 0 limit and amp_tilde ---------------------------------------------------------


def test_continuity_gap_shrinks_like_s_to_two_kappa():
    from calogero.suites import continuity_gap

    g2, g3 = continuity_gap(0.3, 0.0, 1e-2), continuity_gap(0.3, 0.0, 1e-3)
    assert g3 / g2 == pytest.approx(10 ** -0.6, rel=0.05)
    assert continuity_gap(1.7, 0.0, 1e-3) < 1e-8


@pytest.mark.parametrize("kappa,mu,s", [(0.3, 0.4, 1.0), (0.7, 0.0, 2.0), (0.0, 0.5, 1.5)])
def test_amp_tilde_is_the_regular_coefficient(kappa, mu, s):
    fam = family(kappa, mu, s)
    xi = 1e-7
    ref = mp_phi(kappa, mu, s, xi)
    if kappa == 0:
        # phi ~ sqrt(xi) (amp_tilde - cos(mu) ln xi)
        est = float(ref / mp.sqrt(xi) + mp.cos(mu) * mp.log(xi))
    else:
        sing = mp.cos(mu) * xi ** (0.5 - kappa)
        est = float((ref - sing) / xi ** (0.5 + kappa))
    assert fam.amp_tilde == pytest.approx(est, rel=1e-3)


# --- inhomogeneous equations -----------------------------------------------------


def test_b_homogeneous_solution():
    fam = family(0.4, 0.3, 1.0)
    grid = np.geomspace(1e-4, 5, 60)
    sol = fz.solve_inhomogeneous_b(fam, lambda x: np.zeros_like(x), 1.0, grid)
    np.testing.assert_allclose(sol.psi.values, 1 / fz.phi(fam, grid), rtol=1e-14)


def test_b_with_bump_source():
    fam = family(0.4, 0.3, 1.0)
    bump = Bump(1.0, 0.6)

    def eta(x):
        return -bump(x)[1] / fz.phi(fam, x)

    grid = np.geomspace(1e-3, 3, 80)
    sol = fz.solve_inhomogeneous_b(fam, eta, 0.5, grid)
    expected = (0.5 + bump(grid)[0]) / fz.phi(fam, grid)
    np.testing.assert_allclose(sol.psi.values, expected, rtol=1e-9, atol=1e-12)
    assert sol.residual <= 1e-8
    assert sol.lower_limit == 0.0


def test_a_homogeneous_solution_and_limits():
    fam = family(0.4, 0.3, 1.0)
    grid = np.geomspace(1e-4, 5, 40)
    sol = fz.solve_inhomogeneous_a(fam, lambda x: np.zeros_like(x), 1.0, grid)
    np.testing.assert_allclose(sol.psi.values, fz.phi(fam, grid), rtol=1e-14)
    assert fz.solve_inhomogeneous_a(family(0.4, HALF_PI, 1.0), lambda x: 0 * x, 1.0, grid).lower_limit == 1.0
    assert fz.solve_inhomogeneous_b(family(1.5, 0.3, 1.0), lambda x: 0 * x, 1.0, grid).lower_limit == 1.0


def test_free_constant_rules():
    grid = np.geomspace(1e-3, 1, 10)
    with pytest.raises(InvalidParamsError):
        fz.solve_inhomogeneous_b(family(0.4, HALF_PI, 1.0), lambda x: 0 * x, 1.0, grid)
    with pytest.raises(InvalidParamsError):
        fz.solve_inhomogeneous_a(family(1.5, 0.3, 1.0), lambda x: 0 * x, 1.0, grid)


def test_a_solution_satisfies_the_equation_by_differences():
    fam = family(0.6, 0.5, 1.2)
    grid = np.geomspace(1e-3, 4, 2000)

    def eta(x):
        return np.sin(np.asarray(x)) * np.exp(-np.asarray(x))

    sol = fz.solve_inhomogeneous_a(fam, eta, 0.3, grid)
    chi = sol.psi.values
    hchi = fz.h(fam, grid) * chi
    lhs = np.gradient(chi, grid) - hchi
    scale = np.abs(hchi) + np.abs(eta(grid))
    assert np.max((np.abs(lhs - eta(grid)) / scale)[2:-2]) < 1e-4


def test_quadrature_failure_is_reported():
    fam = family(0.4, 0.3, 1.0)

    def nasty(x):
        return np.sin(1e9 * np.asarray(x)) / np.asarray(x) ** 1.5

    with pytest.raises(fz.QuadratureError):
        fz.solve_inhomogeneous_b(fam, nasty, 0.0, np.geomspace(1e-3, 1, 5))


def test_fit_helpers():
    x = np.geomspace(1e-6, 1e-3, 30)
    assert fz.fit_power_exponent(x, 3 * x**0.37, 1e-6, 1e-3) == pytest.approx(0.37, rel=1e-12)
    a, b = fz.fit_log_profile(x, np.sqrt(x) * (2 - 0.5 * np.log(x)), 1e-6, 1e-3)
    assert (a, b) == (pytest.approx(2), pytest.approx(-0.5))
    with pytest.raises(ValueError):
        fz.fit_power_exponent(x, x, 1.0, 2.0)
