import math

import numpy as np
import pytest

from calogero import extensions as ex
from calogero import oracle as orc
from calogero.extensions import ExtensionParam, RegimeError
from calogero.factorization import CouplingParams, fit_log_profile, fit_power_exponent

HALF_PI = math.pi / 2


def setup(kappa, nu, k0=1.0):
    c = CouplingParams.from_kappa(kappa, k0)
    return ExtensionParam.for_coupling(nu, c), c


def test_shoot_examples():
    nu, c = setup(0.5, -math.pi / 4)
    assert abs(orc.shoot(nu, c, -1.0)) <= 1e-8
    assert abs(orc.shoot(nu, c, -4.0)) > 0.1


def test_friedrichs_extension_has_no_root():
    for kappa in (0.0, 0.5):
        nu, c = setup(kappa, HALF_PI)
        _, values = orc.scan(nu, c, bracket=(-10.0, -1e-6))
        assert orc.count_sign_changes(values) == 0


def test_find_bound_state_examples():
    nu, c = setup(0.5, -math.pi / 4)
    res = orc.find_bound_state(nu, c)
    assert res.exists and res.energy == pytest.approx(-1.0, rel=1e-6)
    nu, c = setup(0.0, 0.0)
    res = orc.find_bound_state(nu, c)
    assert res.energy == pytest.approx(-4 * math.exp(-2 * 0.5772156649015329), rel=1e-6)
    nu, c = setup(0.75, 0.3)
    assert not orc.find_bound_state(nu, c).exists


@pytest.mark.parametrize("kappa,nu,k0", [(0.25, -1.3, 1.0), (0.75, -0.05, 1.0), (0.5, -0.9, 2.5), (0.0, -0.7, 1.0), (0.0, 0.8, 0.5)])
def test_oracle_matches_closed_form(kappa, nu, k0):
    e, c = setup(kappa, nu, k0)
    closed = ex.ground_state(e, c).energy
    res = orc.find_bound_state(e, c)
    assert res.energy == pytest.approx(closed, rel=1e-6)
    assert res.sign_changes == 1


def test_mesh_refinement():
    e, c = setup(0.3, -0.5)
    cfg = orc.ShootingConfig()
    coarse = orc.find_bound_state(e, c, cfg).energy
    fine = orc.find_bound_state(e, c, cfg.refined()).energy
    assert abs(fine - coarse) <= 1e-8 * abs(coarse)


@pytest.mark.parametrize("kappa,nu", [(0.25, -0.2), (0.6, -0.9), (0.0, 0.3)])
def test_uniqueness_of_the_negative_level(kappa, nu):
    e, c = setup(kappa, nu)
    closed = ex.ground_state(e, c).energy
    _, values = orc.scan(e, c, bracket=(2 * closed, -1e-8))
    assert orc.count_sign_changes(values) == 1


@pytest.mark.parametrize("kappa", [0.2, 0.5, 0.8])
def test_boundary_exponent(kappa):
    e, c = setup(kappa, 0.0)
    cfg = orc.ShootingConfig(x0=1e-8)
    x = np.geomspace(1e-8, 1e-7, 20)
    chi = orc.solution_profile(e, c, -1.0, x, cfg)
    slope = fit_power_exponent(x, np.abs(chi), 1e-8, 1e-7)
    assert slope == pytest.approx(0.5 - kappa, rel=0.02)


def test_boundary_log_profile_at_kappa_zero():
    e, c = setup(0.0, 0.0)
    cfg = orc.ShootingConfig(x0=1e-8)
    x = np.geomspace(1e-8, 1e-7, 20)
    chi = orc.solution_profile(e, c, -1.0, x, cfg)
    a, b = fit_log_profile(x, chi, 1e-8, 1e-7)
    assert b == pytest.approx(1.0, rel=0.02)
    assert abs(a) < 0.02


def test_origin_data_examples():
    c = CouplingParams.from_kappa(0.3)
    x0 = 1e-6
    v, d = orc.origin_data(ExtensionParam.for_coupling(HALF_PI, c), c, x0, series=False)
    assert v == pytest.approx(x0**0.8, rel=1e-14) and d == pytest.approx(0.8 * x0**-0.2, rel=1e-14)
    c = CouplingParams.from_kappa(0.5)
    v, d = orc.origin_data(ExtensionParam.for_coupling(0.0, c), c, x0, series=False)
    assert v == pytest.approx(1.0, rel=1e-14) and d == pytest.approx(0.0, abs=1e-12)
    c = CouplingParams.from_kappa(0.0)
    v, d = orc.origin_data(ExtensionParam.for_coupling(0.0, c), c, x0, series=False)
    assert v == pytest.approx(math.sqrt(x0) * math.log(x0), rel=1e-14)


def test_origin_data_series_agrees_with_two_term_form():
    c = CouplingParams.from_kappa(0.4)
    nu = ExtensionParam.for_coupling(-0.3, c)
    full = orc.origin_data(nu, c, 1e-5, energy=-2.0)
    short = orc.origin_data(nu, c, 1e-5, energy=-2.0, series=False)
    np.testing.assert_allclose(full, short, rtol=1e-8)


def test_origin_data_errors():
    c = CouplingParams.from_kappa(0.4)
    nu = ExtensionParam.for_coupling(-0.3, c)
    with pytest.raises(orc.OriginTooLargeError):
        orc.origin_data(nu, c, 0.1, energy=-5.0, series=False)
    with pytest.raises(RegimeError):
        orc.origin_data(nu, CouplingParams.from_kappa(0.0), 1e-5)
    with pytest.raises(RegimeError):
        orc.shoot(nu, CouplingParams.from_alpha(-2.0), -1.0)
    with pytest.raises(ValueError):
        orc.shoot(nu, c, 0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        orc.ShootingConfig(x0=0.0)
    with pytest.raises(ValueError):
        orc.ShootingConfig(rtol=1e-6)
    with pytest.raises(ValueError):
        orc.ShootingConfig(e_bracket=(-1.0, 1.0))
    r = orc.ShootingConfig().refined()
    assert r.x0 == 0.5e-4 and r.rtol == 0.5e-12


def test_mismatch_is_scale_free():
    e, c = setup(0.4, -0.4)
    vals = [orc.shoot(e, c, en) for en in (-1e-6, -0.3, -50.0, -5e3)]
    assert all(-1 <= v <= 1 for v in vals)
