import math

import mpmath
import numpy as np
import pytest

from heliodrop import errors
from heliodrop.functional import FunctionalParams, bulk_chemical_potential, bulk_density
from heliodrop.stationary import (
    classical_stationary_profile,
    mu_from_center_density,
    oscillation_wavenumber,
    slope_squared,
    solve_profile,
    stationary_residual,
)

P = FunctionalParams()


def _mu_mp(rho0):
    mpmath.mp.dps = 40
    r = mpmath.mpf(rho0)
    return float(mpmath.mpf(P.b) * r / 2 + mpmath.mpf(P.c) / 2 * r ** (1 + mpmath.mpf(P.gamma)))


def test_mu_bulk_limit():
    assert mu_from_center_density(0.021836) == pytest.approx(-7.15, abs=0.01)


def test_mu_small_density_limit():
    for rho0 in (1e-4, 1e-6, 1e-9):
        mu = mu_from_center_density(rho0)
        assert -1e-1 < mu < 0.0
    assert abs(mu_from_center_density(1e-9)) < 1e-6


def test_mu_matches_high_precision():
    assert mu_from_center_density(0.02) == pytest.approx(_mu_mp(0.02), rel=1e-13)
    assert mu_from_center_density(0.02) == pytest.approx(-7.06, abs=0.01)
    assert mu_from_center_density(0.02) > bulk_chemical_potential(P)


@pytest.mark.parametrize("rho0", [0.0, -0.01, 0.03, 0.0218361])
def test_mu_rejects_out_of_range(rho0):
    with pytest.raises(errors.ConfigError, match="bulk density"):
        mu_from_center_density(rho0)


def test_slope_zero_at_turning_point():
    rho0 = 0.02
    mu = mu_from_center_density(rho0)
    # the bracket cancels to round-off relative to its O(rho0 mu) terms
    assert abs(slope_squared(rho0, mu)) < 1e-14 * 8 * P.mass * rho0**2 * abs(mu)


def test_slope_tail_limit():
    mu = -7.15
    for rho in (1e-8, 1e-10, 1e-12):
        ratio = slope_squared(rho, mu) / rho**2
        assert ratio == pytest.approx(8 * P.mass * abs(mu), rel=1e-3)
    assert math.sqrt(8 * P.mass * 7.15) == pytest.approx(2.17, abs=0.01)


@pytest.mark.parametrize("rho0", [0.005, 0.02, 0.0218])
def test_slope_positive_inside(rho0):
    mu = mu_from_center_density(rho0)
    rho = np.linspace(0.0, rho0, 20001)[1:-1]
    assert np.all(slope_squared(rho, mu) > 0.0)


def test_large_profile_reference_values(large_profile):
    assert large_profile.n_per_area == pytest.approx(1.288, rel=0.1)
    assert large_profile.x_eff == pytest.approx(59.0, rel=0.1)


def test_small_profile_reference_values(small_profile):
    assert small_profile.n_per_area == pytest.approx(0.26, rel=0.1)
    assert small_profile.x_eff == pytest.approx(12.5, rel=0.1)


@pytest.mark.parametrize("rho0", [0.02, 0.02183599])
def test_dx_convergence(rho0):
    coarse = solve_profile(rho0, dx=0.05)
    fine = solve_profile(rho0, dx=0.025)
    assert abs(fine.n_per_area / coarse.n_per_area - 1) < 1e-3


@pytest.mark.parametrize("name", ["large_profile", "small_profile"])
def test_profile_invariants(name, request):
    prof = request.getfixturevalue(name)
    rho = prof.rho
    assert np.array_equal(rho, rho[::-1])
    assert np.all(rho >= 0)
    centre = rho.size // 2
    assert rho[centre] == prof.rho0
    assert np.all(np.diff(rho[centre:]) <= 0)
    assert rho[0] < 1e-10 and rho[-1] < 1e-10
    assert prof.n_per_area == pytest.approx(np.trapezoid(rho, dx=prof.grid.dx), rel=1e-14)
    assert prof.x_eff == pytest.approx(prof.n_per_area / prof.rho0, rel=1e-14)


@pytest.mark.parametrize("name", ["large_profile", "small_profile"])
def test_stationary_residual(name, request):
    prof = request.getfixturevalue(name)
    res = stationary_residual(prof)
    inner = prof.rho > 1e-6
    inner[:2] = inner[-2:] = False
    assert np.max(np.abs(res[inner])) < 1e-3 * abs(prof.mu)


@pytest.mark.parametrize("name", ["large_profile", "small_profile"])
def test_tail_decay_rate(name, request):
    prof = request.getfixturevalue(name)
    x, rho = prof.x, prof.rho
    band = (x > 0) & (rho >= 1e-9) & (rho <= 1e-5)
    slope = np.polyfit(x[band], np.log(rho[band]), 1)[0]
    assert slope == pytest.approx(-math.sqrt(8 * P.mass * abs(prof.mu)), rel=0.02)


def test_density_at_centering(small_profile):
    x = np.linspace(60.0, 160.0, 1001)
    rho = small_profile.density_at(x, center=110.0)
    assert rho[500] == pytest.approx(small_profile.rho0, rel=1e-12)
    assert np.allclose(rho, rho[::-1], rtol=1e-10, atol=1e-30)
    # analytic continuation beyond the stored span stays exponential
    far = small_profile.density_at(np.array([110.0 + small_profile.half_width + 5.0]), 110.0)
    assert far[0] < small_profile.rho[-1]


def test_solver_errors():
    with pytest.raises(errors.ConfigError):
        solve_profile(bulk_density(P))
    with pytest.raises(errors.ConfigError):
        solve_profile(bulk_density(P) - 5e-10)
    with pytest.raises(errors.NonDecaying):
        solve_profile(0.02, max_half_width=5.0)
    with pytest.raises(errors.TurningPointStall):
        solve_profile(0.02, dx=1e-200)


def test_classical_linearization_wavenumber():
    x, rho = classical_stationary_profile(1e-6, 150.0)
    k = oscillation_wavenumber(x, rho)
    assert k == pytest.approx(math.sqrt(-P.b / (2 * P.d)), rel=0.02)
    assert np.sum(np.diff(np.sign(rho)) != 0) >= 15
