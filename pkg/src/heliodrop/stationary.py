"""Stationary drop profiles from the first integral of the profile equation.

For a localized slab the density obeys

    (drho/dx)^2 = 8 m rho / (8 m rho d + 1) * (-mu rho + b rho^2/2 + c rho^(2+gamma)/2)

with the turning point rho(0) = rho0 fixing mu. Close to the bulk density
the bracket is a tiny difference of O(1) numbers, so the march works with
the square root of the depletion ``rho0 - rho`` and a cancellation-free
form of the bracket.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, NonDecaying, TurningPointStall
from .functional import FunctionalParams, bulk_density, energy_per_particle
from .grid import Grid

TAIL_SWITCH = 1e-9  # Å^-3, below this the profile continues as an exponential
TAIL_END = 1e-16  # Å^-3, sampling stops here
BULK_MARGIN = 1e-9  # rho0 must stay this far below the bulk density


@dataclass(frozen=True)
class DensityProfile:
    """Even drop profile on a symmetric mesh centered at x = 0."""

    grid: Grid
    rho: np.ndarray
    rho0: float
    mu: float
    n_per_area: float
    x_eff: float
    tail_decay: float  # Å^-1, exponential decay rate beyond the stored span

    @property
    def x(self):
        return self.grid.x

    @property
    def half_width(self):
        return self.grid.x_wall

    def density_at(self, x, center=0.0):
        """Sample the profile centered at ``center`` on arbitrary points.

        Inside the stored span the profile is interpolated with a monotone
        cubic; beyond it the exponential tail is continued analytically.
        """
        s = np.abs(np.asarray(x, dtype=float) - center)
        half = self.half_width
        out = np.empty_like(s)
        inside = s <= half
        interp = PchipInterpolator(self.x, self.rho, extrapolate=False)
        out[inside] = interp(s[inside])
        out[~inside] = self.rho[-1] * np.exp(-self.tail_decay * (s[~inside] - half))
        return out

    def header(self):
        return {"rho0": self.rho0, "mu": self.mu, "N": self.n_per_area, "x_eff": self.x_eff}


def tail_decay_constant(mu, mass):
    return math.sqrt(8.0 * mass * -mu)


def _check_center_density(rho0, params):
    rho_bulk = bulk_density(params)
    if not (0.0 < rho0 < rho_bulk):
        raise ConfigError(
            f"center density {rho0!r} must lie in (0, {rho_bulk:.8g}), "
            "the bulk density bound; no localized profile exists otherwise"
        )
    return rho_bulk


def mu_from_center_density(rho0, params=None):
    """Chemical potential (K) for which rho0 is the turning point of the profile."""
    params = params or FunctionalParams()
    _check_center_density(rho0, params)
    return energy_per_particle(rho0, params)


def slope_squared(rho, mu, params=None):
    """(drho/dx)^2 in Å^-8 from the first integral."""
    params = params or FunctionalParams()
    rho = np.maximum(np.asarray(rho, dtype=float), 0.0)
    m = params.mass
    bracket = -mu * rho + 0.5 * params.b * rho**2 + 0.5 * params.c * rho ** (2.0 + params.gamma)
    return 8.0 * m * rho / (8.0 * m * rho * params.d + 1.0) * bracket


class _Depletion:
    """Right-hand side for w = sqrt(rho0 - rho), which is regular at the center.

    With u = w^2 the profile equation becomes dw/dx = sqrt(S(u) / u) / 2, and
    S(u) / u tends to a finite limit as u -> 0, so the square-root turning
    point does not degrade the one-step march.
    """

    def __init__(self, rho0, params):
        self.rho0 = rho0
        self.params = params
        self.power = 1.0 + params.gamma
        # g'(rho0) for g = e/rho; vanishes at the bulk density
        self.g_slope = 0.5 * params.b + 0.5 * self.power * params.c * rho0**params.gamma
        self.c_term = 0.5 * params.c * rho0**self.power
        m = params.mass
        self.curvature = rho0 * self.g_slope / (2.0 * params.d + 1.0 / (4.0 * m * rho0))

    def rate(self, w):
        u = w * w
        rho = self.rho0 - u
        if rho <= 0.0:
            return 0.0
        s = u / self.rho0
        p = self.power
        # (g(rho) - g(rho0)) / u = -g'(rho0) + (c/2) rho0^p [(1 - s)^p - 1 + p s] / u
        if s > 0.0:
            excess = -self.g_slope + self.c_term * (math.expm1(p * math.log1p(-s)) + p * s) / u
        else:
            excess = -self.g_slope
        m = self.params.mass
        value = 8.0 * m * rho / (8.0 * m * rho * self.params.d + 1.0) * rho * excess
        return 0.5 * math.sqrt(value) if value > 0.0 else 0.0


def solve_profile(rho0, dx=0.05, params=None, max_half_width=5000.0):
    """Integrate the stationary profile outward from its center.

    Returns a :class:`DensityProfile` sampled on a symmetric mesh of spacing
    ``dx`` that reaches down to ~1e-16 Å^-3.
    """
    params = params or FunctionalParams()
    rho_bulk = _check_center_density(rho0, params)
    if rho0 > rho_bulk - BULK_MARGIN:
        raise ConfigError(
            f"center density {rho0!r} is within {BULK_MARGIN:g} of the bulk "
            f"density {rho_bulk:.10g}; the profile would not decay"
        )
    if not dx > 0:
        raise ConfigError("dx must be positive")
    mu = mu_from_center_density(rho0, params)
    dep = _Depletion(rho0, params)

    # series start one step off the turning point: rho = rho0 + rho''(0) dx^2 / 2
    w = math.sqrt(max(-0.5 * dep.curvature * dx * dx, 0.0))
    if not w > 0.0:
        raise TurningPointStall(f"series start does not leave rho0 = {rho0!r} at dx = {dx}")
    roots = [0.0, w]
    max_steps = int(max_half_width / dx)
    f = dep.rate
    while rho0 - w * w >= TAIL_SWITCH:
        k1 = f(w)
        k2 = f(w + 0.5 * dx * k1)
        k3 = f(w + 0.5 * dx * k2)
        k4 = f(w + dx * k3)
        step = dx * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not w + step > w:
            raise TurningPointStall(f"profile march stalled at rho = {rho0 - w * w:.6g}")
        w += step
        roots.append(w)
        if len(roots) > max_steps:
            raise NonDecaying(
                f"density still {rho0 - w * w:.3g} Å^-3 at {max_half_width} Å from the center"
            )
    half = rho0 - np.asarray(roots) ** 2
    rho_switch = half[-1]
    kappa = tail_decay_constant(mu, params.mass)
    n_tail = int(math.ceil(math.log(max(rho_switch, TAIL_END) / TAIL_END) / (kappa * dx)))
    tail = rho_switch * np.exp(-kappa * dx * np.arange(1, n_tail + 1))
    half = np.concatenate([half, tail])

    rho = np.concatenate([half[:0:-1], half])
    m_half = half.size - 1
    grid = Grid(-m_half * dx, m_half * dx, rho.size)
    n_per_area = float(np.trapezoid(rho, dx=dx))
    return DensityProfile(
        grid=grid,
        rho=rho,
        rho0=float(rho0),
        mu=float(mu),
        n_per_area=n_per_area,
        x_eff=n_per_area / rho0,
        tail_decay=kappa,
    )


def stationary_residual(profile, params=None):
    """Pointwise residual (K) of the second-order stationary equation.

    Derivatives are taken with five-point stencils on the stored samples.
    """
    params = params or FunctionalParams()
    rho, dx, m = profile.rho, profile.grid.dx, params.mass
    d1 = np.zeros_like(rho)
    d2 = np.zeros_like(rho)
    d1[2:-2] = (-rho[4:] + 8 * rho[3:-1] - 8 * rho[1:-3] + rho[:-4]) / (12 * dx)
    d2[2:-2] = (-rho[4:] + 16 * rho[3:-1] - 30 * rho[2:-2] + 16 * rho[1:-3] - rho[:-4]) / (
        12 * dx * dx
    )
    safe = np.maximum(rho, 1e-300)
    lhs = (
        params.b * rho
        + params.repulsion * rho ** (1 + params.gamma)
        - (2 * params.d + 1 / (4 * m * safe)) * d2
        + d1**2 / (8 * m * safe**2)
    )
    return lhs - profile.mu


def classical_stationary_profile(rho_start, span, params=None, mu=0.0, points=4001):
    """Integrate the stationary equation with the quantum pressure removed,

        2 d rho'' = b rho + (2 + gamma)/2 c rho^(1+gamma) - mu,

    from rho(0) = rho_start, rho'(0) = 0. Near vacuum this reduces to
    rho'' = (b / 2d) rho, whose solutions oscillate through zero.
    Returns (x, rho).
    """
    from scipy.integrate import solve_ivp

    params = params or FunctionalParams()

    def f(_, y):
        r = y[0]
        power = params.repulsion * abs(r) ** (1 + params.gamma) * math.copysign(1.0, r)
        return [y[1], (params.b * r + power - mu) / (2.0 * params.d)]

    x = np.linspace(0.0, span, points)
    sol = solve_ivp(f, (0.0, span), [rho_start, 0.0], t_eval=x, method="DOP853",
                    rtol=1e-11, atol=1e-14 * abs(rho_start))
    return sol.t, sol.y[0]


def oscillation_wavenumber(x, y):
    """Mean wavenumber from successive zero crossings (linear interpolation)."""
    sign = np.signbit(y)
    idx = np.flatnonzero(sign[1:] != sign[:-1])
    if idx.size < 2:
        raise ValueError("fewer than two sign changes")
    roots = x[idx] - y[idx] * (x[idx + 1] - x[idx]) / (y[idx + 1] - y[idx])
    half_period = np.mean(np.diff(roots))
    return math.pi / half_period
