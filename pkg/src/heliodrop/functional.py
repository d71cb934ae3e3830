"""Stringari–Treiner local density functional for liquid He-4.

Densities are in Å^-3, potentials in K. The energy density is

    e(rho) = b rho^2 / 2 + c rho^(2+gamma) / 2 + d (drho/dx)^2

and the self-interaction O(rho) is its functional derivative.

All stencils treat the field as vanishing one node beyond each end of the
array, which is the hard-wall closure used by the dynamics.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .units import PhysicalConstants, derive_constants

RHO_FLOOR = 1e-12  # Å^-3, soft floor inside sqrt(rho) for the quantum potential
CLASSICAL_FLOOR = 1e-8  # Å^-3, softening used by the classical dynamics
NEGATIVE_CLAMP = 1e-14  # round-off negatives above -this are set to zero


@dataclass(frozen=True)
class FunctionalParams:
    b: float = -888.81  # K Å^3
    c: float = 1.04554e7  # K Å^(3 + 3 gamma)
    gamma: float = 2.8
    d: float = 2383.0  # K Å^5
    constants: PhysicalConstants = field(default_factory=derive_constants)

    def __post_init__(self):
        # zero coefficients are allowed so the linear (free) limit can be run
        if self.b > 0 or self.c < 0 or self.d < 0:
            raise ValueError("need b <= 0, c >= 0, d >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def kinetic(self):
        """hbar^2 / 2m in K Å^2."""
        return self.constants.kinetic_coefficient

    @property
    def mass(self):
        return self.constants.mass_internal

    @property
    def repulsion(self):
        """Coefficient (2 + gamma) c / 2 of rho^(1+gamma) in O(rho)."""
        return 0.5 * (2.0 + self.gamma) * self.c

    @classmethod
    def free(cls, constants=None):
        """Parameters with every interaction switched off."""
        return cls(b=0.0, c=0.0, d=0.0, constants=constants or derive_constants())


def _require_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("field contains non-finite values")


def clamp_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < -NEGATIVE_CLAMP):
        raise ValueError("density is negative beyond round-off")
    return np.maximum(rho, 0.0)


def second_difference(f, dx):
    """Three-point second derivative with zero ghost values at both ends."""
    f = np.asarray(f)
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
    out[0] = f[1] - 2.0 * f[0]
    out[-1] = f[-2] - 2.0 * f[-1]
    return out / (dx * dx)


def edge_differences(f, dx):
    """First differences on the n+1 cell edges, including the two ghosts."""
    f = np.asarray(f)
    padded = np.concatenate([[0.0], f, [0.0]])
    return np.diff(padded) / dx


def self_interaction(rho, rho_second_derivative, params):
    """O(rho) = b rho + (2+gamma)/2 c rho^(1+gamma) - 2 d rho''."""
    _require_finite(rho, rho_second_derivative)
    rho = clamp_density(rho)
    return (
        params.b * rho
        + params.repulsion * rho ** (1.0 + params.gamma)
        - 2.0 * params.d * np.asarray(rho_second_derivative)
    )


def self_interaction_on_grid(rho, dx, params):
    return self_interaction(rho, second_difference(rho, dx), params)


def interaction_energy(rho, dx, params):
    """Potential part of the energy per area: integral of e(rho) (K Å^-2)."""
    rho = clamp_density(rho)
    local = 0.5 * params.b * rho**2 + 0.5 * params.c * rho ** (2.0 + params.gamma)
    grad = edge_differences(rho, dx)
    # endpoints carry trapezoid weight 1/2, gradient lives on cell edges
    bulk = dx * (local.sum() - 0.5 * (local[0] + local[-1]))
    return bulk + params.d * dx * np.sum(grad**2)


def kinetic_energy(values, dx, params):
    grad = edge_differences(values, dx)
    return params.kinetic * dx * np.sum(np.abs(grad) ** 2)


def floored_amplitude(rho, floor=RHO_FLOOR):
    return np.sqrt(clamp_density(rho) + floor)


def quantum_pressure_energy(rho, dx, params, floor=RHO_FLOOR):
    """(1/2m) integral of (d sqrt(rho + floor)/dx)^2, the part removed in classical mode.

    Its functional derivative is exactly :func:`quantum_potential`.
    """
    amp = floored_amplitude(rho, floor)
    return params.kinetic * dx * np.sum(edge_differences(amp, dx) ** 2)


def field_energy(values, dx, params, classical=False, floor=CLASSICAL_FLOOR):
    _require_finite(values)
    rho = np.abs(values) ** 2
    energy = kinetic_energy(values, dx, params) + interaction_energy(rho, dx, params)
    if classical:
        energy -= quantum_pressure_energy(rho, dx, params, floor)
    return float(energy)


def energy_per_area(psi, params, classical=False):
    """Energy per unit area of a :class:`WaveField` in K Å^-2.

    With ``classical=True`` the quantum-pressure energy is subtracted,
    which is the functional conserved by the classical comparator.
    """
    return field_energy(psi.values, psi.grid.dx, params, classical=classical)


def quantum_potential(rho, dx, params, floor=RHO_FLOOR):
    """Madelung potential -(1/2m) (sqrt rho)'' / sqrt rho.

    The floor is added under the square root, so the potential is finite
    everywhere and fades to zero in vacuum while staying the exact
    derivative of :func:`quantum_pressure_energy`.
    """
    amp = floored_amplitude(rho, floor)
    return -params.kinetic * second_difference(amp, dx) / amp


def energy_per_particle(rho, params):
    """Bulk energy per particle e(rho)/rho = b rho/2 + c rho^(1+gamma)/2."""
    return 0.5 * params.b * rho + 0.5 * params.c * rho ** (1.0 + params.gamma)


def bulk_density(params):
    """Zero-pressure density, the minimum of the energy per particle."""
    if not (params.b < 0 and params.c > 0):
        raise ValueError("bulk density needs b < 0 and c > 0")
    return (-params.b / ((1.0 + params.gamma) * params.c)) ** (1.0 / params.gamma)


def bulk_chemical_potential(params, rho=None):
    if rho is None:
        rho = bulk_density(params)
    return energy_per_particle(rho, params)


def classical_vacuum_wavenumber(params):
    """Wavenumber sqrt(-b / 2d) of the linearized classical equation rho'' = (b/2d) rho."""
    if not (params.b < 0 and params.d > 0):
        raise ValueError("need b < 0 and d > 0")
    return math.sqrt(-params.b / (2.0 * params.d))
