"""Kelvin–Ångström unit system with hbar = k_B = 1.

Energies are in Kelvin, lengths in Ångström, and one internal time unit is
hbar / k_B seconds. Laboratory units (m/s, s, ps) only appear at the edges.
"""

from dataclasses import dataclass
from functools import lru_cache

# CODATA 2018
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
HE4_MASS_U = 4.002602
HE4_MASS = HE4_MASS_U * ATOMIC_MASS_UNIT  # kg

ANGSTROM = 1e-10  # m
PICOSECOND = 1e-12  # s


@dataclass(frozen=True)
class PhysicalConstants:
    kinetic_coefficient: float  # hbar^2 / 2m, K Å^2
    mass_internal: float  # 1 / (2 kinetic_coefficient), K^-1 Å^-2
    time_unit_seconds: float  # hbar / k_B


@lru_cache(maxsize=None)
def derive_constants():
    kinetic = HBAR**2 / (2.0 * HE4_MASS * K_B) / ANGSTROM**2
    return PhysicalConstants(
        kinetic_coefficient=kinetic,
        mass_internal=1.0 / (2.0 * kinetic),
        time_unit_seconds=HBAR / K_B,
    )


def velocity_to_internal(v, constants=None):
    """Convert m/s to Å per internal time unit."""
    constants = constants or derive_constants()
    return v * constants.time_unit_seconds / ANGSTROM


def velocity_from_internal(v_int, constants=None):
    constants = constants or derive_constants()
    return v_int * ANGSTROM / constants.time_unit_seconds


def seconds_to_internal(t, constants=None):
    constants = constants or derive_constants()
    return t / constants.time_unit_seconds


def internal_to_seconds(t_int, constants=None):
    constants = constants or derive_constants()
    return t_int * constants.time_unit_seconds


def ps_to_internal(t_ps, constants=None):
    return seconds_to_internal(t_ps * PICOSECOND, constants)


def internal_to_ps(t_int, constants=None):
    return internal_to_seconds(t_int, constants) / PICOSECOND


def wavenumber(v, constants=None):
    """Single-particle wavenumber m v / hbar in Å^-1 for a velocity in m/s."""
    constants = constants or derive_constants()
    return constants.mass_internal * velocity_to_internal(v, constants)


def wall_momentum_transfer(v, constants=None):
    """Momentum transfer 2 m v per particle (Å^-1) for elastic reflection."""
    if v < 0:
        raise ValueError("velocity must be non-negative")
    return 2.0 * wavenumber(v, constants)
