"""One-dimensional helium nanodrop scattering off a hard wall."""

from .units import PhysicalConstants, derive_constants
from .functional import FunctionalParams
from .grid import Grid
from .stationary import DensityProfile, solve_profile
from .dynamics import EvolutionConfig, WaveField, evolve, initialize


__version__ = "0.1.0"

__all__ = [
    "PhysicalConstants",
    "derive_constants",
    "FunctionalParams",
    "Grid",
    "DensityProfile",
    "solve_profile",
    "EvolutionConfig",
    "WaveField",
    "evolve",
    "initialize",
]
