from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform mesh on [x_min, x_wall] with ``n`` nodes, both ends included."""

    x_min: float
    x_wall: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 points")
        if not self.x_wall > self.x_min:
            raise ValueError("x_wall must exceed x_min")

    @classmethod
    def from_spacing(cls, x_min, x_wall, dx):
        n = int(round((x_wall - x_min) / dx)) + 1
        return cls(x_min, x_wall, n)

    @property
    def dx(self):
        return (self.x_wall - self.x_min) / (self.n - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_wall, self.n)

    def index_of(self, x):
        return int(round((x - self.x_min) / self.dx))

    def as_dict(self):
        return {"x_min": self.x_min, "x_wall": self.x_wall, "n": self.n, "dx": self.dx}


DEFAULT_GRID = Grid(-250.0, 150.0, 4001)
