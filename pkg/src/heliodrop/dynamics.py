"""Time evolution of the drop toward the hard wall.

The wave function obeys i dpsi/dt = -(1/2m) psi'' + V psi on a uniform grid
whose right end is the wall (psi = 0). ``V`` is the self-interaction
O(|psi|^2) in quantum mode, and O - U_quantum in classical mode.

Integration is five-step Adams–Bashforth prediction followed by one
Adams–Moulton correction (PECE), started with four classical Runge–Kutta
steps.
"""

import logging
import warnings
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import ConservationBreach, ProfileClipped, StepDiverged
from .functional import (
    CLASSICAL_FLOOR,
    FunctionalParams,
    field_energy,
    quantum_potential,
    second_difference,
    self_interaction_on_grid,
)
from .grid import DEFAULT_GRID, Grid
from .units import derive_constants, internal_to_seconds, seconds_to_internal, velocity_to_internal

log = logging.getLogger(__name__)

QUANTUM = "quantum"
CLASSICAL = "classical"
MODES = (QUANTUM, CLASSICAL)

AB5 = np.array([1901.0, -2774.0, 2616.0, -1274.0, 251.0]) / 720.0
AM5 = np.array([251.0, 646.0, -264.0, 106.0, -19.0]) / 720.0

CLIP_TOLERANCE = 1e-8  # Å^-3, densest tail value allowed at a grid end
EDGE_BAND = 10.0  # Å, left-edge band watched for escaping density
EDGE_DENSITY = 1e-8  # Å^-3
CLASSICAL_ENERGY_TOLERANCE = 1e-2


@dataclass(frozen=True)
class WaveField:
    grid: Grid
    values: np.ndarray
    time: float = 0.0  # internal units
    mode: str = QUANTUM

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.values.shape != (self.grid.n,):
            raise ValueError("values do not match the grid")

    @property
    def x(self):
        return self.grid.x

    @property
    def density(self):
        return self.values.real**2 + self.values.imag**2

    @property
    def magnitude(self):
        return np.abs(self.values)

    @property
    def time_seconds(self):
        return internal_to_seconds(self.time)

    def with_values(self, values, time=None):
        return replace(self, values=values, time=self.time if time is None else time)

    def conjugate(self):
        return self.with_values(np.conj(self.values))


@dataclass(frozen=True)
class EvolutionConfig:
    velocity: float = 65.78  # m/s
    x0: float = 110.0  # Å
    dt: float = 1e-17  # s
    n_steps: int = 6_080_000
    snapshot_times: tuple = ()  # s
    tolerance: float = 1e-3
    mode: str = QUANTUM
    log_every: int = 1000
    energy_tolerance: float = None  # defaults by mode

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.tolerance < 0.1:
            raise ValueError("tolerance must lie in (0, 0.1)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_steps < 0 or self.log_every < 1:
            raise ValueError("n_steps must be >= 0 and log_every >= 1")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        end = self.n_steps * self.dt
        for t in self.snapshot_times:
            if t < 0 or t > end * (1 + 1e-12):
                raise ValueError(f"snapshot time {t:g} s outside [0, {end:g}] s")

    @classmethod
    def for_duration(cls, duration, dt=1e-17, **kwargs):
        return cls(dt=dt, n_steps=int(round(duration / dt)), **kwargs)

    @property
    def duration(self):
        return self.n_steps * self.dt

    @property
    def energy_gate(self):
        if self.energy_tolerance is not None:
            return self.energy_tolerance
        return CLASSICAL_ENERGY_TOLERANCE if self.mode == CLASSICAL else self.tolerance

    def snapshot_steps(self):
        return sorted({int(round(t / self.dt)) for t in self.snapshot_times})

    def as_dict(self):
        return {
            "velocity_mps": self.velocity,
            "x0": self.x0,
            "dt_s": self.dt,
            "n_steps": self.n_steps,
            "snapshot_times_s": list(self.snapshot_times),
            "tolerance": self.tolerance,
            "energy_tolerance": self.energy_gate,
            "mode": self.mode,
            "log_every": self.log_every,
        }


@dataclass(frozen=True)
class ConservationRecord:
    step: int
    time: float  # internal units
    norm: float
    energy: float


@dataclass
class Trajectory:
    config: EvolutionConfig
    initial: WaveField
    snapshots: list = field(default_factory=list)
    log: list = field(default_factory=list)
    final: WaveField = None
    edge_warnings: list = field(default_factory=list)

    def snapshot_near(self, t_seconds):
        return min(self.snapshots, key=lambda s: abs(s.time_seconds - t_seconds))

    def drift(self, attr):
        ref = getattr(self.log[0], attr)
        return np.array([getattr(r, attr) / ref - 1.0 for r in self.log])


def initialize(profile, velocity, x0, grid=DEFAULT_GRID, clip_tol=CLIP_TOLERANCE, mode=QUANTUM):
    """Boosted drop psi = exp(i m v (x - x0)) sqrt(rho(x - x0)); velocity in m/s."""
    x = grid.x
    rho = profile.density_at(x, center=x0)
    edge = max(rho[0], rho[-1])
    if edge > clip_tol:
        raise ProfileClipped(
            f"profile density {edge:.3g} Å^-3 at a grid end exceeds {clip_tol:g}; "
            "move x0 or enlarge the grid"
        )
    k = derive_constants().mass_internal * velocity_to_internal(velocity)
    values = np.sqrt(rho) * np.exp(1j * k * (x - x0))
    values[0] = values[-1] = 0.0
    return WaveField(grid, values, 0.0, mode)


class Hamiltonian:
    """Evaluates dpsi/dt on a fixed grid; ``wall_index`` marks the right wall node."""

    def __init__(self, grid, params=None, mode=QUANTUM):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.grid = grid
        self.params = params or FunctionalParams()
        self.mode = mode
        self.wall_index = grid.n - 1
        self._rho = np.empty(grid.n)
        self._v = np.empty(grid.n)
        self._amp = np.empty(grid.n)

    def __call__(self, values, out):
        p = self.params
        _kernels.rhs_kernel(
            values.view(np.float64), out.view(np.float64),
            self._rho, self._v, self._amp, self.wall_index,
            p.kinetic, p.b, p.repulsion, 1.0 + p.gamma, p.d, self.grid.dx,
            self.mode == CLASSICAL, CLASSICAL_FLOOR,
        )
        return out

    def pin(self, values):
        """Force the wall nodes to zero in place."""
        values[0] = 0.0
        values[self.wall_index:] = 0.0
        return values


def potential(rho, dx, params, mode=QUANTUM):
    """Effective potential V (K) acting on psi, built from the numpy reference operators."""
    v = self_interaction_on_grid(rho, dx, params)
    if mode == CLASSICAL:
        v = v - quantum_potential(rho, dx, params, CLASSICAL_FLOOR)
    return v


def rhs_reference(psi, params):
    """dpsi/dt from the numpy operators; slow, used to cross-check the kernel."""
    values, dx = psi.values, psi.grid.dx
    h = -params.kinetic * second_difference(values, dx) + potential(psi.density, dx, params, psi.mode) * values
    out = -1j * h
    out[0] = out[-1] = 0.0
    return out


def rhs(psi, params=None):
    """Time derivative of a :class:`WaveField` (internal time units)."""
    if not np.all(np.isfinite(psi.values)):
        raise ValueError("wave field contains non-finite values")
    ham = Hamiltonian(psi.grid, params, psi.mode)
    return ham(np.ascontiguousarray(psi.values, dtype=complex), np.empty(psi.grid.n, dtype=complex))


class PredictorCorrector:
    """AB5 predictor, AM5 corrector, evaluated twice per step (PECE).

    ``f(y, out)`` writes dy/dt into ``out``. ``history`` holds derivatives at
    the current and previous four steps, newest first; if not supplied it is
    built with four RK4 steps, which also advances ``y`` by four steps.
    """

    def __init__(self, f, y, dt, t=0.0, history=None, pin=None):
        self.f = f
        self.dt = dt
        self.t = t
        self.y = np.array(y, dtype=complex)
        self.pin = pin or (lambda v: v)
        self.steps = 0
        self._pred = np.empty_like(self.y)
        self._fpred = np.empty_like(self.y)
        self._next = np.empty_like(self.y)
        if history is None:
            self.history = deque([self._eval(self.y)], maxlen=5)
            for _ in range(4):
                self._rk4()
        else:
            if len(history) != 5:
                raise ValueError("history needs five derivatives, newest first")
            self.history = deque((np.array(h, dtype=complex) for h in history), maxlen=5)

    def _eval(self, y):
        return self.f(y, np.empty_like(y))

    def _rk4(self):
        h, y = self.dt, self.y
        k1 = self.history[0]
        k2 = self._eval(self.pin(y + 0.5 * h * k1))
        k3 = self._eval(self.pin(y + 0.5 * h * k2))
        k4 = self._eval(self.pin(y + h * k3))
        self.y = self.pin(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        self.t += h
        self.steps += 1
        self.history.appendleft(self._eval(self.y))

    def step(self):
        f = [h.view(np.float64) for h in self.history]
        y = self.y.view(np.float64)
        _kernels.combine(self._pred.view(np.float64), y, self.dt, AB5, f[0], f[1], f[2], f[3], f[4])
        self.pin(self._pred)
        self.f(self._pred, self._fpred)
        _kernels.combine(self._next.view(np.float64), y, self.dt, AM5,
                         self._fpred.view(np.float64), f[0], f[1], f[2], f[3])
        f = self.history
        self.pin(self._next)
        # recycle the oldest derivative buffer for the new evaluation
        oldest = f.pop()
        self.y, self._next = self._next, self.y
        self.f(self.y, oldest)
        f.appendleft(oldest)
        self.t += self.dt
        self.steps += 1


def step(psi, history, dt, params=None):
    """Advance ``psi`` by ``dt`` seconds given the four prior derivatives.

    ``history`` lists the derivatives at t - dt, ..., t - 4 dt (newest
    first). Returns the new field and the updated four-entry history.
    """
    ham = Hamiltonian(psi.grid, params, psi.mode)
    h = seconds_to_internal(dt)
    current = ham(np.array(psi.values, dtype=complex), np.empty(psi.grid.n, dtype=complex))
    pc = PredictorCorrector(ham, psi.values, h, psi.time, [current, *history], pin=ham.pin)
    pc.step()
    if not _kernels.all_finite(pc.y.view(np.float64)):
        raise StepDiverged(1)
    new_history = [np.array(pc.history[i]) for i in range(1, 5)]
    return psi.with_values(pc.y, pc.t), new_history


class ConservationMonitor:
    def __init__(self, grid, params, mode, norm_tol, energy_tol):
        self.grid = grid
        self.params = params
        self.classical = mode == CLASSICAL
        self.norm_tol = norm_tol
        self.energy_tol = energy_tol
        self.records = []
        self._edge = grid.x < grid.x_min + EDGE_BAND

    def measure(self, step, t, values):
        rho = values.real**2 + values.imag**2
        norm = float(np.trapezoid(rho, dx=self.grid.dx))
        energy = field_energy(values, self.grid.dx, self.params, classical=self.classical)
        record = ConservationRecord(step, t, norm, energy)
        self.records.append(record)
        return record

    def check(self, record):
        ref = self.records[0]
        norm_drift = record.norm / ref.norm - 1.0 if ref.norm else 0.0
        if abs(norm_drift) > self.norm_tol:
            raise ConservationBreach("norm", record.step, norm_drift, self.norm_tol)
        scale = abs(ref.energy) or 1.0
        energy_drift = (record.energy - ref.energy) / scale
        if abs(energy_drift) > self.energy_tol:
            raise ConservationBreach("energy", record.step, energy_drift, self.energy_tol)

    def edge_density(self, values):
        v = values[self._edge]
        return float(np.max(v.real**2 + v.imag**2))


def evolve(config, profile, params=None, grid=DEFAULT_GRID, initial=None, progress=None):
    """Run one scattering simulation and return its :class:`Trajectory`.

    Norm and energy are logged every ``config.log_every`` steps. A drift past
    the tolerance raises :class:`ConservationBreach` with the partial
    trajectory attached as ``exc.trajectory``.
    """
    params = params or FunctionalParams()
    if initial is None:
        initial = initialize(profile, config.velocity, config.x0, grid, mode=config.mode)
    else:
        initial = replace(initial, mode=config.mode)
    grid = initial.grid
    ham = Hamiltonian(grid, params, config.mode)
    dt = seconds_to_internal(config.dt)
    monitor = ConservationMonitor(grid, params, config.mode, config.tolerance, config.energy_gate)
    traj = Trajectory(config=config, initial=initial, log=monitor.records)

    pending = deque(config.snapshot_steps())
    t0 = initial.time

    def snap(step_index, values, t):
        while pending and pending[0] <= step_index:
            pending.popleft()
            traj.snapshots.append(WaveField(grid, values.copy(), t, config.mode))

    monitor.measure(0, t0, initial.values)
    snap(0, initial.values, t0)
    if config.n_steps == 0:
        traj.final = initial
        return traj

    try:
        pc = PredictorCorrector(ham, initial.values, dt, t0, pin=ham.pin)
        # the RK4 start has already taken four steps
        n_boot = pc.steps
        if config.n_steps < n_boot:
            raise ValueError("need at least four steps")
        snap(n_boot, pc.y, pc.t)
        for n in range(n_boot + 1, config.n_steps + 1):
            pc.step()
            if pending and pending[0] <= n:
                snap(n, pc.y, pc.t)
            if n % config.log_every == 0 or n == config.n_steps:
                if not _kernels.all_finite(pc.y.view(np.float64)):
                    raise StepDiverged(n)
                record = monitor.measure(n, pc.t, pc.y)
                monitor.check(record)
                edge = monitor.edge_density(pc.y)
                if edge > EDGE_DENSITY:
                    msg = f"density {edge:.2e} within {EDGE_BAND} Å of the left edge at step {n}"
                    if not traj.edge_warnings:
                        warnings.warn(msg, RuntimeWarning, stacklevel=2)
                    traj.edge_warnings.append(msg)
                if progress is not None:
                    progress(record)
    except (ConservationBreach, StepDiverged) as exc:
        exc.trajectory = traj
        raise
    traj.final = WaveField(grid, pc.y.copy(), pc.t, config.mode)
    return traj
