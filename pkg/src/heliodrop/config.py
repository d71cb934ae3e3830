"""Flat ``section.key = value`` run configuration with strict key checking."""

from dataclasses import dataclass, field

from .dynamics import MODES, EvolutionConfig
from .errors import ConfigError
from .functional import FunctionalParams
from .grid import Grid
from .units import PICOSECOND


def _floats(text):
    items = [s.strip() for s in str(text).replace(";", ",").split(",")]
    return tuple(float(s) for s in items if s)


def _mode(text):
    text = str(text).strip()
    if text not in MODES:
        raise ValueError(f"expected one of {MODES}")
    return text


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


# key -> (parser, default)
SCHEMA = {
    "functional.b": (float, -888.81),
    "functional.c": (float, 1.04554e7),
    "functional.gamma": (float, 2.8),
    "functional.d": (float, 2383.0),
    "profile.rho0": (float, 0.02183599),
    "profile.dx": (float, 0.05),
    "grid.x_min": (float, -250.0),
    "grid.x_wall": (float, 150.0),
    "grid.dx": (float, 0.1),
    "evolve.velocity_mps": (float, 65.78),
    "evolve.x0": (float, 110.0),
    "evolve.dt_s": (float, 1e-17),
    "evolve.duration_ps": (float, 60.8),
    "evolve.snapshot_ps": (_floats, (15.2, 30.4, 45.6, 60.8)),
    "evolve.mode": (_mode, "quantum"),
    "evolve.tolerance": (float, 1e-3),
    "evolve.energy_tolerance": (float, None),
    "evolve.log_every": (int, 1000),
    "sweep.velocities_mps": (_floats, (30.0, 50.0, 65.78, 100.0)),
    "sweep.workers": (int, 0),
    "analyze.min_prominence": (float, 0.05),
    "analyze.x_eff": (float, None),
    "run.name": (str, "run"),
    "run.progress": (_bool, False),
}

POSITIVE = {
    "profile.rho0", "profile.dx", "grid.dx", "evolve.dt_s", "evolve.duration_ps",
    "evolve.log_every", "functional.gamma", "evolve.tolerance", "analyze.min_prominence",
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key, raw):
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            if parser is _floats and isinstance(raw, (list, tuple)):
                value = tuple(float(v) for v in raw)
            else:
                value = parser(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
        if key in POSITIVE and not value > 0:
            raise ConfigError(f"{key} must be positive, got {value!r}")
        self.values[key] = value

    def params(self):
        try:
            return FunctionalParams(
                b=self["functional.b"], c=self["functional.c"],
                gamma=self["functional.gamma"], d=self["functional.d"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self):
        try:
            return Grid.from_spacing(self["grid.x_min"], self["grid.x_wall"], self["grid.dx"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def evolution(self, velocity=None):
        dt = self["evolve.dt_s"]
        duration = self["evolve.duration_ps"] * PICOSECOND
        try:
            return EvolutionConfig(
                velocity=self["evolve.velocity_mps"] if velocity is None else velocity,
                x0=self["evolve.x0"],
                dt=dt,
                n_steps=int(round(duration / dt)),
                snapshot_times=tuple(t * PICOSECOND for t in self["evolve.snapshot_ps"]),
                tolerance=self["evolve.tolerance"],
                mode=self["evolve.mode"],
                log_every=self["evolve.log_every"],
                energy_tolerance=self["evolve.energy_tolerance"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def as_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(self.values.items())}


def parse_text(text, config=None):
    config = config or RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        config.set(key, raw.strip())
    return config


def load(path=None, overrides=()):
    """Read a config file (optional) and apply ``key=value`` overrides on top."""
    config = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        parse_text(text, config)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        config.set(key, raw.strip())
    return config
