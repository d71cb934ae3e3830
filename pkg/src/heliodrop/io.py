"""Plain-text file formats: profile CSV, snapshot CSV, conservation log, metadata."""

import json
import subprocess
from pathlib import Path

import numpy as np

from .dynamics import WaveField
from .grid import Grid
from .stationary import DensityProfile, tail_decay_constant
from .units import derive_constants

FLOAT = "{:.17g}"
SNAPSHOT_COLUMNS = ("x", "re_psi", "im_psi", "abs_psi", "phase")


def fmt(v):
    return FLOAT.format(float(v))


def _rows(columns):
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in zip(*columns))


def write_profile_csv(path, profile):
    head = " ".join(f"{k}={fmt(v)}" for k, v in profile.header().items())
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {head}\n")
        fh.write(_rows((profile.x, profile.rho)))


def read_profile_csv(path):
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("#"):
        raise ValueError(f"{path}: missing profile header line")
    meta = dict(item.split("=", 1) for item in first[1:].split())
    try:
        x, rho = np.loadtxt(path, delimiter=",", comments="#", unpack=True)
        rho0, mu = float(meta["rho0"]), float(meta["mu"])
        n_per_area, x_eff = float(meta["N"]), float(meta["x_eff"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed profile file ({exc})") from exc
    grid = Grid(float(x[0]), float(x[-1]), x.size)
    # the tail rate follows from mu
    return DensityProfile(grid, rho, rho0, mu, n_per_area, x_eff,
                          tail_decay_constant(mu, derive_constants().mass_internal))


def write_snapshot_csv(path, psi):
    v = psi.values
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(SNAPSHOT_COLUMNS) + "\n")
        fh.write(_rows((psi.x, v.real, v.imag, np.abs(v), np.angle(v))))


def read_snapshot_csv(path, mode="quantum", time=0.0):
    """Load a snapshot written by :func:`write_snapshot_csv` as a WaveField.

    Mode and time are taken from the JSON sidecar when it exists.
    """
    path = Path(path)
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        if tuple(header) != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected columns {header}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != len(SNAPSHOT_COLUMNS) or data.shape[0] < 16:
            raise ValueError("wrong table shape")
    except (OSError, ValueError) as exc:
        raise ValueError(f"{path}: malformed snapshot ({exc})") from exc
    x = data[:, 0]
    grid = Grid(float(x[0]), float(x[-1]), x.size)
    meta = read_meta(path.with_suffix(".json"))
    if meta:
        mode = meta.get("mode", mode)
        time = meta.get("time_internal", time)
    return WaveField(grid, data[:, 1] + 1j * data[:, 2], time, mode)


def write_conservation_csv(path, records, time_to_seconds):
    with open(path, "w", newline="\n") as fh:
        fh.write("step,time_s,norm,energy\n")
        for r in records:
            fh.write(f"{r.step},{fmt(time_to_seconds(r.time))},{fmt(r.norm)},{fmt(r.energy)}\n")


def write_meta(path, meta):
    with open(path, "w", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_meta(path):
    path = Path(path)
    if not path.exists():
        return {}
    with open(path) as fh:
        return json.load(fh)


def version_string():
    """git-describe of the working tree, or the package version outside git."""
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    if out.returncode != 0 or not out.stdout.strip():
        return __version__
    return f"{__version__}+{out.stdout.strip()}"
