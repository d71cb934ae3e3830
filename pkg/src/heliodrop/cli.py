"""Command-line entry point: ``heliodrop profile|evolve|sweep|analyze``."""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, config as config_mod, io
from .dynamics import evolve, initialize
from .errors import ConfigError, ConservationBreach, SolverError, StepDiverged
from .functional import energy_per_area
from .stationary import solve_profile
from .units import PICOSECOND, internal_to_seconds

log = logging.getLogger("heliodrop")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BREACH = 0, 2, 3, 4


def _provenance(cfg, grid=None):
    meta = {
        "config": cfg.as_dict(),
        "params": {k: cfg[f"functional.{k}"] for k in ("b", "c", "gamma", "d")},
        "version": io.version_string(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if grid is not None:
        meta["grid"] = grid.as_dict()
    return meta


def _profile(cfg):
    return solve_profile(cfg["profile.rho0"], cfg["profile.dx"], cfg.params())


def snapshot_name(t_ps):
    return f"snap_{t_ps:.3f}"


def cmd_profile(cfg, out):
    profile = _profile(cfg)
    run_dir = Path(out) / cfg["run.name"]
    run_dir.mkdir(parents=True, exist_ok=True)
    io.write_profile_csv(run_dir / "profile.csv", profile)
    meta = _provenance(cfg)
    meta["profile"] = profile.header()
    io.write_meta(run_dir / "meta.json", meta)
    print(f"mu = {profile.mu:.6f} K")
    print(f"N = {profile.n_per_area:.6f} A^-2")
    print(f"X_eff = {profile.x_eff:.4f} A")
    return EXIT_OK


def run_evolution(cfg, run_dir, velocity=None):
    """Solve, evolve and write one run directory. Returns (exit code, summary dict)."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    params, grid = cfg.params(), cfg.grid()
    evo = cfg.evolution(velocity)
    profile = _profile(cfg)
    io.write_profile_csv(run_dir / "profile.csv", profile)

    meta = _provenance(cfg, grid)
    meta["evolution"] = evo.as_dict()
    meta["profile"] = profile.header()
    summary = {"velocity_mps": evo.velocity}

    progress = None
    if cfg["run.progress"]:
        def progress(rec):
            log.info("step %d  norm %.12g  energy %.12g", rec.step, rec.norm, rec.energy)

    initial = initialize(profile, evo.velocity, evo.x0, grid, mode=evo.mode)
    code = EXIT_OK
    try:
        traj = evolve(evo, profile, params, grid, initial=initial, progress=progress)
    except (ConservationBreach, StepDiverged) as exc:
        traj = exc.trajectory
        meta["failure"] = str(exc)
        summary["failure"] = str(exc)
        code = EXIT_BREACH
        print(f"error: {exc}", file=sys.stderr)

    to_s = internal_to_seconds
    io.write_conservation_csv(run_dir / "conservation.csv", traj.log, to_s)
    requested = {int(round(t / evo.dt)): t for t in evo.snapshot_times}
    for snap in traj.snapshots:
        step = int(round(to_s(snap.time) / evo.dt))
        t_req = requested.get(step, to_s(snap.time))
        name = snapshot_name(t_req / PICOSECOND)
        io.write_snapshot_csv(run_dir / f"{name}.csv", snap)
        side = dict(meta)
        side.update(
            mode=snap.mode,
            time_internal=snap.time,
            time_s=to_s(snap.time),
            requested_time_s=t_req,
            norm=analysis.norm(snap),
            energy=_energy(snap, params),
        )
        io.write_meta(run_dir / f"{name}.json", side)
    io.write_meta(run_dir / "meta.json", meta)

    if code == EXIT_OK:
        final = traj.final
        dist, shift = analysis.profile_distance(
            analysis.mirrored(final.magnitude), initial.magnitude, align=True
        )
        report = analysis.tail_report(final, profile.x_eff, cfg["analyze.min_prominence"])
        summary.update(elastic_distance=dist, tail_peak_count=report.peak_count)
    return code, summary


def _energy(snap, params):
    return energy_per_area(snap, params, classical=snap.mode == "classical")


def cmd_evolve(cfg, out):
    code, _ = run_evolution(cfg, Path(out) / cfg["run.name"])
    return code


def _sweep_one(args):
    values, run_dir, velocity = args
    cfg = config_mod.RunConfig(dict(values))
    try:
        return run_evolution(cfg, run_dir, velocity)
    except SolverError as exc:
        return EXIT_SOLVER, {"velocity_mps": velocity, "failure": str(exc)}
    except ValueError as exc:
        # clipped profile or another bad setting for this velocity only
        return EXIT_CONFIG, {"velocity_mps": velocity, "failure": str(exc)}


def sweep_directories(velocities):
    names, seen = [], {}
    for v in velocities:
        base = f"v{v:g}"
        k = seen.get(base, 0)
        seen[base] = k + 1
        names.append(base if k == 0 else f"{base}_{k}")
    return names


def cmd_sweep(cfg, out):
    velocities = cfg["sweep.velocities_mps"]
    if not velocities:
        raise ConfigError("sweep.velocities_mps is empty")
    root = Path(out) / cfg["run.name"]
    root.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg.values, root / name, v) for name, v in zip(sweep_directories(velocities), velocities)]
    workers = cfg["sweep.workers"] or os.cpu_count() or 1
    if workers == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_sweep_one, jobs))
    with open(root / "summary.csv", "w", newline="\n") as fh:
        fh.write("velocity_mps,run,status,elastic_distance,tail_peak_count\n")
        for (_, run_dir, _), (code, s) in zip(jobs, results):
            dist = s.get("elastic_distance")
            fh.write(
                f"{io.fmt(s['velocity_mps'])},{run_dir.name},{code},"
                f"{'' if dist is None else io.fmt(dist)},{s.get('tail_peak_count', '')}\n"
            )
    return max(code for code, _ in results)


def analyze_paths(paths, cfg):
    """Report dictionary for one or two snapshot files."""
    if not paths:
        raise ConfigError("analyze needs at least one snapshot file")
    snaps, metas = [], []
    for p in paths:
        try:
            snaps.append(io.read_snapshot_csv(p))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        metas.append(io.read_meta(Path(p).with_suffix(".json")))
    x_eff = cfg["analyze.x_eff"]
    if x_eff is None:
        x_eff = metas[0].get("profile", {}).get("x_eff")
    if x_eff is None:
        raise ConfigError("x_eff unknown: set analyze.x_eff or keep the snapshot sidecar")
    prominence = cfg["analyze.min_prominence"]
    entries = []
    for path, snap in zip(paths, snaps):
        rep = analysis.tail_report(snap, x_eff, prominence)
        train = analysis.coherent_train(rep, snap)
        entries.append({
            "file": str(path),
            "mode": snap.mode,
            "time_s": snap.time_seconds,
            "norm": analysis.norm(snap),
            "center_of_mass": analysis.center_of_mass(snap),
            "tail": rep.as_dict(),
            "coherent_train_count": len(train),
            "coherent_train_positions": train,
            "phase": analysis.phase_coherence(snap, x_eff).as_dict(),
        })
    report = {"x_eff": x_eff, "min_prominence": prominence, "snapshots": entries}
    if len(snaps) >= 2:
        a, b = snaps[0], snaps[1]
        rep = analysis.tail_report(b, x_eff, prominence, earlier=a)
        report["pair"] = {
            "mean_velocity_mps": analysis.mean_velocity(a, b),
            "recession_flag": rep.recession_flag,
            "peak_velocity_mps": rep.peak_velocity,
        }
    return report


def cmd_analyze(cfg, out, paths):
    report = analyze_paths(paths, cfg)
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        with open(Path(out) / "analysis.json", "w", newline="\n") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="heliodrop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("profile", "evolve", "sweep", "analyze"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
        p.add_argument("--out", default=None if name == "analyze" else "out",
                       help="output directory")
        if name == "analyze":
            p.add_argument("snapshots", nargs="*", help="snapshot CSV files")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None,
                           help="worker processes (default: number of CPUs)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        cfg = config_mod.load(args.config, args.set)
        if args.command == "sweep" and args.workers is not None:
            cfg.set("sweep.workers", args.workers)
        if args.command == "profile":
            return cmd_profile(cfg, args.out)
        if args.command == "evolve":
            return cmd_evolve(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        return cmd_analyze(cfg, args.out, args.snapshots)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
