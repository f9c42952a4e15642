"""Command line entry point: ``cptclone chi-scan | propagate | analyze``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis
from .config import ConfigError, RunConfig, echo_config, load_config
from .fieldio import read_field, write_csv, write_field, write_pgm16
from .medium import susceptibility
from .propagator import FieldState, SnapshotPlan, propagate

log = logging.getLogger("cptclone")

OUT_ENV = "CPTCLONE_OUT"
SCAN_COLUMNS = ["coordinate_cm", "re_c31", "im_c31", "re_c32", "im_c32", "abs_g", "abs_G"]
METRIC_COLUMNS = [
    "z_cm",
    "field",
    "fwhm_x_cm",
    "fwhm_y_cm",
    "w2m_x_cm",
    "w2m_y_cm",
    "peak",
    "power",
    "transmission",
    "fidelity_vs_control_in",
]


def initial_state(cfg: RunConfig) -> FieldState:
    return FieldState(cfg.probe.synthesize(cfg.grid), cfg.control.synthesize(cfg.grid), 0.0)


def chi_scan(cfg: RunConfig, axis: str | None = None, fixed: float | None = None):
    """Scaled susceptibilities along one line of the initial beams. Returns CSV rows."""
    axis = axis or cfg.scan_axis
    fixed = cfg.scan_fixed if fixed is None else fixed
    state = initial_state(cfg)
    grid = cfg.grid
    if axis == "x":
        i = int(np.argmin(np.abs(grid.y - fixed)))
        coord, g, G = grid.x, state.probe.values[i], state.control.values[i]
    elif axis == "y":
        i = int(np.argmin(np.abs(grid.x - fixed)))
        coord, g, G = grid.y, state.probe.values[:, i], state.control.values[:, i]
    else:
        raise ValueError("axis must be x or y")
    chi = susceptibility(cfg.medium, g, G)
    return [
        (float(c), a.real, a.imag, b.real, b.imag, abs(p), abs(q))
        for c, a, b, p, q in zip(coord, chi.c31, chi.c32, g, G)
    ]


def metric_rows(states, state0: FieldState):
    """One row per (snapshot, field); unlocalized profiles get NaN widths."""
    rows = []
    for s in states:
        for which in ("probe", "control"):
            f = getattr(s, which)
            try:
                m = analysis.beam_metrics(f)
                widths = (m.fwhm_x, m.fwhm_y, m.w2m_x, m.w2m_y)
            except ValueError:
                widths = (math.nan,) * 4
            try:
                fid = analysis.cloning_fidelity(f, state0.control)
            except ValueError:
                fid = math.nan
            rows.append((s.z, which, *widths, float(f.intensity.max()), f.power(), analysis.transmission(state0, s, which), fid))
    return rows


def run_propagation(cfg: RunConfig, out_dir, noise: float = 0.0, seed: int = 0, progress=None):
    """Run a configured propagation and write all outputs into ``out_dir``.

    Files: ``config.ini`` (effective values), ``probe_in.cptf``/``control_in.cptf``,
    per-snapshot ``<field>_<k>.cptf`` and ``.pgm`` renders, ``metrics.csv``.
    Partial outputs are removed if the run fails.
    """
    out = Path(out_dir)
    existed = out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(path: Path):
        written.append(path)
        return path

    try:
        state0 = initial_state(cfg)
        if noise > 0:
            rng = np.random.default_rng(seed)
            p = state0.probe.values
            p = p * (1 + noise * (rng.standard_normal(p.shape) + 1j * rng.standard_normal(p.shape)))
            state0 = FieldState(replace(state0.probe, values=p), state0.control, 0.0)
        emit(out / "config.ini").write_text(echo_config(cfg))
        for which in ("probe", "control"):
            write_field(emit(out / f"{which}_in.cptf"), getattr(state0, which), 0.0, which)
        if cfg.z_end > 0:
            _, snaps = propagate(state0, cfg.medium, cfg.step, cfg.z_end, cfg.snapshots, progress=progress)
        else:
            snaps = [state0.copy()] if cfg.snapshots.positions else []
        for k, s in enumerate(snaps):
            for which in ("probe", "control"):
                f = getattr(s, which)
                write_field(emit(out / f"{which}_{k:03d}.cptf"), f, s.z, which)
                pgm = emit(out / f"{which}_{k:03d}.pgm")
                emit(Path(str(pgm) + ".txt"))
                write_pgm16(pgm, f)
        write_csv(emit(out / "metrics.csv"), METRIC_COLUMNS, metric_rows(snaps, state0))
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        if not existed:
            shutil.rmtree(out, ignore_errors=True)
        raise
    return state0, snaps


def load_run(run_dir):
    """Read a run directory back into ``(state0, snapshots)``."""
    run = Path(run_dir)
    probe0, _, _ = read_field(run / "probe_in.cptf")
    control0, _, _ = read_field(run / "control_in.cptf")
    state0 = FieldState(probe0, control0, 0.0)
    snaps = []
    for ppath in sorted(run.glob("probe_[0-9][0-9][0-9].cptf")):
        probe, z, _ = read_field(ppath)
        control, zc, _ = read_field(ppath.with_name(ppath.name.replace("probe_", "control_")))
        if zc != z:
            raise ValueError(f"{ppath.name}: probe and control snapshots disagree on z")
        snaps.append(FieldState(probe, control, z))
    return state0, snaps


def analyze_run(run_dir, out_csv=None):
    state0, snaps = load_run(run_dir)
    rows = metric_rows(snaps, state0)
    write_csv(out_csv or Path(run_dir) / "analysis.csv", METRIC_COLUMNS, rows)
    return rows


def _out_dir(args, cfg: RunConfig | None):
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.out_dir) if cfg else Path(".")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cptclone", description="Image cloning by coherent population trapping.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("chi-scan", help="susceptibility along a transverse line of the initial beams")
    scan.add_argument("--config", required=True)
    scan.add_argument("--out")
    scan.add_argument("--axis", choices=("x", "y"))
    scan.add_argument("--fixed", type=float, help="coordinate of the scan line on the other axis [cm]")

    prop = sub.add_parser("propagate", help="propagate probe and control through the medium")
    prop.add_argument("--config", required=True)
    prop.add_argument("--out")
    prop.add_argument("--snapshot-every", type=float, help="[cm]")
    prop.add_argument("--scheme", choices=("strang2", "yoshida4"))
    prop.add_argument("--seed", type=int, default=0, help="seed for --noise")
    prop.add_argument("--noise", type=float, default=0.0, help="relative complex noise added to the initial probe")

    an = sub.add_parser("analyze", help="recompute metrics from a run directory")
    an.add_argument("run_dir", nargs="?")
    an.add_argument("--out", help="run directory (alternative to the positional argument)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "analyze":
            run_dir = args.run_dir or _out_dir(args, None)
            analyze_run(run_dir)
            print(Path(run_dir) / "analysis.csv")
            return 0
        cfg = load_config(args.config)
        out = _out_dir(args, cfg)
        if args.command == "chi-scan":
            out.mkdir(parents=True, exist_ok=True)
            path = out / "chi_scan.csv"
            write_csv(path, SCAN_COLUMNS, chi_scan(cfg, args.axis, args.fixed))
            print(path)
            return 0
        if args.scheme:
            cfg = replace(cfg, step=replace(cfg.step, scheme=args.scheme))
        if args.snapshot_every:
            cfg = replace(cfg, snapshots=SnapshotPlan.every(args.snapshot_every, cfg.z_end))
        run_propagation(cfg, out, noise=args.noise, seed=args.seed, progress=_progress(cfg) if args.verbose else None)
        print(out / "metrics.csv")
        return 0
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"cptclone: error: {exc}", file=sys.stderr)
        return 2


def _progress(cfg: RunConfig):
    tick = max(cfg.z_end / 20, cfg.step.dz)
    state = {"next": tick}

    def report(z):
        if z >= state["next"] - 1e-12:
            log.info("z = %.4f cm", z)
            state["next"] += tick

    return report


if __name__ == "__main__":
    sys.exit(main())
