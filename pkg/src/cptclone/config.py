"""INI-style run configuration with unit-checked lengths and a canonical echo."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from .beams import BeamSpec, HermiteGaussian, ImageBeam, PlaneWave, SuperGaussian, TransverseGrid
from .medium import MediumParams
from .propagator import Absorber, SnapshotPlan, StepConfig

LENGTH_UNITS = {"cm": 1.0, "mm": 0.1, "um": 1e-4, "µm": 1e-4, "nm": 1e-7, "m": 100.0}

# section -> key -> kind; lengths are non-negative, coords may be signed
SCHEMA = {
    "medium": {
        "gamma": "number",
        "big_gamma": "number",
        "delta1": "number",
        "delta2": "number",
        "density": "number",
        "lambda1": "length",
        "lambda2": "length",
        "kappa1": "number",
        "kappa2": "number",
    },
    "grid": {"nx": "int", "ny": "int", "half_width": "length"},
    "probe": {
        "profile": "str",
        "amplitude": "number",
        "width": "length",
        "order": "int",
        "m": "int",
        "n": "int",
        "path": "str",
        "blur": "length",
        "extent": "length",
    },
    "propagation": {
        "z_end": "length",
        "dz": "length",
        "scheme": "str",
        "mode": "str",
        "absorber_width": "number",
        "absorber_strength": "number",
        "snapshots": "lengths",
        "snapshot_every": "length",
    },
    "scan": {"axis": "str", "fixed": "coord"},
    "output": {"dir": "str"},
}
SCHEMA["control"] = SCHEMA["probe"]
REQUIRED = {"probe": ("profile", "amplitude"), "control": ("profile", "amplitude"), "propagation": ("z_end",)}
PROFILE_KEYS = {
    "hermite_gaussian": {"width", "m", "n"},
    "super_gaussian": {"width", "order"},
    "plane_wave": set(),
    "image": {"path", "blur", "extent"},
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line else ""
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    medium: MediumParams
    probe: BeamSpec
    control: BeamSpec
    grid: TransverseGrid
    step: StepConfig
    z_end: float
    snapshots: SnapshotPlan
    out_dir: str = "run"
    scan_axis: str = "x"
    scan_fixed: float = 0.005
    snapshot_every: float | None = field(default=None, compare=False)


def parse_length(text: str) -> float:
    """``'150 um'`` -> 0.015 (cm). A bare number is taken as cm."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*([a-zµ]*)\s*", text)
    if not m:
        raise ValueError(f"cannot parse length {text!r}")
    unit = m.group(2) or "cm"
    if unit not in LENGTH_UNITS:
        raise ValueError(f"unknown length unit {unit!r}")
    return float(m.group(1)) * LENGTH_UNITS[unit]


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            index[(section, "")] = no
            continue
        if section is not None:
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            index.setdefault((section, key), no)
    return index


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse and validate a run configuration.

    Relative image paths resolve against ``base_dir``. Errors carry the line
    number of the offending entry.
    """
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        line, content = exc.errors[0]
        raise ConfigError(f"cannot parse {content.strip()!r}", line) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None

    values: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, "")))
        values[section] = {}
        for key, raw in cp.items(section):
            line = lines.get((section, key))
            kind = SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line)
            try:
                values[section][key] = _convert(kind, raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}", line) from None
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in values.get(section, {}):
                raise ConfigError(f"missing required key {section}.{key}", lines.get((section, "")))

    def build(section, ctor):
        try:
            return ctor(**values.get(section, {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}", lines.get((section, ""))) from None

    medium = build("medium", MediumParams)
    g = values.get("grid", {})
    n_default = 512
    try:
        half = g.get("half_width", 0.2)
        if not half > 0:
            raise ValueError("half_width must be positive")
        nx = g.get("nx", n_default)
        ny = g.get("ny", nx)
        grid = TransverseGrid(nx, ny, 2 * half / nx, 2 * half / nx)
    except ValueError as exc:
        raise ConfigError(f"[grid]: {exc}", lines.get(("grid", ""))) from None

    probe = _beam(values["probe"], "probe", lines, base_dir)
    control = _beam(values["control"], "control", lines, base_dir)

    p = dict(values["propagation"])
    z_end = p.pop("z_end")
    if z_end < 0:
        raise ConfigError("propagation.z_end must be non-negative", lines.get(("propagation", "z_end")))
    positions = p.pop("snapshots", None)
    every = p.pop("snapshot_every", None)
    try:
        absorber = Absorber(width=p.pop("absorber_width", 0.1), strength=p.pop("absorber_strength", 200.0))
    except ValueError as exc:
        raise ConfigError(f"[propagation]: {exc}", lines.get(("propagation", ""))) from None
    step = build_step(p, absorber, lines)
    if positions is not None and every is not None:
        raise ConfigError("give either snapshots or snapshot_every, not both", lines.get(("propagation", "snapshot_every")))
    try:
        plan = SnapshotPlan.every(every, z_end) if every is not None else SnapshotPlan(tuple(positions or ((0.0, z_end) if z_end > 0 else (0.0,))))
        plan.validate(0.0, z_end)
    except ValueError as exc:
        raise ConfigError(str(exc), lines.get(("propagation", "snapshots"))) from None

    scan = values.get("scan", {})
    axis = scan.get("axis", "x")
    if axis not in ("x", "y"):
        raise ConfigError("scan.axis must be x or y", lines.get(("scan", "axis")))
    out_dir = values.get("output", {}).get("dir", "run")
    return RunConfig(medium, probe, control, grid, step, z_end, plan, out_dir, axis, scan.get("fixed", 0.005), every)


def build_step(p, absorber, lines) -> StepConfig:
    try:
        return StepConfig(absorber=absorber, **p)
    except ValueError as exc:
        raise ConfigError(f"[propagation]: {exc}", lines.get(("propagation", ""))) from None


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == "str":
        return raw
    if kind == "int":
        v = float(raw)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if kind == "number":
        return float(raw)
    if kind == "length":
        v = parse_length(raw)
        if v < 0:
            raise ValueError("lengths must be non-negative")
        return v
    if kind == "coord":
        return parse_length(raw)
    if kind == "lengths":
        parts = [s.strip() for s in raw.split(",") if s.strip()]
        # the unit of the last entry is shared by bare numbers: "0, 1.5, 3 cm"
        m = re.fullmatch(r"[-+0-9.eE]+\s*([a-zµ]+)", parts[-1]) if parts else None
        unit = m.group(1) if m else ""
        return tuple(parse_length(s if re.search(r"[a-zµ]\s*$", s) else f"{s} {unit}") for s in parts)
    raise AssertionError(kind)


def _beam(v: dict, section: str, lines, base_dir) -> BeamSpec:
    v = dict(v)
    profile = v.pop("profile")
    line = lines.get((section, "profile"))
    if profile not in PROFILE_KEYS:
        raise ConfigError(f"{section}.profile must be one of {sorted(PROFILE_KEYS)}", line)
    extra = set(v) - PROFILE_KEYS[profile] - {"amplitude"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"key {key!r} does not apply to profile {profile!r}", lines.get((section, key)))
    try:
        if profile == "hermite_gaussian":
            return HermiteGaussian(**_need(v, "width", section, lines))
        if profile == "super_gaussian":
            return SuperGaussian(**_need(v, "width", section, lines))
        if profile == "plane_wave":
            return PlaneWave(**v)
        _need(v, "path", section, lines)
        path = Path(v["path"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        if not path.is_file():
            raise ConfigError(f"{section}.path: file not found: {path}", lines.get((section, "path")))
        v["path"] = str(path)
        return ImageBeam(**v)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[{section}]: {exc}", lines.get((section, ""))) from None


def _need(v, key, section, lines):
    if key not in v:
        raise ConfigError(f"missing required key {section}.{key}", lines.get((section, "")))
    return v


def echo_config(cfg: RunConfig) -> str:
    """Canonical text of all effective values; parses back to an equal config."""
    m = cfg.medium
    out = ["[medium]"]
    for key in ("gamma", "big_gamma", "delta1", "delta2", "density"):
        out.append(f"{key} = {getattr(m, key)!r}")
    out.append(f"lambda1 = {m.lambda1!r} cm")
    out.append(f"lambda2 = {m.lambda2!r} cm")
    out.append(f"kappa1 = {m.kappa1!r}")
    out.append(f"kappa2 = {m.kappa2!r}")
    g = cfg.grid
    out += ["", "[grid]", f"nx = {g.nx}", f"ny = {g.ny}", f"half_width = {g.extent_x / 2!r} cm"]
    for name, beam in (("probe", cfg.probe), ("control", cfg.control)):
        out += ["", f"[{name}]"] + _beam_lines(beam)
    s = cfg.step
    out += [
        "",
        "[propagation]",
        f"z_end = {cfg.z_end!r} cm",
        f"dz = {s.dz!r} cm",
        f"scheme = {s.scheme}",
        f"mode = {s.mode}",
        f"absorber_width = {s.absorber.width!r}",
        f"absorber_strength = {s.absorber.strength!r}",
        "snapshots = " + ", ".join(repr(z) for z in cfg.snapshots.positions) + " cm",
        "",
        "[scan]",
        f"axis = {cfg.scan_axis}",
        f"fixed = {cfg.scan_fixed!r} cm",
        "",
        "[output]",
        f"dir = {cfg.out_dir}",
    ]
    return "\n".join(out) + "\n"


def _beam_lines(beam: BeamSpec) -> list[str]:
    if isinstance(beam, HermiteGaussian):
        return ["profile = hermite_gaussian", f"amplitude = {beam.amplitude!r}", f"width = {beam.width!r} cm", f"m = {beam.m}", f"n = {beam.n}"]
    if isinstance(beam, SuperGaussian):
        return ["profile = super_gaussian", f"amplitude = {beam.amplitude!r}", f"width = {beam.width!r} cm", f"order = {beam.order}"]
    if isinstance(beam, PlaneWave):
        return ["profile = plane_wave", f"amplitude = {beam.amplitude!r}"]
    lines = ["profile = image", f"amplitude = {beam.amplitude!r}", f"path = {beam.path}", f"blur = {beam.blur!r} cm"]
    if beam.extent is not None:
        lines.append(f"extent = {beam.extent!r} cm")
    return lines


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
