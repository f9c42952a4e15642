import math
from pathlib import Path

import pytest

from cptclone.beams import HermiteGaussian, ImageBeam, PlaneWave, SuperGaussian
from cptclone.config import ConfigError, echo_config, load_config, parse_config, parse_length

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.ini"))

MINIMAL = """\
[medium]
big_gamma = 0.001
delta1 = 0.005
density = 5e11

[probe]
profile = super_gaussian
amplitude = 0.15
width = 150 um

[control]
profile = hermite_gaussian
amplitude = 1.0
width = 400 um

[propagation]
z_end = 4 cm
"""


def test_minimal_config_defaults_and_kappa_echo():
    cfg = parse_config(MINIMAL)
    kappa = 3 * 5e11 * (7.95e-5) ** 2 / (4 * math.pi)
    assert cfg.medium.kappa1 == pytest.approx(kappa, rel=1e-15)
    assert cfg.medium.kappa1 == pytest.approx(754.4, abs=0.1)
    assert f"kappa1 = {cfg.medium.kappa1!r}" in echo_config(cfg)
    assert cfg.medium.delta1 == 0.005
    assert cfg.grid.nx == cfg.grid.ny == 512
    assert cfg.grid.extent_x == pytest.approx(0.4)
    assert isinstance(cfg.probe, SuperGaussian) and cfg.probe.order == 8
    assert cfg.probe.width == pytest.approx(0.015, rel=1e-15) and cfg.probe.amplitude == 0.15
    assert isinstance(cfg.control, HermiteGaussian) and (cfg.control.m, cfg.control.n) == (0, 0)
    assert cfg.control.width == pytest.approx(0.04, rel=1e-15)
    assert cfg.step.dz == pytest.approx(10e-4)
    assert cfg.step.scheme == "strang2"
    assert cfg.snapshots.positions == (0.0, 4.0)


@pytest.mark.parametrize(
    "text, value",
    [("150 um", 0.015), ("150µm", 0.015), ("1.5 mm", 0.15), ("2", 2.0), ("795 nm", 7.95e-5), ("0.01 m", 1.0), ("-3 cm", -3.0)],
)
def test_parse_length(text, value):
    assert parse_length(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["150 furlongs", "abc", "1 2 cm"])
def test_parse_length_rejects(text):
    with pytest.raises(ValueError):
        parse_length(text)


def _error(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value


def test_negative_width_names_key_and_line():
    err = _error(MINIMAL.replace("width = 150 um", "width = -150 um"))
    assert err.line == 9
    assert "probe.width" in str(err) and "line 9" in str(err)


def test_unknown_key():
    err = _error(MINIMAL.replace("density = 5e11", "density = 5e11\ncolour = blue"))
    assert err.line == 5 and "colour" in str(err)


def test_unknown_section():
    err = _error(MINIMAL + "\n[extras]\nfoo = 1\n")
    assert "extras" in str(err) and err.line == 19


def test_missing_required():
    err = _error(MINIMAL.replace("amplitude = 1.0\n", ""))
    assert "control.amplitude" in str(err) and err.line == 11


def test_missing_width():
    err = _error(MINIMAL.replace("width = 400 um\n", ""))
    assert "control.width" in str(err)


def test_bad_unit():
    err = _error(MINIMAL.replace("z_end = 4 cm", "z_end = 4 parsecs"))
    assert err.line == 17 and "unit" in str(err)


def test_key_not_applicable_to_profile():
    err = _error(MINIMAL.replace("width = 400 um", "width = 400 um\npath = x.pgm"))
    assert "path" in str(err) and err.line == 15


def test_bad_values():
    assert "scheme" in str(_error(MINIMAL + "scheme = euler\n"))
    assert "integer" in str(_error(MINIMAL.replace("[probe]", "[grid]\nnx = 100.5\n\n[probe]")))
    assert "powers of two" in str(_error(MINIMAL.replace("[probe]", "[grid]\nnx = 100\n\n[probe]")))
    assert _error(MINIMAL.replace("big_gamma = 0.001", "big_gamma = -1")).line == 1
    assert "absorber" in str(_error(MINIMAL + "absorber_width = 1.5\n"))
    assert "outside" in str(_error(MINIMAL + "snapshots = 0, 5 cm\n"))
    assert "either" in str(_error(MINIMAL + "snapshots = 0, 1 cm\nsnapshot_every = 1 cm\n"))


def test_syntax_error_line():
    err = _error("[medium]\nbig_gamma = 0.001\nthis line is junk\n")
    assert err.line == 3


def test_snapshot_lists():
    cfg = parse_config(MINIMAL + "snapshots = 0, 1.5, 4\n")
    assert cfg.snapshots.positions == (0.0, 1.5, 4.0)
    cfg = parse_config(MINIMAL + "snapshots = 0, 5000 um, 1 cm\n")
    assert cfg.snapshots.positions == pytest.approx((0.0, 0.5, 1.0))
    cfg = parse_config(MINIMAL + "snapshot_every = 1 cm\n")
    assert cfg.snapshots.positions == (0.0, 1.0, 2.0, 3.0, 4.0)


def test_zero_length_default_snapshot():
    cfg = parse_config(MINIMAL.replace("z_end = 4 cm", "z_end = 0"))
    assert cfg.snapshots.positions == (0.0,)


def test_scan_section_signed():
    cfg = parse_config(MINIMAL + "\n[scan]\naxis = y\nfixed = -50 um\n")
    assert cfg.scan_axis == "y" and cfg.scan_fixed == pytest.approx(-0.005)
    assert "scan.axis" in str(_error(MINIMAL + "\n[scan]\naxis = z\n"))


def test_plane_wave_and_image(tmp_path):
    (tmp_path / "img.pgm").write_bytes(b"P5\n2 2\n255\n\x00\xff\xff\x00")
    text = MINIMAL.replace("profile = super_gaussian\namplitude = 0.15\nwidth = 150 um", "profile = plane_wave\namplitude = 0.15")
    text = text.replace(
        "profile = hermite_gaussian\namplitude = 1.0\nwidth = 400 um",
        "profile = image\namplitude = 1.5\npath = img.pgm\nblur = 10 um",
    )
    cfg = parse_config(text, base_dir=tmp_path)
    assert cfg.probe == PlaneWave(0.15)
    assert isinstance(cfg.control, ImageBeam) and cfg.control.path == str(tmp_path / "img.pgm")
    assert cfg.control.blur == pytest.approx(1e-3)
    err = _error(text)  # no base dir: relative path does not resolve from the cwd
    assert "not found" in str(err) and err.line == 13


def test_inline_comments():
    cfg = parse_config(MINIMAL.replace("delta1 = 0.005", "delta1 = 0.005  # red detuning"))
    assert cfg.medium.delta1 == 0.005


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_echo_idempotent(path):
    cfg = load_config(path)
    text = echo_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert echo_config(again) == text


def test_echo_with_overrides_idempotent():
    cfg = parse_config(MINIMAL.replace("density = 5e11", "density = 5e11\nkappa2 = 12.5\nlambda1 = 780 nm"))
    assert cfg.medium.kappa2 == 12.5
    assert parse_config(echo_config(cfg)) == cfg


def test_shipped_configs_present():
    names = {p.name for p in CONFIGS}
    assert {"fig2_strong.ini", "fig4.ini", "fig5_strong.ini", "fig5_weak.ini", "fig7.ini", "fig9.ini"} <= names
