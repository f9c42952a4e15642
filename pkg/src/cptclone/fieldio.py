"""Binary field snapshots (CPTF), PGM intensity renders and CSV tables."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .beams import ComplexField, TransverseGrid

MAGIC = b"CPTF"
VERSION = 1
HEADER = struct.Struct("<4sIQQdddB")
FIELD_IDS = {"probe": 1, "control": 2}
FIELD_NAMES = {v: k for k, v in FIELD_IDS.items()}


class FieldFileError(ValueError):
    """Malformed CPTF data; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def encode_field(field: ComplexField, z: float, which: str) -> bytes:
    g = field.grid
    head = HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.dx, g.dy, float(z), FIELD_IDS[which])
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    return head + payload


def decode_field(data: bytes) -> tuple[ComplexField, float, str]:
    """Inverse of :func:`encode_field`; returns ``(field, z, which)``."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise FieldFileError("bad magic, expected b'CPTF'", 0)
    if len(data) < HEADER.size:
        raise FieldFileError(f"truncated header: {len(data)} of {HEADER.size} bytes", len(data))
    _, version, nx, ny, dx, dy, z, fid = HEADER.unpack_from(data)
    if version != VERSION:
        raise FieldFileError(f"unsupported version {version}", 4)
    if fid not in FIELD_NAMES:
        raise FieldFileError(f"unknown field id {fid}", HEADER.size - 1)
    expected = 16 * nx * ny
    got = len(data) - HEADER.size
    if got != expected:
        raise FieldFileError(f"payload length mismatch: expected {expected} bytes, found {got}", HEADER.size)
    try:
        grid = TransverseGrid(nx, ny, dx, dy)
    except ValueError as exc:
        raise FieldFileError(f"invalid grid in header: {exc}", 8) from None
    values = np.frombuffer(data, dtype="<c16", offset=HEADER.size).reshape(ny, nx).astype(complex)
    return ComplexField(grid, values), z, FIELD_NAMES[fid]


def write_field(path, field: ComplexField, z: float, which: str):
    Path(path).write_bytes(encode_field(field, z, which))


def read_field(path) -> tuple[ComplexField, float, str]:
    return decode_field(Path(path).read_bytes())


def write_pgm16(path, field: ComplexField) -> float:
    """Peak-normalised 16-bit intensity render, +y up. Returns the peak intensity.

    The peak is also stored in ``<path>.txt`` since renders are not quantitative.
    """
    intensity = field.intensity
    peak = float(intensity.max())
    scaled = intensity / peak if peak > 0 else intensity
    raster = np.round(np.flipud(scaled) * 65535).astype(">u2")
    ny, nx = raster.shape
    path = Path(path)
    path.write_bytes(f"P5\n{nx} {ny}\n65535\n".encode("ascii") + raster.tobytes())
    Path(str(path) + ".txt").write_text(f"peak_intensity = {peak!r}\nunits = gamma^2\n")
    return peak


def write_pgm8(path, image: np.ndarray):
    """8-bit greymap writer for test images; values clipped to [0, 255]."""
    raster = np.clip(np.round(image), 0, 255).astype("u1")
    ny, nx = raster.shape
    Path(path).write_bytes(f"P5\n{nx} {ny}\n255\n".encode("ascii") + raster.tobytes())


def write_csv(path, header: list[str], rows):
    """Locale-independent CSV: fixed column order, ``repr`` floats."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)
