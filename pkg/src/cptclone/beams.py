"""Transverse grids and initial field envelopes (Rabi amplitudes in units of gamma)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class TransverseGrid:
    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if n < 2 or n & (n - 1):
                raise ValueError(f"grid sizes must be powers of two, got {n}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacing must be positive")

    @classmethod
    def square(cls, n: int, half_width: float) -> "TransverseGrid":
        """``n x n`` grid spanning ``[-half_width, half_width)`` in both axes."""
        d = 2.0 * half_width / n
        return cls(n, n, d, d)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    @property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, self.dx)

    @property
    def ky(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, self.dy)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    def k_squared(self) -> np.ndarray:
        kx, ky = np.meshgrid(self.kx, self.ky)
        return kx**2 + ky**2

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dy


@dataclass
class ComplexField:
    """Complex envelope sampled on a grid, ``values[iy, ix]``."""

    grid: TransverseGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def power(self) -> float:
        return float(np.sum(self.intensity) * self.grid.cell_area)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())


def hermite(k: int, x):
    """Physicists' Hermite polynomial H_k(x) by upward recurrence."""
    if k < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for j in range(1, k):
        h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    return h if h.ndim else float(h)


def synth_hermite_gaussian(grid: TransverseGrid, m: int, n: int, w: float, amp: float) -> ComplexField:
    X, Y = grid.mesh()
    s = math.sqrt(2.0) / w
    vals = amp * hermite(m, X * s) * hermite(n, Y * s) * np.exp(-(X**2 + Y**2) / w**2)
    return ComplexField(grid, vals)


def synth_super_gaussian(grid: TransverseGrid, w: float, p: int, amp: float) -> ComplexField:
    X, Y = grid.mesh()
    vals = amp * np.exp(-(((X**2 + Y**2) / w**2) ** p))
    return ComplexField(grid, vals)


def synth_plane_wave(grid: TransverseGrid, amp: float) -> ComplexField:
    return ComplexField(grid, np.full(grid.shape, amp, dtype=complex))


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) greymap, 8- or 16-bit, as a float array ``[row, col]``."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ValueError(f"{path}: truncated PGM header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    pos += 1  # single whitespace byte before the raster
    width, height, maxval = tokens
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: invalid PGM header {tokens}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    raster = np.frombuffer(data, dtype=dtype, count=min(count, (len(data) - pos) // dtype.itemsize), offset=pos)
    if raster.size != count:
        raise ValueError(f"{path}: raster has {raster.size} samples, expected {count}")
    return raster.reshape(height, width).astype(float)


def synth_from_image(
    grid: TransverseGrid,
    image,
    amp: float,
    blur_sigma: float = 0.0,
    extent: float | None = None,
) -> ComplexField:
    """Field amplitude proportional to image luminance, centred on the grid.

    ``image`` is a 2D array or a PGM path. The image width maps to ``extent``
    (cm, default half the grid width) and keeps its aspect ratio; bilinear
    resampling puts zeros outside the picture. ``blur_sigma`` (cm) applies a
    normalised Gaussian kernel after resampling.
    """
    if not isinstance(image, np.ndarray):
        image = read_pgm(image)
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("image must be a non-empty 2D array")
    peak = image.max()
    if not peak > 0:
        raise ValueError("zero-maximum image cannot be normalised")
    rows, cols = image.shape
    if extent is None:
        extent = 0.5 * grid.extent_x
    pixel = extent / cols
    X, Y = grid.mesh()
    # continuous pixel coordinates, pixel centres at integer positions; top row is +y
    col = X / pixel + (cols - 1) / 2.0
    row = -Y / pixel + (rows - 1) / 2.0
    sampled = ndimage.map_coordinates(image / peak, [row, col], order=1, mode="nearest")
    outside = (col < -0.5) | (col > cols - 0.5) | (row < -0.5) | (row > rows - 0.5)
    sampled[outside] = 0.0
    if blur_sigma > 0:
        sampled = ndimage.gaussian_filter(sampled, sigma=(blur_sigma / grid.dy, blur_sigma / grid.dx), mode="constant")
    return ComplexField(grid, amp * sampled)


@dataclass(frozen=True)
class HermiteGaussian:
    width: float
    amplitude: float
    m: int = 0
    n: int = 0

    def __post_init__(self):
        _check_common(self.width, self.amplitude)
        if self.m < 0 or self.n < 0:
            raise ValueError("mode indices must be non-negative")

    def synthesize(self, grid: TransverseGrid) -> ComplexField:
        return synth_hermite_gaussian(grid, self.m, self.n, self.width, self.amplitude)


@dataclass(frozen=True)
class SuperGaussian:
    width: float
    amplitude: float
    order: int = 8

    def __post_init__(self):
        _check_common(self.width, self.amplitude)
        if self.order < 1 or int(self.order) != self.order:
            raise ValueError("super-Gaussian order must be an integer >= 1")

    def synthesize(self, grid: TransverseGrid) -> ComplexField:
        return synth_super_gaussian(grid, self.width, self.order, self.amplitude)


@dataclass(frozen=True)
class PlaneWave:
    amplitude: float

    def __post_init__(self):
        _check_common(1.0, self.amplitude)

    def synthesize(self, grid: TransverseGrid) -> ComplexField:
        return synth_plane_wave(grid, self.amplitude)


@dataclass(frozen=True)
class ImageBeam:
    path: str
    amplitude: float
    blur: float = 0.0
    extent: float | None = None

    def __post_init__(self):
        _check_common(1.0, self.amplitude)
        if self.blur < 0:
            raise ValueError("blur must be non-negative")
        if self.extent is not None and not self.extent > 0:
            raise ValueError("image extent must be positive")

    def synthesize(self, grid: TransverseGrid) -> ComplexField:
        return synth_from_image(grid, self.path, self.amplitude, self.blur, self.extent)


BeamSpec = HermiteGaussian | SuperGaussian | PlaneWave | ImageBeam


def _check_common(width, amplitude):
    if not width > 0:
        raise ValueError("beam width must be positive")
    if not amplitude >= 0:
        raise ValueError("amplitude must be non-negative")
