"""Beam metrology: widths, lobes, transmission and cloning fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.signal import find_peaks

from .beams import ComplexField

LOBE_PROMINENCE = 0.1


class NoLocalizedBeam(ValueError):
    pass


@dataclass(frozen=True)
class Lobe:
    position: float
    fwhm: float
    peak: float


@dataclass(frozen=True)
class BeamMetrics:
    fwhm_x: float
    fwhm_y: float
    w2m_x: float
    w2m_y: float
    peak: float
    power: float
    centroid_x: float
    centroid_y: float
    lobes_x: int
    lobes_y: int

    @property
    def fwhm(self) -> float:
        return 0.5 * (self.fwhm_x + self.fwhm_y)


def _half_crossing(profile, coords, start, level, direction):
    i = start
    n = len(profile)
    while 0 <= i + direction < n and profile[i + direction] >= level:
        i += direction
    j = i + direction
    if not 0 <= j < n:
        return None
    # linear interpolation between the last sample above and the first below
    a, b = profile[i], profile[j]
    t = (a - level) / (a - b)
    return coords[i] + t * (coords[j] - coords[i])


def lobes(profile, coords, prominence: float = LOBE_PROMINENCE) -> list[Lobe]:
    """Local maxima with prominence above ``prominence`` times the global peak.

    Each lobe's FWHM is measured at half of its own peak value. Lobes whose
    half-maximum crossing falls off the end of the profile are dropped.
    """
    profile = np.asarray(profile, dtype=float)
    top = profile.max()
    if not top > 0:
        return []
    padded = np.concatenate([[0.0], profile, [0.0]])
    idx, _ = find_peaks(padded, prominence=prominence * top)
    found = []
    for p in idx - 1:
        level = 0.5 * profile[p]
        left = _half_crossing(profile, coords, p, level, -1)
        right = _half_crossing(profile, coords, p, level, +1)
        if left is None or right is None:
            continue
        found.append(Lobe(float(coords[p]), float(right - left), float(profile[p])))
    return found


def _cut_width(profile, coords):
    found = lobes(profile, coords)
    if not found:
        raise NoLocalizedBeam("no localized beam: half-maximum crossings not found")
    main = max(found, key=lambda lb: lb.peak)
    return main.fwhm, len(found)


def _centroid_cuts(field: ComplexField):
    grid = field.grid
    intensity = field.intensity
    total = intensity.sum()
    if not total > 0:
        raise ValueError("zero field has no metrics")
    cx = float((intensity.sum(axis=0) * grid.x).sum() / total)
    cy = float((intensity.sum(axis=1) * grid.y).sum() / total)
    iy = int(np.argmin(np.abs(grid.y - cy)))
    ix = int(np.argmin(np.abs(grid.x - cx)))
    peak = intensity.max()
    # a cut through a nodal line carries no beam; use the line through the peak instead
    py, px = np.unravel_index(np.argmax(intensity), intensity.shape)
    if intensity[iy].max() < LOBE_PROMINENCE * peak:
        iy = int(py)
    if intensity[:, ix].max() < LOBE_PROMINENCE * peak:
        ix = int(px)
    return intensity, cx, cy, iy, ix, total


def beam_metrics(field: ComplexField) -> BeamMetrics:
    """Intensity metrics; FWHM of the dominant lobe on the cuts through the centroid."""
    grid = field.grid
    intensity, cx, cy, iy, ix, total = _centroid_cuts(field)
    fx, nlx = _cut_width(intensity[iy], grid.x)
    fy, nly = _cut_width(intensity[:, ix], grid.y)
    px = intensity.sum(axis=0) / total
    py = intensity.sum(axis=1) / total
    wx = 2.0 * math.sqrt(max(float((px * grid.x**2).sum()) - cx**2, 0.0))
    wy = 2.0 * math.sqrt(max(float((py * grid.y**2).sum()) - cy**2, 0.0))
    return BeamMetrics(
        fwhm_x=fx,
        fwhm_y=fy,
        w2m_x=wx,
        w2m_y=wy,
        peak=float(intensity.max()),
        power=float(total * grid.cell_area),
        centroid_x=cx,
        centroid_y=cy,
        lobes_x=nlx,
        lobes_y=nly,
    )


def field_lobes(field: ComplexField, axis: str = "x", through: float | None = None) -> list[Lobe]:
    """Lobes on the row (``axis='x'``) or column through ``through`` (default: the centroid)."""
    grid = field.grid
    intensity, cx, cy, iy, ix, _ = _centroid_cuts(field)
    if axis == "x":
        if through is not None:
            iy = int(np.argmin(np.abs(grid.y - through)))
        return lobes(intensity[iy], grid.x)
    if through is not None:
        ix = int(np.argmin(np.abs(grid.x - through)))
    return lobes(intensity[:, ix], grid.y)


def transmission(in_state, out_state, which: str = "probe") -> float:
    """Ratio of integrated intensities, output over input."""
    if which not in ("probe", "control"):
        raise ValueError("which must be 'probe' or 'control'")
    p_in = getattr(in_state, which).power()
    if not p_in > 0:
        raise ValueError("input power is zero")
    return getattr(out_state, which).power() / p_in


def rayleigh_length(w0: float, wavelength: float) -> float:
    if not (w0 > 0 and wavelength > 0):
        raise ValueError("waist and wavelength must be positive")
    return math.pi * w0**2 / wavelength


def cloning_fidelity(probe_out: ComplexField, control_in: ComplexField, max_shift: float = 0.05) -> float:
    """Best zero-mean normalised correlation of the two intensity maps.

    Searched over integer pixel shifts up to ``max_shift`` of the domain on
    each axis (periodic wrap).
    """
    if probe_out.grid != control_in.grid:
        raise ValueError("fields must share a grid")
    a = probe_out.intensity
    b = control_in.intensity
    # rounding leaves a uniform map with a variance of order eps relative to its mean
    flat = 1e-10
    scale_a = np.sqrt((a**2).sum())
    scale_b = np.sqrt((b**2).sum())
    a = a - a.mean()
    b = b - b.mean()
    na = np.sqrt((a**2).sum())
    nb = np.sqrt((b**2).sum())
    if not (na > flat * scale_a and nb > flat * scale_b):
        raise ValueError("zero-variance intensity cannot be correlated")
    corr = sfft.irfft2(sfft.rfft2(a) * np.conj(sfft.rfft2(b)), s=a.shape)
    ny, nx = a.shape
    sy = int(max_shift * ny)
    sx = int(max_shift * nx)
    rows = np.r_[0 : sy + 1, ny - sy : ny] if sy else np.r_[0:1]
    cols = np.r_[0 : sx + 1, nx - sx : nx] if sx else np.r_[0:1]
    best = corr[np.ix_(rows, cols)].max()
    return float(np.clip(best / (na * nb), -1.0, 1.0))


def match_lobes(ref: list[Lobe], other: list[Lobe]) -> list[tuple[Lobe, Lobe]]:
    """Pair each reference lobe with the nearest lobe of ``other`` within the reference FWHM."""
    pairs = []
    used = set()
    for lb in sorted(ref, key=lambda v: -v.peak):
        cands = [(abs(o.position - lb.position), k) for k, o in enumerate(other) if k not in used]
        if not cands:
            break
        dist, k = min(cands)
        if dist <= lb.fwhm:
            used.add(k)
            pairs.append((lb, other[k]))
    return pairs


def feature_size_ratio(a: ComplexField, b: ComplexField) -> float:
    """How many times narrower the features of ``b`` are than those of ``a``.

    Lobes are taken on the row and column through the centroid of ``a``;
    the result averages ``fwhm_a / fwhm_b`` over position-matched lobes.
    """
    if a.grid != b.grid:
        raise ValueError("fields must share a grid")
    _, cx, cy, iy, ix, _ = _centroid_cuts(a)
    grid = a.grid
    ratios = []
    for axis, through in (("x", grid.y[iy]), ("y", grid.x[ix])):
        la = field_lobes(a, axis, through)
        lb = field_lobes(b, axis, through)
        ratios.extend(pa.fwhm / pb.fwhm for pa, pb in match_lobes(la, lb))
    if not ratios:
        raise NoLocalizedBeam("no matching lobes between the two fields")
    return float(np.mean(ratios))
