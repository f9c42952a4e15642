"""Split-operator integration of the coupled paraxial equations for probe and control.

    dg/dz = i/(2 k1) (d_xx + d_yy) g + i c31(|g|^2, |G|^2) g
    dG/dz = i/(2 k2) (d_xx + d_yy) G + i c32(|g|^2, |G|^2) G

Diffraction is solved exactly in the spatial-frequency domain, the local part
pointwise. The edge absorber is an extra local attenuation rate, so it lives in
the local sub-step and every composition stays palindromic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .beams import ComplexField, TransverseGrid
from .medium import MediumParams, rates_from_intensity

log = logging.getLogger(__name__)

SCHEMES = ("strang2", "yoshida4")
MEDIUM_MODES = ("frozen", "predictor-corrector", "rk4")

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


class PropagationError(RuntimeError):
    pass


@dataclass
class FieldState:
    probe: ComplexField
    control: ComplexField
    z: float = 0.0

    def __post_init__(self):
        if self.probe.grid != self.control.grid:
            raise ValueError("probe and control must share a grid")

    @property
    def grid(self) -> TransverseGrid:
        return self.probe.grid

    def copy(self) -> "FieldState":
        return FieldState(self.probe.copy(), self.control.copy(), self.z)


@dataclass(frozen=True)
class Absorber:
    """Attenuation rate ramping quadratically from 0 to ``strength`` [cm^-1] over the outer ``width`` fraction."""

    width: float = 0.1
    strength: float = 200.0

    def __post_init__(self):
        if not 0 <= self.width < 1:
            raise ValueError("absorber width fraction must be in [0, 1)")
        if self.strength < 0:
            raise ValueError("absorber strength must be non-negative")

    @property
    def enabled(self) -> bool:
        return self.width > 0 and self.strength > 0

    def rate(self, grid: TransverseGrid) -> np.ndarray:
        def ramp(coord, extent):
            half = extent / 2.0
            inner = half * (1.0 - self.width)
            t = np.clip((np.abs(coord) - inner) / (half - inner), 0.0, None)
            return t**2

        rx = ramp(grid.x, grid.extent_x)
        ry = ramp(grid.y, grid.extent_y)
        return self.strength * np.maximum(rx[None, :], ry[:, None])

    def mask(self, grid: TransverseGrid, dz: float) -> np.ndarray:
        """Per-step transmission ``exp(-rate dz)``, values in (0, 1]."""
        return np.exp(-self.rate(grid) * dz)


NO_ABSORBER = Absorber(width=0.0, strength=0.0)


@dataclass(frozen=True)
class StepConfig:
    dz: float = 10e-4
    scheme: str = "strang2"
    mode: str = "predictor-corrector"
    absorber: Absorber = field(default_factory=Absorber)

    def __post_init__(self):
        if not self.dz > 0:
            raise ValueError("dz must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.mode not in MEDIUM_MODES:
            raise ValueError(f"unknown medium mode {self.mode!r}; expected one of {MEDIUM_MODES}")


@dataclass(frozen=True)
class SnapshotPlan:
    positions: tuple[float, ...] = ()

    @classmethod
    def every(cls, interval: float, z_end: float, z0: float = 0.0) -> "SnapshotPlan":
        if not interval > 0:
            raise ValueError("snapshot interval must be positive")
        n = int(np.floor((z_end - z0) / interval + 1e-9))
        return cls(tuple(z0 + i * interval for i in range(n + 1)))

    def validate(self, z0: float, z_end: float):
        for z in self.positions:
            if z < z0 - 1e-12 or z > z_end + 1e-12:
                raise ValueError(f"snapshot position {z} outside [{z0}, {z_end}]")


def diffraction_step(field: ComplexField, k: float, dz: float) -> ComplexField:
    """Exact free paraxial diffraction over ``dz``; unitary."""
    phase = np.exp(-1j * field.grid.k_squared() * dz / (2.0 * k))
    return ComplexField(field.grid, sfft.ifft2(sfft.fft2(field.values) * phase))


class _Kernels:
    """Cached transfer functions and absorber rates for one grid/config."""

    def __init__(self, grid: TransverseGrid, params: MediumParams, cfg: StepConfig):
        self.grid = grid
        self.params = params
        self.cfg = cfg
        k2 = grid.k_squared()
        self._ksq = np.stack([k2 / (2.0 * params.k1), k2 / (2.0 * params.k2)])
        self._rate = cfg.absorber.rate(grid) if cfg.absorber.enabled else None
        self._diff_cache: dict[float, np.ndarray] = {}

    def diffract(self, fields: np.ndarray, dz: float) -> np.ndarray:
        phase = self._diff_cache.get(dz)
        if phase is None:
            phase = np.exp(-1j * self._ksq * dz)
            if len(self._diff_cache) > 16:
                self._diff_cache.clear()
            self._diff_cache[dz] = phase
        return sfft.ifft2(sfft.fft2(fields, axes=(-2, -1)) * phase, axes=(-2, -1))

    def rates(self, fields: np.ndarray, phi=None) -> np.ndarray:
        """Local complex propagation rates for the fields advanced by accumulated phase ``phi``."""
        intensity = fields.real**2 + fields.imag**2
        if phi is not None:
            intensity = intensity * np.exp(-2.0 * phi.imag)
        c = np.stack(rates_from_intensity(self.params, intensity[0], intensity[1]))
        if self._rate is not None:
            c = c + 1j * self._rate
        return c

    def local(self, fields: np.ndarray, dz: float, mode: str) -> np.ndarray:
        c0 = self.rates(fields)
        if mode == "frozen":
            phi = c0 * dz
        elif mode == "predictor-corrector":
            phi = self.rates(fields, 0.5 * dz * c0) * dz
        else:
            k2 = self.rates(fields, 0.5 * dz * c0)
            k3 = self.rates(fields, 0.5 * dz * k2)
            k4 = self.rates(fields, dz * k3)
            phi = dz / 6.0 * (c0 + 2.0 * k2 + 2.0 * k3 + k4)
        return fields * np.exp(1j * phi)


def medium_step(state: FieldState, params: MediumParams, dz: float, mode: str = "frozen") -> FieldState:
    """Pointwise atomic response over ``dz`` (no diffraction, no absorber)."""
    if mode not in MEDIUM_MODES:
        raise ValueError(f"unknown medium mode {mode!r}")
    kern = _Kernels(state.grid, params, StepConfig(dz=abs(dz) or 1.0, mode=mode, absorber=NO_ABSORBER))
    out = kern.local(_stack(state), dz, mode)
    _check_finite(out, state.z + dz)
    return _unstack(state.grid, out, state.z + dz)


def _strang(kern: _Kernels, fields: np.ndarray, h: float) -> np.ndarray:
    fields = kern.diffract(fields, 0.5 * h)
    fields = kern.local(fields, h, kern.cfg.mode)
    return kern.diffract(fields, 0.5 * h)


def _advance(kern: _Kernels, fields: np.ndarray, h: float) -> np.ndarray:
    if kern.cfg.scheme == "strang2":
        return _strang(kern, fields, h)
    for w in (_W1, _W0, _W1):
        fields = _strang(kern, fields, w * h)
    return fields


def step(state: FieldState, params: MediumParams, cfg: StepConfig) -> FieldState:
    """Advance both envelopes by ``cfg.dz``."""
    kern = _Kernels(state.grid, params, cfg)
    out = _advance(kern, _stack(state), cfg.dz)
    _check_finite(out, state.z + cfg.dz)
    return _unstack(state.grid, out, state.z + cfg.dz)


def propagate(
    state0: FieldState,
    params: MediumParams,
    cfg: StepConfig,
    z_end: float,
    plan: SnapshotPlan | None = None,
    progress=None,
):
    """Integrate from ``state0.z`` to ``z_end``.

    Returns ``(final_state, snapshots)``. Each requested snapshot position is
    served by the nearest completed step (ties go to the earlier one); the last
    step is shortened so the run ends exactly at ``z_end``. ``progress`` is an
    optional callable receiving the current z.
    """
    if z_end < state0.z:
        raise ValueError("z_end must not precede the initial position")
    plan = plan or SnapshotPlan()
    plan.validate(state0.z, z_end)

    length = z_end - state0.z
    n_full = int(np.floor(length / cfg.dz * (1 + 1e-12)))
    steps = [cfg.dz] * n_full
    rest = length - n_full * cfg.dz
    if rest > 1e-9 * cfg.dz:
        steps.append(rest)
    z_after = state0.z + np.cumsum(steps) if steps else np.array([])
    z_all = np.concatenate([[state0.z], z_after])

    wanted: dict[int, list[float]] = {}
    for zp in plan.positions:
        idx = int(np.argmin(np.abs(z_all - zp)))
        wanted.setdefault(idx, []).append(zp)

    snapshots: list[FieldState] = []
    if 0 in wanted:
        snapshots.append(state0.copy())

    kern = _Kernels(state0.grid, params, cfg)
    fields = _stack(state0)
    fuse = cfg.scheme == "strang2"
    pending = 0.0  # diffraction owed from a fused trailing half step
    for i, h in enumerate(steps, start=1):
        if fuse:
            fields = kern.diffract(fields, pending + 0.5 * h)
            fields = kern.local(fields, h, cfg.mode)
            pending = 0.5 * h
            if i in wanted or i == len(steps):
                fields = kern.diffract(fields, pending)
                pending = 0.0
        else:
            fields = _advance(kern, fields, h)
        z = float(z_all[i])
        if not np.all(np.isfinite(fields)):
            _check_finite(fields, z)
        if i in wanted:
            snapshots.append(_unstack(state0.grid, fields.copy(), z))
        if progress is not None:
            progress(z)

    final = _unstack(state0.grid, fields, float(z_end)) if steps else state0.copy()
    return final, snapshots


def _stack(state: FieldState) -> np.ndarray:
    return np.stack([state.probe.values, state.control.values])


def _unstack(grid: TransverseGrid, fields: np.ndarray, z: float) -> FieldState:
    return FieldState(ComplexField(grid, fields[0]), ComplexField(grid, fields[1]), z)


def _check_finite(fields: np.ndarray, z: float):
    bad = ~np.isfinite(fields)
    if np.any(bad):
        which, iy, ix = np.argwhere(bad)[0]
        name = "probe" if which == 0 else "control"
        raise PropagationError(f"non-finite {name} field at z={z:.6g} cm, pixel (iy={iy}, ix={ix}); {int(bad.sum())} bad samples")
