"""Steady-state response of a three-level Lambda medium to two fields of arbitrary strength.

Levels: |1>, |2> ground states, |3> excited. The probe (Rabi amplitude g) drives
|1>-|3>, the control (G) drives |2>-|3>. All rates, detunings and Rabi amplitudes
are in units of the branch decay rate gamma.

The closed forms below hold for equal branch rates. Each ground-state branch
empties |3> at rate gamma, so the optical coherences decay at gamma and the
ground-state coherence at the total rate ``big_gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class NonUniqueSteadyState(ValueError):
    """Raised when the Liouvillian has more than one stationary state."""


def default_kappa(density: float, wavelength: float) -> float:
    """Propagation coupling ``3 N lambda^2 / (4 pi)`` in cm^-1.

    Eliminates the dipole moment through ``d^2 = 3 hbar gamma / (2 k^3)``.
    """
    return 3.0 * density * wavelength**2 / (4.0 * math.pi)


@dataclass(frozen=True)
class MediumParams:
    big_gamma: float = 0.001
    delta1: float = 0.0
    delta2: float = 0.0
    density: float = 5e11
    lambda1: float = 795e-7
    lambda2: float = 795e-7
    kappa1: float | None = None
    kappa2: float | None = None
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.big_gamma < 0:
            raise ValueError("big_gamma must be non-negative")
        if self.density < 0:
            raise ValueError("density must be non-negative")
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("wavelengths must be positive")
        for name in ("big_gamma", "delta1", "delta2", "density", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        # fill derived couplings so the frozen instance carries the effective values
        if self.kappa1 is None:
            object.__setattr__(self, "kappa1", default_kappa(self.density, self.lambda1))
        if self.kappa2 is None:
            object.__setattr__(self, "kappa2", default_kappa(self.density, self.lambda2))
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("kappa must be non-negative")

    @property
    def k1(self) -> float:
        return 2.0 * math.pi / self.lambda1

    @property
    def k2(self) -> float:
        return 2.0 * math.pi / self.lambda2


class FieldPoint(NamedTuple):
    g: complex
    G: complex


@dataclass
class SusceptibilityPair:
    """Scaled susceptibilities ``c3j = 2 pi k_j chi_3j`` in cm^-1.

    ``no_field`` marks points where both fields vanish; c31 and c32 are set
    to zero there.
    """

    c31: np.ndarray | complex
    c32: np.ndarray | complex
    no_field: np.ndarray | bool = field(default=False)


@dataclass
class SteadyStateDM:
    rho: np.ndarray

    @property
    def sigma31(self) -> complex:
        return complex(self.rho[2, 0])

    @property
    def sigma32(self) -> complex:
        return complex(self.rho[2, 1])

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))


def _coefficients(params: MediumParams):
    """Polynomial coefficients of the reduced numerators and the denominator.

    ``N31/g = G2 (a0 + a1 g2 + a2 G2)``, ``N32/G = g2 (b0 + b1 g2 + b2 G2)`` and
    ``D = sum d[i, j] g2**i G2**j``.
    """
    y = params.gamma
    Gm = params.big_gamma
    d1 = params.delta1
    d2 = params.delta2
    dd = d2 - d1
    two_photon = Gm**2 + dd**2

    a = (
        y * (1j * y + d1) * two_photon,
        y * (1j * Gm + dd) + Gm * (d2 + d1),
        y * (1j * Gm + dd),
    )
    b = (
        y * (1j * y + d2) * two_photon,
        y * (1j * Gm - dd),
        y * (1j * Gm - dd) + Gm * (d2 + d1),
    )
    cross = (4 * y + Gm) * (d1**2 + d2**2) + 2 * y * Gm * (2 * y + 3 * Gm) + 2 * (Gm - 4 * y) * d1 * d2
    d = {
        (0, 3): y,
        (3, 0): y,
        (1, 2): 3 * (y + 2 * Gm),
        (2, 1): 3 * (y + 2 * Gm),
        (0, 2): 2 * y * (y * Gm + d1 * dd),
        (2, 0): 2 * y * (y * Gm - d2 * dd),
        (1, 1): cross,
        (1, 0): y * (y**2 + d2**2) * two_photon,
        (0, 1): y * (y**2 + d1**2) * two_photon,
    }
    return a, b, d


def reduced_numerators(params: MediumParams, g2, G2):
    """Return ``(N31/g, N32/G, D)`` as functions of the intensities |g|^2, |G|^2.

    Factoring the field out of each numerator keeps the coherence-to-field
    ratio finite at field zeros. ``D`` is exactly zero only when both
    intensities vanish, which is how a no-field point is recognised.
    """
    g2 = np.asarray(g2, dtype=float)
    G2 = np.asarray(G2, dtype=float)
    if np.any(g2 < 0) or np.any(G2 < 0):
        raise ValueError("intensities must be non-negative")
    a, b, d = _coefficients(params)
    n31 = G2 * (a[0] + a[1] * g2 + a[2] * G2)
    n32 = g2 * (b[0] + b[1] * g2 + b[2] * G2)
    den = (
        g2 * (d[1, 0] + g2 * (d[2, 0] + g2 * d[3, 0] + G2 * d[2, 1]) + G2 * d[1, 1])
        + G2 * (d[0, 1] + G2 * (d[0, 2] + G2 * d[0, 3] + g2 * d[1, 2]))
    )
    if n31.ndim == 0:
        return complex(n31), complex(n32), float(den)
    return n31, n32, den


def coherences(params: MediumParams, g, G):
    """Closed-form steady-state ``(sigma31, sigma32)``; zero where both fields vanish."""
    g = np.asarray(g, dtype=complex)
    G = np.asarray(G, dtype=complex)
    n31, n32, den = reduced_numerators(params, np.abs(g) ** 2, np.abs(G) ** 2)
    safe = np.where(den == 0, 1.0, den)
    return g * n31 / safe, G * n32 / safe


def rates_from_intensity(params: MediumParams, g2, G2):
    """``(c31, c32)`` arrays for intensity arrays; zero at no-field points."""
    n31, n32, den = reduced_numerators(params, g2, G2)
    no_field = den == 0
    scale = params.gamma / np.where(no_field, 1.0, den)
    return params.kappa1 * n31 * scale, params.kappa2 * n32 * scale


def susceptibility(params: MediumParams, g, G=None) -> SusceptibilityPair:
    """Scaled susceptibilities for local Rabi amplitudes (scalars or arrays).

    ``g`` may also be a :class:`FieldPoint`. Depends on the fields only
    through their intensities.
    """
    if G is None:
        g, G = g
    g = np.asarray(g, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(G))):
        raise ValueError("field amplitudes must be finite")
    n31, n32, den = reduced_numerators(params, np.abs(g) ** 2, np.abs(G) ** 2)
    no_field = np.asarray(den) == 0
    safe = np.where(no_field, 1.0, den)
    c31 = np.where(no_field, 0.0, params.kappa1 * params.gamma * np.asarray(n31) / safe)
    c32 = np.where(no_field, 0.0, params.kappa2 * params.gamma * np.asarray(n32) / safe)
    if c31.ndim == 0:
        return SusceptibilityPair(complex(c31), complex(c32), bool(no_field))
    return SusceptibilityPair(c31, c32, no_field)


def _liouvillian(params: MediumParams, g: complex, G: complex) -> np.ndarray:
    # interaction-picture Hamiltonian, basis order (|1>, |2>, |3>)
    H = np.zeros((3, 3), dtype=complex)
    H[1, 1] = params.delta1 - params.delta2
    H[2, 2] = params.delta1
    H[2, 0] = -g
    H[0, 2] = -np.conj(g)
    H[2, 1] = -G
    H[1, 2] = -np.conj(G)

    eye = np.eye(3)
    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for ground in (0, 1):
        c = np.zeros((3, 3))
        c[ground, 2] = math.sqrt(params.gamma)
        cdc = c.T @ c
        L += np.kron(c, c) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    # pure dephasing of the ground-state coherence up to the total rate big_gamma
    for a, b in ((0, 1), (1, 0)):
        L[3 * a + b, 3 * a + b] -= params.big_gamma
    return L


def steady_state_oracle(params: MediumParams, g, G=None, tol: float = 1e-10) -> SteadyStateDM:
    """Stationary density matrix from the null space of the full Liouvillian.

    Built from the Hamiltonian and collapse operators, independently of the
    closed forms. Raises :class:`NonUniqueSteadyState` when the null space is
    not one-dimensional.
    """
    if G is None:
        g, G = g
    g = complex(g)
    G = complex(G)
    if not (np.isfinite(g) and np.isfinite(G)):
        raise ValueError("field amplitudes must be finite")
    L = _liouvillian(params, g, G)
    _, s, vh = np.linalg.svd(L)
    scale = max(s[0], 1.0)
    if s[-2] <= tol * scale:
        raise NonUniqueSteadyState(
            f"Liouvillian null space has dimension {int(np.sum(s <= tol * scale))} "
            f"(g={g}, G={G}, big_gamma={params.big_gamma})"
        )
    rho = vh[-1].conj().reshape(3, 3)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    # one Newton-style refinement against the trace-augmented system
    A = np.vstack([L, np.eye(3).reshape(1, 9)])
    b = np.zeros(10, dtype=complex)
    b[-1] = 1.0
    r = b - A @ rho.reshape(9)
    rho = rho + np.linalg.lstsq(A, r, rcond=None)[0].reshape(3, 3)
    return SteadyStateDM(rho)


def oracle_residual(params: MediumParams, g, G, dm: SteadyStateDM) -> float:
    """Largest absolute time derivative of the density matrix at ``dm``."""
    L = _liouvillian(params, complex(g), complex(G))
    return float(np.max(np.abs(L @ dm.rho.reshape(9))))


def weak_probe_limit_check(params: MediumParams, G: complex, g_weak: float = 1e-8) -> complex:
    """Probe response c31 in the linear (weak-probe) regime, checked against the oracle."""
    if abs(G) == 0:
        raise ValueError("control amplitude must be non-zero")
    c31 = susceptibility(params, g_weak, G).c31
    dm = steady_state_oracle(params, g_weak, G)
    ref = params.kappa1 * params.gamma * dm.sigma31 / g_weak
    # the oracle resolves sigma31 to ~1e-16 absolute, i.e. ~1e-8 relative at this g
    if abs(c31 - ref) > 1e-6 * abs(ref) + 1e-7 * params.kappa1 * params.gamma:
        raise AssertionError(f"weak-probe response {c31} disagrees with oracle {ref}")
    return c31
