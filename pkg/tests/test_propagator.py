import math

import numpy as np
import pytest

from cptclone.beams import ComplexField, TransverseGrid, synth_hermite_gaussian, synth_plane_wave, synth_super_gaussian
from cptclone.medium import MediumParams, susceptibility
from cptclone.propagator import (
    NO_ABSORBER,
    Absorber,
    FieldState,
    PropagationError,
    SnapshotPlan,
    StepConfig,
    _check_finite,
    diffraction_step,
    medium_step,
    propagate,
    step,
)

VACUUM = MediumParams(density=0.0)
MEDIUM = MediumParams(big_gamma=0.001, delta1=0.005, density=5e11)


def random_state(grid, seed=0):
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh()
    env = np.exp(-(X**2 + Y**2) / (0.3 * grid.extent_x) ** 2)
    def f():
        return ComplexField(grid, env * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)))
    return FieldState(f(), f())


def gaussian_state(grid, g0=0.15, G0=1.0, wp=150e-4, wc=400e-4):
    return FieldState(synth_super_gaussian(grid, wp, 8, g0), synth_hermite_gaussian(grid, 0, 0, wc, G0))


@pytest.mark.parametrize("scheme", ["strang2", "yoshida4"])
def test_unitary_without_atoms(scheme):
    grid = TransverseGrid.square(64, 0.1)
    s0 = random_state(grid)
    cfg = StepConfig(dz=1e-3, scheme=scheme, absorber=NO_ABSORBER)
    out, _ = propagate(s0, VACUUM, cfg, 1.0)
    for which in ("probe", "control"):
        p0 = getattr(s0, which).power()
        assert abs(getattr(out, which).power() - p0) / p0 < 1e-10


def test_gaussian_diffraction_matches_analytic():
    grid = TransverseGrid.square(256, 0.2)
    w0 = 150e-4
    k = VACUUM.k1
    zR = k * w0**2 / 2
    f0 = synth_hermite_gaussian(grid, 0, 0, w0, 1.0)
    X, Y = grid.mesh()
    for z in (0.5 * zR, zR, 2 * zR):
        q = 1 + 1j * z / zR
        exact = np.exp(-(X**2 + Y**2) / (w0**2 * q)) / q
        got = diffraction_step(f0, k, z).values
        assert np.abs(got - exact).max() < 1e-12


def test_diffraction_steps_compose():
    grid = TransverseGrid.square(64, 0.1)
    f = random_state(grid).probe
    a = diffraction_step(diffraction_step(f, 1e5, 0.3), 1e5, 0.7)
    b = diffraction_step(f, 1e5, 1.0)
    assert np.allclose(a.values, b.values, atol=1e-13)


def test_medium_is_dissipative():
    grid = TransverseGrid.square(64, 0.1)
    state = gaussian_state(grid)
    cfg = StepConfig(dz=5e-3)
    prev = [state.probe.power(), state.control.power()]
    for _ in range(20):
        state = step(state, MEDIUM, cfg)
        now = [state.probe.power(), state.control.power()]
        assert now[0] <= prev[0] * (1 + 1e-14) and now[1] <= prev[1] * (1 + 1e-14)
        prev = now


def test_dark_state_plane_waves_unchanged():
    grid = TransverseGrid.square(32, 0.1)
    params = MediumParams(big_gamma=0.0, delta1=0.2, delta2=0.2)
    s0 = FieldState(synth_plane_wave(grid, 0.15), synth_plane_wave(grid, 1.5))
    out, _ = propagate(s0, params, StepConfig(dz=1e-2, absorber=NO_ABSORBER), 1.0)
    assert np.abs(out.probe.values - 0.15).max() < 1e-13
    assert np.abs(out.control.values - 1.5).max() < 1e-13


@pytest.mark.parametrize("mode", ["frozen", "predictor-corrector", "rk4"])
def test_medium_step_plane_wave_vs_analytic(mode):
    # uniform fields: compare with a fine explicit integration of the pointwise ODE
    grid = TransverseGrid.square(4, 0.1)
    s0 = FieldState(synth_plane_wave(grid, 0.15), synth_plane_wave(grid, 1.0))
    dz = 0.05
    got = medium_step(s0, MEDIUM, dz, mode)
    g, G = 0.15 + 0j, 1.0 + 0j
    n = 20000
    h = dz / n
    for _ in range(n):
        chi = susceptibility(MEDIUM, g, G)
        g, G = g * np.exp(1j * chi.c31 * h), G * np.exp(1j * chi.c32 * h)
    tol = {"frozen": 1e-2, "predictor-corrector": 1e-4, "rk4": 1e-7}[mode]
    assert abs(got.probe.values[0, 0] - g) < tol * abs(g)
    assert abs(got.control.values[0, 0] - G) < tol * abs(G)
    assert got.z == pytest.approx(dz)


def test_medium_step_frozen_exact_single_rate():
    grid = TransverseGrid.square(4, 0.1)
    s0 = FieldState(synth_plane_wave(grid, 0.15), synth_plane_wave(grid, 1.0))
    chi = susceptibility(MEDIUM, 0.15, 1.0)
    got = medium_step(s0, MEDIUM, 0.01, "frozen")
    assert got.probe.values[1, 2] == pytest.approx(0.15 * np.exp(1j * chi.c31 * 0.01), rel=1e-14)


def _convergence_slope(scheme, mode):
    grid = TransverseGrid.square(64, 0.1)
    s0 = gaussian_state(grid, wp=150e-4, wc=300e-4)
    runs = []
    # coarser steps are pre-asymptotic: the wing absorption rate (~kappa) times dz is O(1)
    for n in (100, 200, 400):
        cfg = StepConfig(dz=0.25 / n, scheme=scheme, mode=mode, absorber=NO_ABSORBER)
        out, _ = propagate(s0, MEDIUM, cfg, 0.25)
        runs.append(out.probe.values)
    e1 = np.linalg.norm(runs[0] - runs[1])
    e2 = np.linalg.norm(runs[1] - runs[2])
    return math.log2(e1 / e2)


def test_strang_second_order():
    assert _convergence_slope("strang2", "predictor-corrector") >= 1.9


def test_yoshida_fourth_order():
    assert _convergence_slope("yoshida4", "rk4") >= 3.7


def test_fused_strang_equals_repeated_steps():
    grid = TransverseGrid.square(32, 0.1)
    s0 = gaussian_state(grid)
    cfg = StepConfig(dz=0.01)
    ref = s0
    for _ in range(7):
        ref = step(ref, MEDIUM, cfg)
    out, snaps = propagate(s0, MEDIUM, cfg, 0.07, SnapshotPlan((0.03,)))
    assert np.allclose(out.probe.values, ref.probe.values, rtol=0, atol=1e-13)
    assert np.allclose(out.control.values, ref.control.values, rtol=0, atol=1e-13)
    mid = s0
    for _ in range(3):
        mid = step(mid, MEDIUM, cfg)
    assert np.allclose(snaps[0].probe.values, mid.probe.values, rtol=0, atol=1e-13)


def test_snapshot_policy():
    grid = TransverseGrid.square(16, 0.1)
    s0 = gaussian_state(grid)
    cfg = StepConfig(dz=0.03)
    out, snaps = propagate(s0, MEDIUM, cfg, 0.1, SnapshotPlan((0.0, 0.04, 0.05, 0.1)))
    # steps land at 0.03, 0.06, 0.09 and a short final step to 0.1
    assert [s.z for s in snaps] == pytest.approx([0.0, 0.03, 0.06, 0.1])
    assert snaps[0].probe.values.tobytes() == s0.probe.values.tobytes()
    assert out.z == 0.1
    assert snaps[-1].probe.values.tobytes() == out.probe.values.tobytes()


def test_snapshot_plan_every():
    assert SnapshotPlan.every(1.0, 4.0).positions == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert SnapshotPlan.every(0.3, 1.0).positions == pytest.approx((0.0, 0.3, 0.6, 0.9))
    with pytest.raises(ValueError):
        SnapshotPlan.every(0.0, 1.0)


def test_invalid_ranges():
    grid = TransverseGrid.square(16, 0.1)
    s0 = gaussian_state(grid)
    with pytest.raises(ValueError):
        propagate(s0, MEDIUM, StepConfig(), 1.0, SnapshotPlan((2.0,)))
    with pytest.raises(ValueError):
        propagate(FieldState(s0.probe, s0.control, 1.0), MEDIUM, StepConfig(), 0.5)
    out, snaps = propagate(s0, MEDIUM, StepConfig(), 0.0, SnapshotPlan((0.0,)))
    assert out.probe.values.tobytes() == s0.probe.values.tobytes()
    assert len(snaps) == 1


def test_step_config_validation():
    with pytest.raises(ValueError):
        StepConfig(dz=0.0)
    with pytest.raises(ValueError):
        StepConfig(scheme="euler")
    with pytest.raises(ValueError):
        StepConfig(mode="implicit")
    with pytest.raises(ValueError):
        Absorber(width=1.0)
    with pytest.raises(ValueError):
        Absorber(strength=-1.0)


def test_absorber_profile():
    grid = TransverseGrid.square(64, 0.1)
    a = Absorber(0.1, 200.0)
    rate = a.rate(grid)
    assert rate[32, 32] == 0.0
    assert np.all(rate[16:48, 16:48] == 0.0)
    assert rate[0, 32] == pytest.approx(200.0)
    mask = a.mask(grid, 1e-3)
    assert np.all((mask > 0) & (mask <= 1))
    assert not NO_ABSORBER.enabled


def test_absorber_removes_edge_power():
    grid = TransverseGrid.square(64, 0.1)
    s0 = FieldState(synth_plane_wave(grid, 1.0), synth_plane_wave(grid, 1.0))
    out, _ = propagate(s0, VACUUM, StepConfig(dz=1e-2), 0.1)
    assert out.probe.power() < s0.probe.power()
    assert abs(out.probe.values[32, 32]) > 0.99


def test_deterministic():
    grid = TransverseGrid.square(32, 0.1)
    s0 = gaussian_state(grid)
    a, _ = propagate(s0, MEDIUM, StepConfig(dz=0.01), 0.1)
    b, _ = propagate(s0, MEDIUM, StepConfig(dz=0.01), 0.1)
    assert a.probe.values.tobytes() == b.probe.values.tobytes()


def test_check_finite_reports_location():
    fields = np.zeros((2, 4, 4), complex)
    fields[1, 2, 3] = np.inf
    with pytest.raises(PropagationError, match=r"control.*z=0\.5.*iy=2, ix=3"):
        _check_finite(fields, 0.5)


def test_grids_must_match():
    a = synth_plane_wave(TransverseGrid.square(16, 0.1), 1.0)
    b = synth_plane_wave(TransverseGrid.square(32, 0.1), 1.0)
    with pytest.raises(ValueError):
        FieldState(a, b)
