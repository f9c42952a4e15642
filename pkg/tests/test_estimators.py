import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cptclone.beams import TransverseGrid, synth_hermite_gaussian, synth_super_gaussian
from cptclone.estimators import CloningPropagator, SusceptibilityModel, check_complex_array
from cptclone.medium import MediumParams, susceptibility
from cptclone.propagator import FieldState, StepConfig, propagate


def test_susceptibility_model_matches_function():
    model = SusceptibilityModel(delta1=0.005).fit()
    X = np.array([[0.15, 1.0], [0.015j, 0.5], [0.0, 0.0]])
    out = model.predict(X)
    p = MediumParams(delta1=0.005)
    for row, (g, G) in zip(out, X):
        chi = susceptibility(p, g, G)
        assert row[0] == chi.c31 and row[1] == chi.c32


def test_susceptibility_model_params_and_clone():
    model = SusceptibilityModel(big_gamma=0.01, density=1e12)
    params = model.get_params()
    assert params["big_gamma"] == 0.01 and params["density"] == 1e12 and params["kappa1"] is None
    twin = clone(model)
    assert twin.get_params() == params and twin is not model
    model.set_params(delta1=0.3)
    assert model.fit().params_.delta1 == 0.3


def test_susceptibility_model_validation():
    with pytest.raises(NotFittedError):
        SusceptibilityModel().predict([[0.1, 1.0]])
    model = SusceptibilityModel().fit([[0.1, 1.0]])
    assert model.n_features_in_ == 2
    with pytest.raises(ValueError):
        model.predict([[0.1, 1.0, 2.0]])
    with pytest.raises(ValueError):
        model.predict([[np.nan, 1.0]])
    with pytest.raises(ValueError):
        SusceptibilityModel(big_gamma=-1.0).fit()


def test_check_complex_array():
    assert check_complex_array([[1, 2j]], 2).dtype == complex
    with pytest.raises(ValueError):
        check_complex_array(np.zeros((0, 2)), 2)
    with pytest.raises(ValueError):
        check_complex_array([1, 2], 2)


def test_cloning_propagator_matches_propagate():
    grid = TransverseGrid.square(32, 0.1)
    probe = synth_super_gaussian(grid, 150e-4, 8, 0.15)
    control = synth_hermite_gaussian(grid, 0, 0, 400e-4, 1.0)
    X = np.stack([probe.values, control.values])
    est = CloningPropagator(half_width=0.1, z_end=0.05, dz=0.01).fit(X)
    out = est.transform(X)
    ref, _ = propagate(FieldState(probe, control), MediumParams(delta1=0.005), StepConfig(dz=0.01), 0.05)
    assert out.shape == X.shape
    assert out[0].tobytes() == ref.probe.values.tobytes()
    assert out[1].tobytes() == ref.control.values.tobytes()
    snaps = est.snapshots(X, [0.0, 0.05])
    assert [s.z for s in snaps] == pytest.approx([0.0, 0.05])
    assert np.array_equal(est.fit_transform(X), out)


def test_cloning_propagator_validation():
    est = CloningPropagator(half_width=0.1, z_end=0.01)
    X = np.ones((2, 16, 16))
    with pytest.raises(NotFittedError):
        est.transform(X)
    est.fit(X)
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 32, 32)))
    with pytest.raises(ValueError):
        est.fit(np.ones((3, 16, 16)))
    with pytest.raises(ValueError):
        CloningPropagator(scheme="euler").fit(X)
    assert clone(est).get_params()["z_end"] == 0.01
