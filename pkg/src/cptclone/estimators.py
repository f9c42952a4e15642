"""scikit-learn style wrappers around the medium model and the propagator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .beams import ComplexField, TransverseGrid
from .medium import MediumParams, susceptibility
from .propagator import Absorber, FieldState, SnapshotPlan, StepConfig, propagate


def check_complex_array(X, ndim: int, name: str = "X") -> np.ndarray:
    """Like ``check_array`` but keeps complex dtype (sklearn rejects it)."""
    X = np.asarray(X)
    if X.dtype == object:
        raise ValueError(f"{name} must be numeric")
    X = X.astype(complex, copy=False)
    if X.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {X.shape}")
    if X.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinity")
    return X


class _MediumMixin:
    def _medium(self) -> MediumParams:
        return MediumParams(
            big_gamma=self.big_gamma,
            delta1=self.delta1,
            delta2=self.delta2,
            density=self.density,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            kappa1=self.kappa1,
            kappa2=self.kappa2,
        )


class SusceptibilityModel(_MediumMixin, BaseEstimator):
    """Maps local Rabi amplitudes ``X[:, 0] = g``, ``X[:, 1] = G`` to ``[c31, c32]`` (cm^-1).

    ``fit`` only validates the parameters; the model has nothing to learn.
    """

    def __init__(self, big_gamma=0.001, delta1=0.0, delta2=0.0, density=5e11, lambda1=795e-7, lambda2=795e-7, kappa1=None, kappa2=None):
        self.big_gamma = big_gamma
        self.delta1 = delta1
        self.delta2 = delta2
        self.density = density
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.kappa1 = kappa1
        self.kappa2 = kappa2

    def fit(self, X=None, y=None):
        self.params_ = self._medium()
        if X is not None:
            self.n_features_in_ = check_complex_array(X, 2).shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        X = check_complex_array(X, 2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (g, G), got {X.shape[1]}")
        chi = susceptibility(self.params_, X[:, 0], X[:, 1])
        return np.column_stack([chi.c31, chi.c32])


class CloningPropagator(_MediumMixin, TransformerMixin, BaseEstimator):
    """Propagates ``X = [probe, control]`` (shape ``(2, ny, nx)``) through the medium.

    ``fit`` fixes the transverse grid from ``X``'s shape and ``half_width``;
    ``transform`` returns the fields at ``z_end`` in the same layout.
    """

    def __init__(
        self,
        big_gamma=0.001,
        delta1=0.005,
        delta2=0.0,
        density=5e11,
        lambda1=795e-7,
        lambda2=795e-7,
        kappa1=None,
        kappa2=None,
        half_width=0.2,
        z_end=4.0,
        dz=10e-4,
        scheme="strang2",
        mode="predictor-corrector",
        absorber_width=0.1,
        absorber_strength=200.0,
    ):
        self.big_gamma = big_gamma
        self.delta1 = delta1
        self.delta2 = delta2
        self.density = density
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.kappa1 = kappa1
        self.kappa2 = kappa2
        self.half_width = half_width
        self.z_end = z_end
        self.dz = dz
        self.scheme = scheme
        self.mode = mode
        self.absorber_width = absorber_width
        self.absorber_strength = absorber_strength

    def fit(self, X, y=None):
        X = self._check_fields(X)
        _, ny, nx = X.shape
        d = 2.0 * self.half_width / nx
        self.grid_ = TransverseGrid(nx, ny, d, d)
        self.params_ = self._medium()
        self.step_ = StepConfig(
            dz=self.dz,
            scheme=self.scheme,
            mode=self.mode,
            absorber=Absorber(self.absorber_width, self.absorber_strength),
        )
        return self

    def transform(self, X) -> np.ndarray:
        final, _ = self._run(X, None)
        return np.stack([final.probe.values, final.control.values])

    def snapshots(self, X, positions) -> list[FieldState]:
        """Field states recorded at (the steps nearest to) ``positions``."""
        _, snaps = self._run(X, SnapshotPlan(tuple(positions)))
        return snaps

    def _run(self, X, plan):
        if not hasattr(self, "grid_"):
            raise NotFittedError("call fit before transform")
        X = self._check_fields(X)
        if X.shape[1:] != self.grid_.shape:
            raise ValueError(f"fields of shape {X.shape[1:]} do not match the fitted grid {self.grid_.shape}")
        state = FieldState(ComplexField(self.grid_, X[0]), ComplexField(self.grid_, X[1]), 0.0)
        return propagate(state, self.params_, self.step_, self.z_end, plan)

    @staticmethod
    def _check_fields(X) -> np.ndarray:
        X = check_complex_array(X, 3)
        if X.shape[0] != 2:
            raise ValueError("X must stack exactly two fields: probe and control")
        return X
