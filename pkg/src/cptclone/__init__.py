"""Cloning of transverse images between two beams by coherent population trapping."""

from .analysis import (
    BeamMetrics,
    beam_metrics,
    cloning_fidelity,
    feature_size_ratio,
    rayleigh_length,
    transmission,
)
from .beams import (
    ComplexField,
    HermiteGaussian,
    ImageBeam,
    PlaneWave,
    SuperGaussian,
    TransverseGrid,
    hermite,
    synth_from_image,
    synth_hermite_gaussian,
    synth_plane_wave,
    synth_super_gaussian,
)
from .estimators import CloningPropagator, SusceptibilityModel
from .medium import (
    FieldPoint,
    MediumParams,
    NonUniqueSteadyState,
    SteadyStateDM,
    SusceptibilityPair,
    reduced_numerators,
    steady_state_oracle,
    susceptibility,
)
from .propagator import (
    Absorber,
    FieldState,
    SnapshotPlan,
    StepConfig,
    diffraction_step,
    medium_step,
    propagate,
    step,
)

__version__ = "0.1.0"
