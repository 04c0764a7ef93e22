"""Phase-space (Wigner) measurement of optical beams with a Sagnac interferometer.

The package pairs a direct quadrature of the Wigner integral with a
simulation of the interferometric measurement, so the two can be checked
against each other, and adds photon-counting statistics, a two-beam
coherence fit and a two-photon CHSH test built on joint parity.
"""
from .analysis import TwoBeamModel, fit_two_beam, fringe_frequency, initial_model, model_wigner
from .entangle import JointField, chsh, make_epr, parity_correlation, product_state
from .errors import (
    AnalysisError,
    ConfigError,
    InvalidParam,
    PhysicsError,
    SagnacWignerError,
)
from .field import (
    Ensemble,
    Field1D,
    Grid1D,
    make_gaussian,
    make_hermite_gauss,
    make_partially_coherent_pair,
    propagate_fresnel,
    wedge_beam,
)
from .photons import estimate_wigner, photon_scan
from .sagnac import InterferometerConfig, MirrorSetting, reconstruct_wigner, run_scan
from .wigner import WignerMap, covariance_moments, shear_compensate, wigner_map, wigner_point

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "ConfigError",
    "Ensemble",
    "Field1D",
    "Grid1D",
    "InterferometerConfig",
    "InvalidParam",
    "JointField",
    "MirrorSetting",
    "PhysicsError",
    "SagnacWignerError",
    "TwoBeamModel",
    "WignerMap",
    "chsh",
    "covariance_moments",
    "estimate_wigner",
    "fit_two_beam",
    "fringe_frequency",
    "initial_model",
    "make_epr",
    "make_gaussian",
    "make_hermite_gauss",
    "make_partially_coherent_pair",
    "model_wigner",
    "parity_correlation",
    "photon_scan",
    "product_state",
    "propagate_fresnel",
    "reconstruct_wigner",
    "run_scan",
    "shear_compensate",
    "wedge_beam",
    "wigner_map",
    "wigner_point",
]
