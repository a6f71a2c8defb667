"""Peg-in-hole insertion: contact model, contact-state classifiers and
feature-based compliance control."""

from .contact import DEFAULT_QUADRATURE, Geometry, QuadratureSpec, ResponseVector, respond
from .controller import ComplianceParams, ControllerState, admittance_step, direction_matrix, fbcc_step, gamma
from .errors import ConfigError, DomainError, InconsistentWrench, PegSimError
from .geometry import FeatureVector
from .sim import Scenario, nominal_geometry, run_scenario, run_sweep
from .states import ContactState, classify_features, classify_responses

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_QUADRATURE",
    "ComplianceParams",
    "ConfigError",
    "ContactState",
    "ControllerState",
    "DomainError",
    "FeatureVector",
    "Geometry",
    "InconsistentWrench",
    "PegSimError",
    "QuadratureSpec",
    "ResponseVector",
    "Scenario",
    "admittance_step",
    "classify_features",
    "classify_responses",
    "direction_matrix",
    "fbcc_step",
    "gamma",
    "nominal_geometry",
    "respond",
    "run_scenario",
    "run_sweep",
]
