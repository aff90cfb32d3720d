"""Elliptic Felderhof model: lattice brute force, closed forms and a verification harness."""

from .theta import ThetaParams, EllipticPolySpec, bracket, bracket_sqrt, theta_H, quasi_period_residual
from .statespace import Configuration, SectorBasis, SectorVector, vacuum, configuration_state, inner, mixed_dual
from .lattice import ModelParams, r_weights, apply_B, apply_C, b_string, c_string

__all__ = [
    "ThetaParams",
    "EllipticPolySpec",
    "bracket",
    "bracket_sqrt",
    "theta_H",
    "quasi_period_residual",
    "Configuration",
    "SectorBasis",
    "SectorVector",
    "vacuum",
    "configuration_state",
    "inner",
    "mixed_dual",
    "ModelParams",
    "r_weights",
    "apply_B",
    "apply_C",
    "b_string",
    "c_string",
]

__version__ = "0.1.0"
