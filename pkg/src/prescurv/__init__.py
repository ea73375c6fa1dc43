"""Prescribed curvature flow for space-like graphs in Lorentzian warped products."""

from .ambient import ConformalFactor, Warp, WarpedAmbient, kappa_bar
from .curvfun import GaussK, InvSigmaK, Normalized, Power, Product, SigmaK, ElemSym, classify, parse_family
from .errors import (
    ConeViolation,
    ConfigError,
    ConvexityLost,
    DomainError,
    FlowAbort,
    LeftBarriers,
    PrescurvError,
    SpacelikeLost,
    UnsupportedConfiguration,
)
from .flow import BarrierPair, FlowConfig, FlowReport, Phi, Prescription, run, validate_barriers
from .hypersurface import GraphState, PeriodicGrid, geometry

__version__ = "0.1.0"

__all__ = [
    "ConformalFactor", "Warp", "WarpedAmbient", "kappa_bar",
    "GaussK", "InvSigmaK", "Normalized", "Power", "Product", "SigmaK", "ElemSym", "classify", "parse_family",
    "ConeViolation", "ConfigError", "ConvexityLost", "DomainError", "FlowAbort", "LeftBarriers",
    "PrescurvError", "SpacelikeLost", "UnsupportedConfiguration",
    "BarrierPair", "FlowConfig", "FlowReport", "Phi", "Prescription", "run", "validate_barriers",
    "GraphState", "PeriodicGrid", "geometry",
]
