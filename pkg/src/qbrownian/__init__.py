"""Solvers for semiclassical and nonlinear quantum Brownian motion.

Phase-space (Klein-Kramers) and position-space (Smoluchowski) marching
schemes, closed-form and implicit dispersion laws, information
functionals, and the self-similar reduction of the enhanced nonlinear
dispersion law, with a CLI that emits CSV and SVG.
"""

from .core import (
    DensityProfile,
    DispersionCurve,
    DomainError,
    IntegrityError,
    PhysicalParams,
    Potential,
    ReferenceDensity,
    SpatialGrid,
    StabilityError,
    WignerField,
    derive_params,
    marginal_p,
    marginal_x,
    moments,
)
from .dispersion import DispersionLaw, LAW_NAMES, lambert_w_minus1
from .automodel import AutomodelSolution, ShootingFailure, figure1_curves, shoot
from .smoluchowski import SmoluchowskiModel, run
from .kleinkramers import KramersModel, run_kk, stationarity_residual

__version__ = "1.0.0"

__all__ = [
    "AutomodelSolution",
    "DensityProfile",
    "DispersionCurve",
    "DispersionLaw",
    "DomainError",
    "IntegrityError",
    "KramersModel",
    "LAW_NAMES",
    "PhysicalParams",
    "Potential",
    "ReferenceDensity",
    "ShootingFailure",
    "SmoluchowskiModel",
    "SpatialGrid",
    "StabilityError",
    "WignerField",
    "derive_params",
    "figure1_curves",
    "lambert_w_minus1",
    "marginal_p",
    "marginal_x",
    "moments",
    "run",
    "run_kk",
    "shoot",
    "stationarity_residual",
]
