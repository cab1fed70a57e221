"""Diversity-multiplexing tradeoff of the dynamic decode-and-forward relay protocol."""

from .curves import PiecewiseLinearCurve, evaluate, pointwise_min, ptp_dmt
from .exponents import AntennaConfig, ExponentPoint
from .optimizer import SolverSettings, d_hat, ddf_curve, ddf_dmt

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig",
    "ExponentPoint",
    "PiecewiseLinearCurve",
    "SolverSettings",
    "d_hat",
    "ddf_curve",
    "ddf_dmt",
    "evaluate",
    "pointwise_min",
    "ptp_dmt",
    "__version__",
]
