"""Spot and integrated volatility estimation from noisy high-frequency
observations via localized trigonometric block statistics, plus the numeric
experiments that verify the estimator's efficiency claims."""

from . import equivalence, estimators, fisher, harness, simulate, spectral, volmodel
from ._kernels import active_backend
from .volmodel import Constant, Oscillating, PiecewiseConstant, Sinusoid

__all__ = [
    "Constant",
    "PiecewiseConstant",
    "Sinusoid",
    "Oscillating",
    "active_backend",
    "volmodel",
    "simulate",
    "spectral",
    "estimators",
    "fisher",
    "equivalence",
    "harness",
]

__version__ = "0.1.0"
