"""Sparse kernel regression for locally stationary time series with heavy-tailed noise."""
from . import bounds, design, dgp, experiments, kernels, noise, penalty, solver

__all__ = ["bounds", "design", "dgp", "experiments", "kernels", "noise", "penalty", "solver"]
__version__ = "0.1.0"
