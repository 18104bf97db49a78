"""Inflationary perturbations under continuous spontaneous localization.

The package evolves single Fourier modes of the Mukhanov-Sasaki variable
on a slow-roll background, both as ordinary quantum mechanics (Bogoliubov
coefficients, squeezing parameters, Gaussian covariance) and as a collapse
model with a per-mode stochastic ensemble.  On top of the mode layer sit
power-spectrum estimators, a large-scale Sachs-Wolfe transfer, and an
exclusion scan over the collapse parameter plane.
"""

from collapsim.background import BackgroundModel, BackgroundSample
from collapsim.config import ConfigError, RunConfig, load_config, parse_config
from collapsim.csl import CollapseSpec, EnsembleResult, evolve_ensemble
from collapsim.modes import (
    BogoliubovTrajectory,
    OmegaTrajectory,
    Squeezing,
    evolve_bogoliubov,
    evolve_omega,
    squeezing_of,
)
from collapsim.spectrum import SpectrumTable, estimate_spectrum

__version__ = "0.1.0"

__all__ = [
    "BackgroundModel",
    "BackgroundSample",
    "BogoliubovTrajectory",
    "CollapseSpec",
    "ConfigError",
    "EnsembleResult",
    "OmegaTrajectory",
    "RunConfig",
    "SpectrumTable",
    "Squeezing",
    "__version__",
    "estimate_spectrum",
    "evolve_bogoliubov",
    "evolve_ensemble",
    "evolve_omega",
    "load_config",
    "parse_config",
    "squeezing_of",
]
