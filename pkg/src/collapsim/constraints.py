"""Exclusion of collapse-parameter space from the spectral index.

The scan works in the conventional (r_c, lambda) plane, where lambda is the
localization rate related to the raw coupling by

    lambda = gamma / (8 pi^(3/2) r_c^3).

For each grid cell the analytic collapse correction tilts the spectrum over
a k window around the pivot; the induced spectral-index shift delta_ns is
the log-log slope of 1 + correction(k) (the standard spectrum is exactly
scale-invariant for this background, so the shift is the whole story).  A
cell is excluded when |delta_ns| exceeds n_sigma observational standard
deviations.

The regime switches with the localization scale: modes cross r_c during
inflation while the comoving r_c is below 1/k_pivot at eta_end, i.e. for
r_c < a(eta_end) / k_pivot; larger r_c is only crossed afterwards
(radiation era), with much steeper exponents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import BackgroundModel
from .spectrum import collapse_correction, fit_power_law

_SQRT_PI3 = 8.0 * np.pi ** 1.5


def lambda_from_gamma(gamma: float, r_c: float) -> float:
    """Localization rate lambda from the raw coupling gamma."""
    if not r_c > 0.0:
        raise ValueError(f"r_c must be > 0, got {r_c}")
    return gamma / (_SQRT_PI3 * r_c ** 3)


def gamma_from_lambda(lam: float, r_c: float) -> float:
    """Raw coupling gamma from the localization rate lambda."""
    if not r_c > 0.0:
        raise ValueError(f"r_c must be > 0, got {r_c}")
    return lam * _SQRT_PI3 * r_c ** 3


def select_regime(bg: BackgroundModel, k_pivot: float, r_c: float) -> str:
    """Crossing regime of the pivot mode for localization scale r_c."""
    if not k_pivot > 0.0:
        raise ValueError(f"k_pivot must be > 0, got {k_pivot}")
    if not r_c > 0.0:
        raise ValueError(f"r_c must be > 0, got {r_c}")
    rc_star = float(np.asarray(bg.scale_factor(bg.eta_end))) / k_pivot
    return "inflation_crossing" if r_c < rc_star else "radiation_crossing"


def k_window(k_pivot: float, window_decades: float = 2.0,
             window_points: int = 8) -> np.ndarray:
    """Log-spaced k window centered on the pivot."""
    if window_points < 2:
        raise ValueError("window needs at least 2 points")
    half = window_decades / 2.0
    return k_pivot * np.logspace(-half, half, window_points)


def delta_ns_of(bg: BackgroundModel, gamma: float, m0: float, r_c: float,
                rho_end: float, k_pivot: float,
                o1_prefactor: float = 1.0,
                window_decades: float = 2.0,
                window_points: int = 8,
                regime: str | None = None) -> float:
    """Spectral-index shift induced by the collapse correction."""
    if regime is None:
        regime = select_regime(bg, k_pivot, r_c)
    k = k_window(k_pivot, window_decades, window_points)
    corr = collapse_correction(bg, gamma, m0, r_c, k, rho_end,
                               o1_prefactor, regime)
    slope, _, _ = fit_power_law(k, 1.0 + corr)
    return slope


@dataclass(frozen=True)
class ExclusionMap:
    """Grid scan of the (r_c, lambda) plane."""

    r_c: np.ndarray          # (n_rc,)
    lam: np.ndarray          # (n_lam,)
    delta_ns: np.ndarray     # (n_rc, n_lam)
    regime: np.ndarray       # (n_rc,) strings
    excluded: np.ndarray     # (n_rc, n_lam) bool
    threshold: float
    k_pivot: float


def exclusion_scan(bg: BackgroundModel, m0: float, rho_end: float,
                   k_pivot: float,
                   rc_grid: np.ndarray, lambda_grid: np.ndarray,
                   o1_prefactor: float = 1.0,
                   n_sigma: float = 3.0,
                   sigma_ns: float = 0.0042,
                   window_decades: float = 2.0,
                   window_points: int = 8) -> ExclusionMap:
    """Map |delta_ns| > n_sigma * sigma_ns over an (r_c, lambda) grid.

    Pure function of its inputs: same grids, same map.
    """
    rc_grid = np.asarray(rc_grid, dtype=float)
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if np.any(rc_grid <= 0.0):
        raise ValueError("r_c grid must be positive")
    if np.any(lambda_grid < 0.0):
        raise ValueError("lambda grid must be >= 0")
    if not m0 > 0.0:
        raise ValueError(f"m0 must be > 0, got {m0}")
    threshold = n_sigma * sigma_ns
    delta = np.empty((rc_grid.size, lambda_grid.size))
    regimes = np.empty(rc_grid.size, dtype=object)
    for i, rc in enumerate(rc_grid):
        regime = select_regime(bg, k_pivot, rc)
        regimes[i] = regime
        for j, lam in enumerate(lambda_grid):
            gamma = gamma_from_lambda(lam, rc)
            delta[i, j] = delta_ns_of(
                bg, gamma, m0, rc, rho_end, k_pivot, o1_prefactor,
                window_decades, window_points, regime=regime)
    excluded = np.abs(delta) > threshold
    return ExclusionMap(r_c=rc_grid, lam=lambda_grid, delta_ns=delta,
                        regime=regimes.astype(str), excluded=excluded,
                        threshold=threshold, k_pivot=k_pivot)
