"""Curvature power spectra: ensemble estimates, analytic collapse corrections,
and spectral-index fits.

The Monte-Carlo estimator uses the dispersion of the stochastic means at the
end of the run,

    P(k) = k^3 / (2 pi^2) * Var[zbar(eta_end)]        (unbiased variance)

with the standard error of a Gaussian sample variance,
p_err = sqrt(2 / (n - 1)) * P.  With gamma = 0 every mean stays exactly zero
and the estimate vanishes identically; the standard (quantum) spectrum is the
width term k^3 / (2 pi^2) / (4 z^2 Re Omega), exposed here as `standard_spectrum`.

The analytic collapse correction is a power law in the two dimensionless
groups frozen at the end of inflation,

    P = P_std [1 + o1 (gamma / m0^2) rho eps1 (r_c H)^a (k |eta_end|)^b]

with (a, b) = (0, -1) when the localization scale is crossed during inflation
and (-9, -10) when it is crossed afterwards (radiation era).  o1 is an
order-one prefactor left as a knob.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .background import BackgroundModel
from .csl import CollapseSpec, EnsembleResult
from .modes import evolve_omega

REGIME_EXPONENTS = {
    "inflation_crossing": (0.0, -1.0),
    "radiation_crossing": (-9.0, -10.0),
}


@dataclass(frozen=True)
class SpectrumTable:
    """Monte-Carlo spectrum estimate over a set of modes."""

    k: np.ndarray
    p: np.ndarray
    p_err: np.ndarray
    n_traj: np.ndarray


@dataclass(frozen=True)
class AnalyticSpectrum:
    """Standard spectrum and collapse-corrected spectrum on a k grid."""

    k: np.ndarray
    p_std: np.ndarray
    p_csl: np.ndarray
    correction: np.ndarray
    regime: str


def estimate_point(k: float, zbar_final: np.ndarray) -> tuple[float, float]:
    """Spectrum estimate and its standard error from one mode's ensemble."""
    zb = np.asarray(zbar_final, dtype=float)
    n = zb.size
    if n < 2:
        raise ValueError("need at least 2 trajectories to estimate a variance")
    var = float(np.var(zb, ddof=1))
    p = k ** 3 / (2.0 * np.pi ** 2) * var
    return p, np.sqrt(2.0 / (n - 1)) * p


def estimate_spectrum(ensembles: Sequence[EnsembleResult]) -> SpectrumTable:
    """Assemble the Monte-Carlo spectrum from per-mode ensembles."""
    if len(ensembles) == 0:
        raise ValueError("no ensembles given")
    ks, ps, errs, ns = [], [], [], []
    for ens in ensembles:
        p, err = estimate_point(ens.k, ens.zbar_final)
        ks.append(ens.k)
        ps.append(p)
        errs.append(err)
        ns.append(ens.n_traj)
    order = np.argsort(ks)
    return SpectrumTable(k=np.asarray(ks)[order], p=np.asarray(ps)[order],
                         p_err=np.asarray(errs)[order],
                         n_traj=np.asarray(ns, dtype=int)[order])


def standard_spectrum(bg: BackgroundModel, k: Iterable[float],
                      points_per_decade: int = 64) -> np.ndarray:
    """Collapse-free curvature spectrum at eta_end, one mode at a time."""
    out = []
    for kk in np.atleast_1d(np.asarray(k, dtype=float)):
        om = evolve_omega(bg, float(kk), points_per_decade=points_per_decade)
        z_end = float(np.asarray(bg.z_of(bg.eta_end)))
        if z_end <= 0.0:
            raise ValueError("spectrum undefined for z = 0 (eps1 = 0)")
        re = float(np.real(om.omega[-1]))
        out.append(kk ** 3 / (2.0 * np.pi ** 2) / (4.0 * z_end ** 2 * re))
    return np.asarray(out)


def analytic_csl_spectrum(bg: BackgroundModel, spec: CollapseSpec,
                          k: Iterable[float], rho_end: float,
                          o1_prefactor: float = 1.0,
                          regime: str = "inflation_crossing",
                          p_std: np.ndarray | None = None
                          ) -> AnalyticSpectrum:
    """Analytic collapse-corrected spectrum on a k grid.

    `p_std` short-circuits the mode integration when the caller already has
    the standard spectrum on the same grid (the exclusion scan reuses one).
    """
    if regime not in REGIME_EXPONENTS:
        raise ValueError(f"unknown regime {regime!r}; expected one of "
                         f"{tuple(REGIME_EXPONENTS)}")
    if rho_end < 0.0:
        raise ValueError(f"rho_end must be >= 0, got {rho_end}")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0.0):
        raise ValueError("k grid must be positive")
    corr = collapse_correction(bg, spec.gamma, spec.m0, spec.r_c, k, rho_end,
                               o1_prefactor, regime)
    if p_std is None:
        p_std = standard_spectrum(bg, k)
    p_std = np.asarray(p_std, dtype=float)
    if p_std.shape != k.shape:
        raise ValueError("p_std grid does not match k grid")
    return AnalyticSpectrum(k=k, p_std=p_std, p_csl=p_std * (1.0 + corr),
                            correction=corr, regime=regime)


def collapse_correction(bg: BackgroundModel, gamma: float, m0: float,
                        r_c: float, k, rho_end: float,
                        o1_prefactor: float = 1.0,
                        regime: str = "inflation_crossing") -> np.ndarray:
    """Relative collapse correction (the bracket minus one)."""
    expo_a, expo_b = REGIME_EXPONENTS[regime]
    k = np.asarray(k, dtype=float)
    rc_over_lh = r_c * bg.hubble
    k_over_ah = k * (-bg.eta_end)
    amp = o1_prefactor * (gamma / m0 ** 2) * rho_end * bg.eps1
    return amp * rc_over_lh ** expo_a * k_over_ah ** expo_b


def fit_power_law(x: np.ndarray, y: np.ndarray,
                  y_err: np.ndarray | None = None
                  ) -> tuple[float, float, float]:
    """Weighted least-squares fit of ln y = slope ln x + intercept.

    Returns (slope, intercept, slope_err).  y_err, when given, holds the
    standard errors of y itself; without it the slope error is residual-based
    (and zero for an exact power law).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need matching x, y with at least 2 points")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("power-law fit needs positive x and y")
    lx = np.log(x)
    ly = np.log(y)
    if y_err is not None:
        sig = np.asarray(y_err, dtype=float) / y  # d(ln y)
        if np.any(sig <= 0.0):
            raise ValueError("y_err must be positive")
        w = 1.0 / sig ** 2
    else:
        w = np.ones_like(ly)
    sw = np.sum(w)
    mx = np.sum(w * lx) / sw
    my = np.sum(w * ly) / sw
    sxx = np.sum(w * (lx - mx) ** 2)
    slope = np.sum(w * (lx - mx) * (ly - my)) / sxx
    intercept = my - slope * mx
    if y_err is not None:
        slope_err = np.sqrt(1.0 / sxx)
    else:
        resid = ly - (intercept + slope * lx)
        dof = max(x.size - 2, 1)
        slope_err = np.sqrt(np.sum(resid ** 2) / dof / sxx)
    return float(slope), float(intercept), float(slope_err)


def fit_spectral_index(k: np.ndarray, p: np.ndarray,
                       p_err: np.ndarray | None = None
                       ) -> tuple[float, float]:
    """Spectral index n_s = 1 + d ln P / d ln k from a log-log fit."""
    slope, _, err = fit_power_law(k, p, p_err)
    return 1.0 + slope, err
