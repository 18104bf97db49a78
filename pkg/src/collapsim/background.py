"""Quasi-de Sitter background in conformal time.

Closed-form slow-roll background with constant first slow-roll parameter:

    a(eta) = -1 / [H_star * eta * (1 - eps1)],   eta < 0

which gives a'/a = z'/z = -1/eta and z''/z = 2/eta^2 exactly for every eps1
in [0, 1), with z = a * sqrt(2 eps1) and constant physical Hubble rate
H = H_star * (1 - eps1).  Everything downstream (mode equations, collapse
strengths, crossing times) consumes this module through `eval`, so the
analytic simplicity is deliberate: it keeps oracles closed-form without
constraining the k- or gamma-dependence under study.

Key functions:
  * BackgroundModel.eval      -- a, z, z'/z, z''/z, aH at one time
  * omega_squared             -- k^2 - z''/z for the mode equation
  * rc_crossing_time          -- when the comoving smoothing scale crosses a/k
  * rho_planck_to_cgs         -- reduced-Planck density to g/cm^3

Design choices:
  * Conformal times are strictly negative (inflation ends toward eta -> 0-);
    eval raises on times outside [eta_ini, eta_end].
  * eps1 = 0 (exact de Sitter) is allowed so mode-function tests can use the
    closed-form limit, but then z = 0 and curvature spectra are undefined;
    stochastic runs require eps1 > 0 and validate it at config level.
  * `flat=True` is a test hook: Minkowski background (a = z = 1, all
    derivative ratios zero) so free-field limits are exact.
  * Wavelength convention: a mode k "crosses" a length scale L when
    a/k = L (no 2 pi).  Recorded in output metadata by the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _const


@dataclass(frozen=True)
class BackgroundSample:
    """Background quantities at a single conformal time."""

    eta: float
    a: float        # scale factor
    z: float        # a * sqrt(2 eps1); 0 when eps1 = 0
    zp_z: float     # z'/z
    zpp_z: float    # z''/z
    ah: float       # comoving Hubble rate a'/a (= aH)


@dataclass(frozen=True)
class BackgroundModel:
    """Quasi-de Sitter background on a fixed conformal-time window.

    Parameters
    ----------
    h_star : float
        Hubble scale parameter, > 0 (reduced Planck units).
    eps1 : float
        First slow-roll parameter, in [0, 1).
    eta_ini, eta_end : float
        Conformal-time window, eta_ini < eta_end < 0.
    flat : bool
        Minkowski test hook; when True the scale factor is frozen at 1.
    """

    h_star: float
    eps1: float
    eta_ini: float
    eta_end: float
    flat: bool = False

    def __post_init__(self) -> None:
        if not self.h_star > 0.0:
            raise ValueError(f"h_star must be > 0, got {self.h_star}")
        if not 0.0 <= self.eps1 < 1.0:
            raise ValueError(f"eps1 must lie in [0, 1), got {self.eps1}")
        if not (self.eta_ini < self.eta_end < 0.0):
            raise ValueError(
                "conformal window must satisfy eta_ini < eta_end < 0, got "
                f"[{self.eta_ini}, {self.eta_end}]"
            )

    @property
    def hubble(self) -> float:
        """Physical Hubble rate, constant for this background."""
        if self.flat:
            return 0.0
        return self.h_star * (1.0 - self.eps1)

    def _check_eta(self, eta) -> None:
        # adaptive integrators may graze the endpoints by a few ulps when
        # evaluating internal stages; allow a relative slack (still < 0)
        lo = self.eta_ini - 1e-12 * abs(self.eta_ini)
        hi = self.eta_end + 1e-12 * abs(self.eta_end)
        if np.any(eta < lo) or np.any(eta > hi):
            raise ValueError(
                f"eta = {eta} outside background window "
                f"[{self.eta_ini}, {self.eta_end}]"
            )

    def scale_factor(self, eta):
        """Scale factor a(eta); accepts scalars or arrays."""
        eta = np.asarray(eta, dtype=float)
        self._check_eta(eta)
        if self.flat:
            a = np.ones_like(eta)
        else:
            a = -1.0 / (self.h_star * eta * (1.0 - self.eps1))
        return a if a.ndim else float(a)

    def z_of(self, eta):
        """Mukhanov variable normalization z(eta); scalars or arrays."""
        if self.flat:
            a = self.scale_factor(eta)
            return a  # z = 1 on the flat hook
        return self.scale_factor(eta) * np.sqrt(2.0 * self.eps1)

    def eval(self, eta: float) -> BackgroundSample:
        """Sample a, z, z'/z, z''/z, aH at conformal time eta."""
        self._check_eta(eta)
        if self.flat:
            return BackgroundSample(eta=eta, a=1.0, z=1.0,
                                    zp_z=0.0, zpp_z=0.0, ah=0.0)
        a = -1.0 / (self.h_star * eta * (1.0 - self.eps1))
        z = a * np.sqrt(2.0 * self.eps1)
        # a ~ -1/eta  =>  a'/a = z'/z = -1/eta, z''/z = 2/eta^2, exactly.
        inv = -1.0 / eta
        return BackgroundSample(eta=eta, a=a, z=z,
                                zp_z=inv, zpp_z=2.0 / eta**2, ah=inv)

    def omega_squared(self, k: float, eta: float) -> float:
        """Mode-equation frequency k^2 - z''/z."""
        if not k > 0.0:
            raise ValueError(f"k must be > 0, got {k}")
        return k * k - self.eval(eta).zpp_z

    def rc_crossing_time(self, k: float, r_c: float) -> float | None:
        """Conformal time at which a/k = r_c, or None if outside the window.

        The physical wavelength a/k grows during inflation, so for each k
        the scale r_c is crossed at most once:
        eta_c = -1 / (h_star (1 - eps1) k r_c).
        """
        if not k > 0.0:
            raise ValueError(f"k must be > 0, got {k}")
        if not r_c > 0.0:
            raise ValueError(f"r_c must be > 0, got {r_c}")
        if self.flat:
            return None
        eta_c = -1.0 / (self.h_star * (1.0 - self.eps1) * k * r_c)
        if self.eta_ini <= eta_c <= self.eta_end:
            return eta_c
        return None


def rho_planck_to_cgs(rho: float) -> float:
    """Convert an energy density from reduced Planck units to g/cm^3.

    The reduced Planck density is m_pl^4 in natural units, i.e.
    m_pl / l_pl^3 as a mass density with m_pl = sqrt(hbar c / (8 pi G))
    and l_pl = hbar / (m_pl c).
    """
    m_pl = np.sqrt(_const.hbar * _const.c / (8.0 * np.pi * _const.G))
    l_pl = _const.hbar / (m_pl * _const.c)
    unit_kg_m3 = m_pl / l_pl**3
    return rho * unit_kg_m3 * 1e-3  # kg/m^3 -> g/cm^3
