"""Shared fixtures and closed-form oracles.

The oracles here are written from scratch against the textbook solutions,
not against the package internals: the mode tests compare the integrators
to the exact de Sitter mode function, and the covariance tests compare the
linear-form evolution to a direct integration of the Riccati equation.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from collapsim.background import BackgroundModel


@pytest.fixture(scope="session")
def bg_desk() -> BackgroundModel:
    """Desk-scale slow-roll window used throughout the suite."""
    return BackgroundModel(h_star=1e-5, eps1=0.01, eta_ini=-40.0,
                           eta_end=-0.005)


@pytest.fixture(scope="session")
def bg_flat() -> BackgroundModel:
    """Minkowski hook: a = z = 1, all expansion rates zero."""
    return BackgroundModel(h_star=1.0, eps1=0.5, eta_ini=-10.05,
                           eta_end=-0.05, flat=True)


def ds_basis(k: float, eta):
    """de Sitter basis solution f_+ = (1 - i/(k eta)) e^{-ik eta} and f_+'.

    f_+ solves f'' + (k^2 - 2/eta^2) f = 0; the second solution is its
    complex conjugate (real eta, real k).
    """
    eta = np.asarray(eta, dtype=float)
    e = np.exp(-1j * k * eta)
    f = (1.0 - 1j / (k * eta)) * e
    fp = e * (1j / (k * eta * eta) - 1j * k * (1.0 - 1j / (k * eta)))
    return f, fp


def ds_closed_f(k: float, eta0: float, eta):
    """Exact solution with f(eta0) = 1, f'(eta0) = -ik - 1/eta0.

    These are the Bunch-Davies initial data of the mode function f = u + v*
    on any background with z'/z = -1/eta and z''/z = 2/eta^2.  Returns
    (f, f') on `eta`.
    """
    f0, fp0 = ds_basis(k, eta0)
    basis = np.array([[f0, np.conj(f0)], [fp0, np.conj(fp0)]])
    coeff = np.linalg.solve(basis, np.array([1.0, -1j * k - 1.0 / eta0]))
    f, fp = ds_basis(k, eta)
    return (coeff[0] * f + coeff[1] * np.conj(f),
            coeff[0] * fp + coeff[1] * np.conj(fp))


def ds_closed_uv(k: float, eta0: float, eta):
    """Exact (u, v) from the closed-form f via u - v* = i (f' + f/eta) / k."""
    f, fp = ds_closed_f(k, eta0, eta)
    h = 1j * (fp + f / eta) / k
    return 0.5 * (f + h), np.conj(0.5 * (f - h))


def riccati_omega(bg: BackgroundModel, k: float, eta: np.ndarray,
                  collapse_rate=None) -> np.ndarray:
    """Direct integration of the covariance Riccati equation.

    Omega' = -2i Omega^2 + i omega^2 / 2 + lambda_c, the form the package
    deliberately avoids in production (pole-prone); it is exact as long as
    F has no zero on the window, which makes it the natural oracle.
    """
    g = 0.5 * bg.eval(float(eta[0])).zp_z
    y0 = [0.5 * k, -g]

    def rhs(t, y):
        om = y[0] + 1j * y[1]
        lam = collapse_rate(t) if collapse_rate is not None else 0.0
        d = -2j * om * om + 0.5j * bg.omega_squared(k, t) + lam
        return [d.real, d.imag]

    sol = solve_ivp(rhs, (eta[0], eta[-1]), y0, t_eval=eta,
                    method="DOP853", rtol=1e-11, atol=1e-13)
    assert sol.success, sol.message
    return sol.y[0] + 1j * sol.y[1]
