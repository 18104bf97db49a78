"""Linear quantum evolution of a single Fourier mode.

Evolves the Bogoliubov pair (u, v) of the curvature variable x = z*zeta from
Bunch-Davies initial data, extracts squeezing parameters, and advances the
Gaussian wave-function covariance Omega.  Everything here is gamma = 0
physics; the stochastic collapse dynamics build on top (see `csl`).

Equations (conformal time, prime = d/deta):

    i u' = k u + i (z'/z) v*          u(eta_ini) = 1
    i v' = k v + i (z'/z) u*          v(eta_ini) = 0

so f = u + v* solves f'' + (k^2 - z''/z) f = 0 with f(eta_ini) = 1 and
f'(eta_ini) = -ik + (z'/z)(eta_ini).  |u|^2 - |v|^2 = 1 is conserved and is
the standing accuracy check.

The covariance is advanced through the linear form Omega = -(i/2) F'/F with
F = f* rather than through its Riccati equation, which develops poles where
F passes near zero; the Riccati form survives only as a test oracle.  Since
the Wronskian of the F equation is conserved, Re Omega = k / (2 |f|^2) > 0
holds identically, and Omega(eta_ini) = k/2 - (i/2)(z'/z)(eta_ini): the real
part is exactly k/2, the imaginary part is the expansion-coupling cross term
of the initial Gaussian (it vanishes in the Minkowski hook).

Squeezing convention:

    u = e^{-i theta} cosh r,   v = -i e^{i(theta + 2 phi)} sinh r

with r >= 0, phi in (-pi/2, pi/2] (2 phi enters the wave function, so phi is
defined mod pi) and phi = 0 when v = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .background import BackgroundModel

_RTOL = 3e-11
_ATOL = 1e-13


def eta_log_grid(eta_ini: float, eta_end: float,
                 points_per_decade: int = 64) -> np.ndarray:
    """Conformal-time nodes logarithmically spaced in |eta|, endpoints exact."""
    if not (eta_ini < eta_end < 0.0):
        raise ValueError(f"need eta_ini < eta_end < 0, got [{eta_ini}, {eta_end}]")
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be >= 1")
    decades = np.log10(eta_ini / eta_end)
    n_nodes = int(np.ceil(points_per_decade * decades)) + 1
    n_nodes = max(n_nodes, 2)
    grid = -np.logspace(np.log10(-eta_ini), np.log10(-eta_end), n_nodes)
    grid[0] = eta_ini
    grid[-1] = eta_end
    return grid


@dataclass(frozen=True)
class BogoliubovTrajectory:
    """(u, v) along a time grid for one comoving wavenumber."""

    k: float
    eta: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def f(self) -> np.ndarray:
        """Mode function u + v* of x = z*zeta."""
        return self.u + np.conj(self.v)

    def wronskian_error(self) -> np.ndarray:
        """|u|^2 - |v|^2 - 1, zero for exact evolution."""
        return np.abs(self.u) ** 2 - np.abs(self.v) ** 2 - 1.0


@dataclass(frozen=True)
class Squeezing:
    """Squeezing parameters (r, phi, theta) with the module's phase convention."""

    r: np.ndarray
    phi: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class OmegaTrajectory:
    """Gaussian covariance Omega(eta) for one wavenumber."""

    k: float
    eta: np.ndarray
    omega: np.ndarray


def evolve_bogoliubov(bg: BackgroundModel, k: float,
                      eta: np.ndarray | None = None,
                      points_per_decade: int = 64) -> BogoliubovTrajectory:
    """Integrate (u, v) from Bunch-Davies data over the background window."""
    if not k > 0.0:
        raise ValueError(f"k must be > 0, got {k}")
    if eta is None:
        eta = eta_log_grid(bg.eta_ini, bg.eta_end, points_per_decade)
    eta = np.asarray(eta, dtype=float)
    _check_grid(bg, eta)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        zp_z = bg.eval(t).zp_z
        u, v = y
        return np.array([-1j * k * u + zp_z * np.conj(v),
                         -1j * k * v + zp_z * np.conj(u)])

    y0 = np.array([1.0 + 0.0j, 0.0 + 0.0j])
    sol = solve_ivp(rhs, (eta[0], eta[-1]), y0, t_eval=eta,
                    method="DOP853", rtol=_RTOL, atol=_ATOL)
    if not sol.success:
        raise RuntimeError(f"mode integration failed: {sol.message}")
    return BogoliubovTrajectory(k=k, eta=eta, u=sol.y[0], v=sol.y[1])


def squeezing_of(u: np.ndarray, v: np.ndarray) -> Squeezing:
    """Extract (r, phi, theta) from a Bogoliubov pair.

    phi is defined mod pi (only 2 phi is physical) and reduced to
    (-pi/2, pi/2]; it is set to 0 wherever v = 0, where the convention is
    degenerate.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    r = np.arcsinh(np.abs(v))
    theta = -np.angle(u)
    phi_raw = 0.5 * (np.angle(v) - theta - 1.5 * np.pi)
    # reduce mod pi into the half-open interval (-pi/2, pi/2]
    phi = np.pi / 2 - np.mod(np.pi / 2 - phi_raw, np.pi)
    phi = np.where(v == 0, 0.0, phi)
    if np.ndim(r) == 0:
        return Squeezing(r=float(r), phi=float(phi), theta=float(theta))
    return Squeezing(r=r, phi=phi, theta=theta)


def reconstruct_uv(sq: Squeezing) -> tuple[np.ndarray, np.ndarray]:
    """Invert `squeezing_of`: (r, phi, theta) -> (u, v)."""
    r, phi, theta = np.asarray(sq.r), np.asarray(sq.phi), np.asarray(sq.theta)
    u = np.exp(-1j * theta) * np.cosh(r)
    v = -1j * np.exp(1j * (theta + 2.0 * phi)) * np.sinh(r)
    return u, v


def omega_from_f(k: float, f: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Covariance from a mode function: Omega = -(i/2) (f*)'/(f*)."""
    return -0.5j * np.conj(fp) / np.conj(f)


def evolve_omega(bg: BackgroundModel, k: float,
                 eta: np.ndarray | None = None,
                 points_per_decade: int = 64,
                 collapse_rate: Callable[[np.ndarray], np.ndarray] | None = None,
                 ) -> OmegaTrajectory:
    """Advance the Gaussian covariance Omega along the window.

    Uses the linear form F'' + (omega^2 - 2i lambda_c) F = 0 with
    Omega = -(i/2) F'/F, F(eta_ini) = 1, F'(eta_ini) = 2i Omega(eta_ini).
    `collapse_rate`, when given, supplies lambda_c(eta) >= 0 (vectorized);
    it feeds the deterministic width dynamics
    Omega' = -2i Omega^2 + i omega^2/2 + lambda_c.

    F is renormalized between decade-sized segments, which leaves Omega
    invariant and keeps |F| in range for strongly collapsed runs.
    """
    if not k > 0.0:
        raise ValueError(f"k must be > 0, got {k}")
    if eta is None:
        eta = eta_log_grid(bg.eta_ini, bg.eta_end, points_per_decade)
    eta = np.asarray(eta, dtype=float)
    _check_grid(bg, eta)

    g_ini = 0.5 * bg.eval(eta[0]).zp_z
    omega0 = 0.5 * k - 1j * g_ini
    f0 = np.array([1.0 + 0.0j, 2j * omega0])

    if collapse_rate is None:
        lam = lambda t: 0.0
    else:
        lam = collapse_rate

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        w2 = bg.omega_squared(k, t)
        return np.array([y[1], -(w2 - 2j * lam(t)) * y[0]])

    omega = np.empty(eta.shape, dtype=complex)
    # segment boundaries roughly one decade apart to bound |F| drift;
    # Omega is invariant under F -> cF so the rescaling is exact
    y = f0
    for j0, j1 in _decade_segments(eta):
        sol = solve_ivp(rhs, (eta[j0], eta[j1]), y, t_eval=eta[j0:j1 + 1],
                        method="DOP853", rtol=1e-11, atol=1e-14)
        if not sol.success:
            raise RuntimeError(f"covariance integration failed: {sol.message}")
        seg_f, seg_fp = sol.y[0], sol.y[1]
        omega[j0:j1 + 1] = -0.5j * seg_fp / seg_f
        scale = abs(seg_f[-1])
        y = np.array([seg_f[-1] / scale, seg_fp[-1] / scale])
    return OmegaTrajectory(k=k, eta=eta, omega=omega)


def wavefunction_AB(r: np.ndarray, phi: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Wave-function parameters (A, B) of the squeezed vacuum.

    A = (e^{-4i phi} tanh^2 r + 1) / (2 (e^{-4i phi} tanh^2 r - 1)),
    B = 2 e^{-2i phi} tanh r / (e^{-4i phi} tanh^2 r - 1).

    Re A < 0 for every (r, phi): the state stays normalizable.  r = 0 is the
    vacuum, (A, B) = (-1/2, 0).
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    t = np.tanh(r)
    q = np.exp(-4j * phi) * t * t
    denom = q - 1.0  # |q| < 1, so never zero
    a = (q + 1.0) / (2.0 * denom)
    b = 2.0 * np.exp(-2j * phi) * t / denom
    if np.ndim(a) == 0:
        return complex(a), complex(b)
    return a, b


def spectrum_heisenberg(bog: BogoliubovTrajectory,
                        bg: BackgroundModel) -> np.ndarray:
    """Curvature power spectrum from the mode function:

    P_zeta(eta) = k^2 |u + v*|^2 / (4 pi^2 z^2).
    """
    z = _z_on(bg, bog.eta)
    f = bog.f
    return bog.k ** 2 * np.abs(f) ** 2 / (4.0 * np.pi ** 2 * z ** 2)


def spectrum_schrodinger(om: OmegaTrajectory,
                         bg: BackgroundModel) -> np.ndarray:
    """Curvature power spectrum from the Gaussian width:

    P_zeta(eta) = k^3 / (2 pi^2) * 1 / (4 z^2 Re Omega).
    """
    z = _z_on(bg, om.eta)
    re = np.real(om.omega)
    if np.any(re <= 0.0):
        raise ValueError("Re Omega must stay positive")
    return om.k ** 3 / (2.0 * np.pi ** 2) / (4.0 * z ** 2 * re)


def _z_on(bg: BackgroundModel, eta: np.ndarray) -> np.ndarray:
    z = np.array([bg.eval(t).z for t in np.atleast_1d(eta)])
    if np.any(z <= 0.0):
        raise ValueError("curvature spectrum undefined: z = 0 "
                         "(eps1 = 0 background)")
    return z


def _check_grid(bg: BackgroundModel, eta: np.ndarray) -> None:
    if eta.ndim != 1 or eta.size < 2:
        raise ValueError("eta grid must be 1-d with at least 2 nodes")
    if not np.all(np.diff(eta) > 0.0):
        raise ValueError("eta grid must be strictly increasing")
    bg._check_eta(float(eta[0]))
    bg._check_eta(float(eta[-1]))


def _decade_segments(eta: np.ndarray) -> list[tuple[int, int]]:
    """Split node indices into contiguous runs spanning <= 1 decade of |eta|."""
    edges = []
    j0 = 0
    for j in range(1, eta.size):
        if eta[j0] / eta[j] > 10.0 or j == eta.size - 1:
            edges.append((j0, j))
            j0 = j
    if not edges:
        edges.append((0, eta.size - 1))
    return edges
