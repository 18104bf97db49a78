"""Stochastic collapse dynamics of a single Fourier mode.

Per-mode continuous localization acting on x = z*zeta with collapse operator
C = c(k, eta) * x.  In conformal time the collapse strength is

    lambda_c(eta) = gamma a(eta)^4 c(k, eta)^2 / m0^2

(the a^4 collects the cosmic-time measure dt = a d eta, dW_t = sqrt(a) dW_eta
and the a-weighting of the physical-density operator).  For a Gaussian state
the width is deterministic and only the means are noisy:

    dOmega = [-2i Omega^2 + i omega^2 / 2 + lambda_c] d eta
    dxbar  =  pbar d eta + sqrt(lambda_c) / (2 Re Omega) dW
    dpbar  = -omega^2 xbar d eta - (Im Omega / Re Omega) sqrt(lambda_c) dW

with one Wiener increment shared per mode and sector.  The combination
chi = pbar + 2 Im(Omega) xbar and the phase sigma pick up no direct noise;
they are carried along but never feed an observable.

Collapse operator presets:
  * "amplitude":          c = a^p / z            (p = p_exponent)
  * "density_contrast_g": c = (k/aH)^2 / z       (Newtonian density-contrast
                                                  stand-in; scale dependence
                                                  is a pluggable choice)
Both are multiplied by the coarse-graining kernel exp(-k^2 r_c^2 / (2 a^2))
when include_smoothing is set: collapse only bites once the physical
wavelength a/k outgrows the localization scale r_c.

Numerics: Omega is advanced through the linear form (see `modes`), the means
by Euler-Maruyama with symplectic ordering on a fixed grid in ln|eta|
(resolution guard k max(d eta) <= 0.6), and the Lindblad moment equations

    m_xx' = 2 m_xp,  m_xp' = m_pp - omega^2 m_xx,  m_pp' = -2 omega^2 m_xp
                                                           + lambda_c

serve as the deterministic oracle: the law of total variance gives
m_xx = E[xbar^2] + 1/(4 Re Omega) for the ensemble.

Reproducibility: trajectory j of mode i draws its noise from a counter-based
Philox stream seeded with SeedSequence(base_seed, spawn_key=(i, j)), so
results are independent of chunking, threading, and of which other modes run
in the same batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.integrate import solve_ivp

from . import kernels
from .background import BackgroundModel
from .modes import OmegaTrajectory, eta_log_grid, evolve_omega

PRESETS = ("amplitude", "density_contrast_g")

MAX_K_DETA = 0.6  # hard resolution guard for the fixed-step SDE grid


@dataclass(frozen=True)
class CollapseSpec:
    """Collapse-model parameters for one run.

    gamma is the raw collapse coupling (Planck units, per preset), m0 the
    reference mass, r_c the localization length entering the smoothing
    kernel, p_exponent the amplitude-preset power of a.
    """

    gamma: float
    m0: float = 1.0
    r_c: float = 1.0
    preset: str = "amplitude"
    p_exponent: float = 0.0
    include_smoothing: bool = True

    def __post_init__(self) -> None:
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.m0 > 0.0:
            raise ValueError(f"m0 must be > 0, got {self.m0}")
        if not self.r_c > 0.0:
            raise ValueError(f"r_c must be > 0, got {self.r_c}")
        if self.preset not in PRESETS:
            raise ValueError(
                f"unknown preset {self.preset!r}; expected one of {PRESETS}")


def collapse_amplitude(bg: BackgroundModel, k: float, spec: CollapseSpec, eta):
    """Collapse-operator coefficient c(k, eta); scalars or arrays."""
    eta_arr = np.asarray(eta, dtype=float)
    a = bg.scale_factor(eta_arr)
    z = bg.z_of(eta_arr)
    if np.any(np.asarray(z) <= 0.0):
        raise ValueError("collapse operator undefined for z = 0 "
                         "(eps1 = 0 background)")
    if spec.preset == "amplitude":
        c = a ** spec.p_exponent / z
    else:  # density_contrast_g
        if bg.flat:
            raise ValueError("density_contrast_g preset needs an expanding "
                             "background (aH = 0 on the flat hook)")
        ah = -1.0 / eta_arr  # comoving aH for the closed-form background
        c = (k / ah) ** 2 / z
    if spec.include_smoothing:
        c = c * np.exp(-(k * spec.r_c) ** 2 / (2.0 * a * a))
    return c if np.ndim(c) else float(c)


def collapse_rate(bg: BackgroundModel, k: float, spec: CollapseSpec, eta):
    """Conformal-time collapse strength lambda_c = gamma a^4 c^2 / m0^2."""
    if spec.gamma == 0.0:
        return np.zeros_like(np.asarray(eta, dtype=float)) if np.ndim(eta) \
            else 0.0
    a = bg.scale_factor(np.asarray(eta, dtype=float))
    c = collapse_amplitude(bg, k, spec, eta)
    lam = spec.gamma * a ** 4 * np.asarray(c) ** 2 / spec.m0 ** 2
    return lam if np.ndim(lam) else float(lam)


def evolve_omega_csl(bg: BackgroundModel, k: float, spec: CollapseSpec,
                     eta: np.ndarray) -> OmegaTrajectory:
    """Deterministic Gaussian width under collapse (lambda_c in the Riccati).

    With gamma = 0 this is exactly `modes.evolve_omega`: same integrator,
    same path, bit-identical output.
    """
    if spec.gamma == 0.0:
        return evolve_omega(bg, k, eta=eta)
    return evolve_omega(bg, k, eta=eta,
                        collapse_rate=lambda t: collapse_rate(bg, k, spec, t))


@dataclass(frozen=True)
class GaussianTrajectory:
    """One stochastic realization of the Gaussian state parameters."""

    k: float
    s: str                 # Fourier sector label, 'R' or 'I' (bookkeeping)
    eta: np.ndarray
    omega: np.ndarray      # shared deterministic width
    zbar: np.ndarray       # xbar / z, the curvature mean
    chi: np.ndarray        # pbar + 2 Im(Omega) xbar, noise-free combination
    sigma: np.ndarray      # accumulated wave-function phase
    base_seed: int
    mode_index: int
    traj_index: int


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble of mean trajectories for one mode."""

    k: float
    eta: np.ndarray          # output nodes
    omega: np.ndarray        # deterministic width at output nodes
    zbar_mean: np.ndarray    # E[zbar] over trajectories, per node
    zbar2_mean: np.ndarray   # E[zbar^2]
    xbar2_mean: np.ndarray   # E[xbar^2] (for the moment-oracle comparison)
    zbar_final: np.ndarray   # zbar at eta_end, one entry per trajectory
    samples: np.ndarray      # (n_keep, n_nodes) zbar series of leading trajs
    sectors: np.ndarray      # 'R'/'I' label per trajectory
    n_traj: int
    base_seed: int
    mode_index: int
    points_per_decade: int
    max_k_deta: float


@dataclass(frozen=True)
class MomentTrajectory:
    """Lindblad second moments of (x, p) along a grid."""

    k: float
    eta: np.ndarray
    m_xx: np.ndarray
    m_xp: np.ndarray
    m_pp: np.ndarray


@dataclass(frozen=True)
class CollapseDiagnostics:
    """Width-based collapse summary at eta_end."""

    k: float
    width_end: float        # 1 / (4 z^2 Re Omega) with collapse
    width_end_std: float    # same with gamma = 0
    width_ratio: float
    collapsed: bool
    threshold: float


def _traj_rng(base_seed: int, mode_index: int, traj_index: int) -> Generator:
    """Counter-based stream for one trajectory, independent of batching."""
    ss = SeedSequence(base_seed, spawn_key=(mode_index, traj_index))
    return Generator(Philox(ss))


def _sde_grid(bg: BackgroundModel, k: float, eta: np.ndarray | None,
              points_per_decade: int) -> np.ndarray:
    if eta is None:
        eta = eta_log_grid(bg.eta_ini, bg.eta_end, points_per_decade)
    eta = np.asarray(eta, dtype=float)
    max_k_deta = float(k * np.max(np.diff(eta)))
    if max_k_deta > MAX_K_DETA:
        raise ValueError(
            f"SDE grid too coarse: k max(d eta) = {max_k_deta:.3f} > "
            f"{MAX_K_DETA}; raise points_per_decade (needs roughly "
            f">= {int(np.ceil(np.log(10.0) * k * -eta[0] / MAX_K_DETA))})")
    return eta


def _sde_coefficients(bg: BackgroundModel, k: float, spec: CollapseSpec,
                      eta: np.ndarray):
    """Omega on the grid plus left-node stepping coefficient arrays."""
    om = evolve_omega_csl(bg, k, spec, eta)
    d_eta = np.diff(eta)
    left = eta[:-1]
    lam = np.asarray(collapse_rate(bg, k, spec, left), dtype=float)
    zpp_z = np.array([bg.eval(t).zpp_z for t in left])
    w2 = k * k - zpp_z
    om_re = np.real(om.omega[:-1]).astype(float)
    om_im = np.imag(om.omega[:-1]).astype(float)
    sqrt_lam_deta = np.sqrt(lam * d_eta)
    s_x = sqrt_lam_deta / (2.0 * om_re)
    s_p = -(om_im / om_re) * sqrt_lam_deta
    return om, d_eta, w2, s_x, s_p, om_re, om_im


def _out_nodes(n_nodes: int, n_out: int) -> np.ndarray:
    if n_out >= n_nodes:
        return np.arange(n_nodes, dtype=np.int64)
    idx = np.unique(np.round(np.linspace(0, n_nodes - 1, n_out)).astype(np.int64))
    return idx


def evolve_trajectory(bg: BackgroundModel, k: float, spec: CollapseSpec,
                      eta: np.ndarray | None = None,
                      points_per_decade: int = 512,
                      n_out: int = 257,
                      base_seed: int = 42,
                      mode_index: int = 0,
                      traj_index: int = 0) -> GaussianTrajectory:
    """Evolve a single stochastic mean trajectory of one mode."""
    grid = _sde_grid(bg, k, eta, points_per_decade)
    om, d_eta, w2, s_x, s_p, om_re, om_im = _sde_coefficients(bg, k, spec, grid)
    out_idx = _out_nodes(grid.size, n_out)
    n_steps = d_eta.size

    rng = _traj_rng(base_seed, mode_index, traj_index)
    noise = rng.standard_normal((1, n_steps))
    x = np.zeros(1)
    p = np.zeros(1)
    sig = np.zeros(1)
    out_x = np.empty((out_idx.size, 1))
    out_p = np.empty((out_idx.size, 1))
    out_s = np.empty((out_idx.size, 1))
    kernels.step_ensemble(d_eta, w2, s_x, s_p, om_re, om_im, noise, out_idx,
                          x, p, sig, out_x, out_p, out_s)

    eta_out = grid[out_idx]
    om_out = om.omega[out_idx]
    z_out = np.asarray(bg.z_of(eta_out))
    if np.any(z_out <= 0.0):
        raise ValueError("stochastic runs need z > 0 (eps1 > 0)")
    xb = out_x[:, 0]
    pb = out_p[:, 0]
    return GaussianTrajectory(
        k=k, s="R" if traj_index % 2 == 0 else "I",
        eta=eta_out, omega=om_out, zbar=xb / z_out,
        chi=pb + 2.0 * np.imag(om_out) * xb, sigma=out_s[:, 0],
        base_seed=base_seed, mode_index=mode_index, traj_index=traj_index)


def evolve_ensemble(bg: BackgroundModel, k: float, spec: CollapseSpec,
                    n_traj: int,
                    eta: np.ndarray | None = None,
                    points_per_decade: int = 512,
                    n_out: int = 257,
                    base_seed: int = 42,
                    mode_index: int = 0,
                    n_keep: int = 8,
                    chunk: int = 1024) -> EnsembleResult:
    """Evolve an ensemble of mean trajectories for one mode.

    Trajectory noise streams depend only on (base_seed, mode_index,
    traj_index); reductions run in fixed chunk order, so repeated calls are
    bit-identical and a mode's ensemble does not depend on which other modes
    are evolved in the same run.
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2 for ensemble statistics")
    grid = _sde_grid(bg, k, eta, points_per_decade)
    om, d_eta, w2, s_x, s_p, om_re, om_im = _sde_coefficients(bg, k, spec, grid)
    out_idx = _out_nodes(grid.size, n_out)
    n_steps = d_eta.size
    n_nodes_out = out_idx.size

    eta_out = grid[out_idx]
    z_out = np.asarray(bg.z_of(eta_out))
    if np.any(z_out <= 0.0):
        raise ValueError("stochastic runs need z > 0 (eps1 > 0)")

    sum_x = np.zeros(n_nodes_out)
    sum_x2 = np.zeros(n_nodes_out)
    zbar_final = np.empty(n_traj)
    n_keep = min(n_keep, n_traj)
    samples = np.empty((n_keep, n_nodes_out))

    for c0 in range(0, n_traj, chunk):
        c1 = min(c0 + chunk, n_traj)
        m = c1 - c0
        noise = np.empty((m, n_steps))
        for j in range(m):
            noise[j] = _traj_rng(base_seed, mode_index, c0 + j) \
                .standard_normal(n_steps)
        x = np.zeros(m)
        p = np.zeros(m)
        sig = np.zeros(m)
        out_x = np.empty((n_nodes_out, m))
        out_p = np.empty((n_nodes_out, m))
        out_s = np.empty((n_nodes_out, m))
        kernels.step_ensemble(d_eta, w2, s_x, s_p, om_re, om_im, noise,
                              out_idx, x, p, sig, out_x, out_p, out_s)
        sum_x += out_x.sum(axis=1)
        sum_x2 += (out_x * out_x).sum(axis=1)
        zbar_final[c0:c1] = out_x[-1] / z_out[-1]
        if c0 < n_keep:
            take = min(n_keep - c0, m)
            samples[c0:c0 + take] = (out_x[:, :take] / z_out[:, None]).T

    xbar_mean = sum_x / n_traj
    xbar2_mean = sum_x2 / n_traj
    sectors = np.array(["R" if j % 2 == 0 else "I" for j in range(n_traj)])
    return EnsembleResult(
        k=k, eta=eta_out, omega=om.omega[out_idx],
        zbar_mean=xbar_mean / z_out, zbar2_mean=xbar2_mean / (z_out * z_out),
        xbar2_mean=xbar2_mean, zbar_final=zbar_final, samples=samples,
        sectors=sectors, n_traj=n_traj, base_seed=base_seed,
        mode_index=mode_index, points_per_decade=points_per_decade,
        max_k_deta=float(k * np.max(d_eta)))


def lindblad_moments(bg: BackgroundModel, k: float, spec: CollapseSpec,
                     eta: np.ndarray,
                     include_hamiltonian: bool = True) -> MomentTrajectory:
    """Deterministic second moments of the Lindblad-averaged state.

    `include_hamiltonian=False` is a test hook (frozen dynamics, pure
    momentum diffusion): m_xx stays constant while m_pp grows as the
    integral of lambda_c.
    """
    eta = np.asarray(eta, dtype=float)
    g = 0.5 * bg.eval(eta[0]).zp_z
    y0 = np.array([1.0 / (2.0 * k), g / k, 0.5 * k + 2.0 * g * g / k])

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        lam = collapse_rate(bg, k, spec, t)
        if not include_hamiltonian:
            return np.array([0.0, 0.0, lam])
        w2 = bg.omega_squared(k, t)
        m_xx, m_xp, m_pp = y
        return np.array([2.0 * m_xp,
                         m_pp - w2 * m_xx,
                         -2.0 * w2 * m_xp + lam])

    scale = max(1.0 / (2.0 * k), 0.5 * k)
    sol = solve_ivp(rhs, (eta[0], eta[-1]), y0, t_eval=eta,
                    method="DOP853", rtol=1e-10, atol=1e-14 * scale)
    if not sol.success:
        raise RuntimeError(f"moment integration failed: {sol.message}")
    return MomentTrajectory(k=k, eta=eta, m_xx=sol.y[0], m_xp=sol.y[1],
                            m_pp=sol.y[2])


def collapse_diagnostics(bg: BackgroundModel, k: float, spec: CollapseSpec,
                         eta: np.ndarray | None = None,
                         points_per_decade: int = 512,
                         threshold: float = 1e-2) -> CollapseDiagnostics:
    """Wave-function width at eta_end relative to the collapse-free run."""
    if eta is None:
        eta = eta_log_grid(bg.eta_ini, bg.eta_end, points_per_decade)
    eta = np.asarray(eta, dtype=float)
    om_csl = evolve_omega_csl(bg, k, spec, eta)
    om_std = evolve_omega(bg, k, eta=eta)
    z_end = float(np.asarray(bg.z_of(eta[-1])))
    if z_end <= 0.0:
        raise ValueError("width diagnostic needs z > 0 (eps1 > 0)")
    width = 1.0 / (4.0 * z_end ** 2 * float(np.real(om_csl.omega[-1])))
    width_std = 1.0 / (4.0 * z_end ** 2 * float(np.real(om_std.omega[-1])))
    ratio = width / width_std
    return CollapseDiagnostics(k=k, width_end=width, width_end_std=width_std,
                               width_ratio=ratio,
                               collapsed=bool(ratio < threshold),
                               threshold=threshold)
