"""Pure-numpy Euler-Maruyama ensemble stepper (fallback backend).

Semantics are shared with the compiled twin `_ensemble_cy`: a symplectic
Euler update of the oscillator drift (momentum first, with the fresh momentum
feeding the position) plus Ito noise evaluated at the left node, and a
noise-free accumulation of the wave-function phase sigma.  The two backends
keep the same floating-point operation order (and the compiled one is built
with -ffp-contract=off), so trajectories agree to the last few ulps.

Per step n, for every trajectory:

    sigma += (bR^2 - bI^2) * (d_eta/2) - om_re * d_eta
        with bR = 2 om_re x, bI = p + 2 om_im x
    p     += s_p * N - (w2 * d_eta) * x
    x     += d_eta * p + s_x * N

where N is the trajectory's standard normal for the step and s_x, s_p carry
the sqrt(d_eta) factor already.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def step_ensemble(d_eta: np.ndarray, w2: np.ndarray,
                  s_x: np.ndarray, s_p: np.ndarray,
                  om_re: np.ndarray, om_im: np.ndarray,
                  noise: np.ndarray, out_idx: np.ndarray,
                  x: np.ndarray, p: np.ndarray, sigma: np.ndarray,
                  out_x: np.ndarray, out_p: np.ndarray,
                  out_sigma: np.ndarray) -> None:
    """Advance (x, p, sigma) in place, recording state at requested nodes.

    noise has shape (n_traj, n_steps); out_idx holds sorted node indices
    (node m = state after m steps, node 0 = initial data) and the out_*
    buffers have shape (len(out_idx), n_traj).
    """
    n_steps = d_eta.shape[0]
    noise_t = np.ascontiguousarray(noise.T)
    ptr = 0
    if ptr < out_idx.shape[0] and out_idx[ptr] == 0:
        out_x[ptr] = x
        out_p[ptr] = p
        out_sigma[ptr] = sigma
        ptr += 1
    for n in range(n_steps):
        de = d_eta[n]
        nz = noise_t[n]
        c_br = 2.0 * om_re[n]
        c_bi = 2.0 * om_im[n]
        b_r = c_br * x
        b_i = p + c_bi * x
        sigma += (b_r * b_r - b_i * b_i) * (0.5 * de) - om_re[n] * de
        cw = w2[n] * de
        p += s_p[n] * nz - cw * x
        x += de * p + s_x[n] * nz
        while ptr < out_idx.shape[0] and out_idx[ptr] == n + 1:
            out_x[ptr] = x
            out_p[ptr] = p
            out_sigma[ptr] = sigma
            ptr += 1
