"""Ensemble stepper backends against a scalar reference loop and each other."""

import numpy as np
import pytest

from collapsim import kernels


def _reference_loop(d_eta, w2, s_x, s_p, om_re, om_im, noise, out_idx,
                    x, p, sigma):
    """Scalar re-implementation of the documented per-step update."""
    n_out = len(out_idx)
    n_traj = x.shape[0]
    out_x = np.empty((n_out, n_traj))
    out_p = np.empty((n_out, n_traj))
    out_sigma = np.empty((n_out, n_traj))
    for j in range(n_traj):
        xj, pj, sj = x[j], p[j], sigma[j]
        ptr = 0
        if ptr < n_out and out_idx[ptr] == 0:
            out_x[ptr, j], out_p[ptr, j], out_sigma[ptr, j] = xj, pj, sj
            ptr += 1
        for n in range(d_eta.shape[0]):
            de = d_eta[n]
            nz = noise[j, n]
            b_r = 2.0 * om_re[n] * xj
            b_i = pj + 2.0 * om_im[n] * xj
            sj += (b_r * b_r - b_i * b_i) * (0.5 * de) - om_re[n] * de
            pj += s_p[n] * nz - (w2[n] * de) * xj
            xj += de * pj + s_x[n] * nz
            while ptr < n_out and out_idx[ptr] == n + 1:
                out_x[ptr, j], out_p[ptr, j], out_sigma[ptr, j] = xj, pj, sj
                ptr += 1
        x[j], p[j], sigma[j] = xj, pj, sj
    return out_x, out_p, out_sigma


def _random_problem(seed, n_traj=37, n_steps=211):
    rng = np.random.default_rng(seed)
    d_eta = rng.uniform(1e-3, 2e-3, n_steps)
    w2 = rng.uniform(-0.5, 4.0, n_steps)
    s_x = rng.uniform(0.0, 0.05, n_steps)
    s_p = rng.uniform(-0.05, 0.05, n_steps)
    om_re = rng.uniform(0.1, 2.0, n_steps)
    om_im = rng.uniform(-3.0, 3.0, n_steps)
    noise = rng.standard_normal((n_traj, n_steps))
    out_idx = np.array([0, 1, 2, 57, n_steps - 1, n_steps], dtype=np.int64)
    x = rng.standard_normal(n_traj)
    p = rng.standard_normal(n_traj)
    sigma = rng.standard_normal(n_traj)
    return d_eta, w2, s_x, s_p, om_re, om_im, noise, out_idx, x, p, sigma


def _run_backend(backend, problem):
    d_eta, w2, s_x, s_p, om_re, om_im, noise, out_idx, x, p, sigma = problem
    x, p, sigma = x.copy(), p.copy(), sigma.copy()
    n_out, n_traj = out_idx.shape[0], x.shape[0]
    out_x = np.empty((n_out, n_traj))
    out_p = np.empty((n_out, n_traj))
    out_sigma = np.empty((n_out, n_traj))
    backend.step_ensemble(d_eta, w2, s_x, s_p, om_re, om_im,
                          np.ascontiguousarray(noise), out_idx,
                          x, p, sigma, out_x, out_p, out_sigma)
    return x, p, sigma, out_x, out_p, out_sigma


def _has_cython():
    try:
        kernels.get_backend("cython")
        return True
    except ImportError:
        return False


def test_numpy_matches_reference_loop():
    problem = _random_problem(3)
    ref_state = [a.copy() for a in problem[8:]]
    ref_out = _reference_loop(*problem[:8], *ref_state)
    got = _run_backend(kernels.get_backend("numpy"), problem)
    for a, b in zip(got[:3], ref_state):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(got[3:], ref_out):
        np.testing.assert_array_equal(a, b)


@pytest.mark.skipif(not _has_cython(), reason="compiled backend not built")
def test_cython_bitwise_identical_to_numpy():
    problem = _random_problem(4, n_traj=129, n_steps=403)
    got_np = _run_backend(kernels.get_backend("numpy"), problem)
    got_cy = _run_backend(kernels.get_backend("cython"), problem)
    for a, b in zip(got_np, got_cy):
        np.testing.assert_array_equal(a, b)


def test_active_backend_is_one_of_the_two():
    assert kernels.BACKEND in ("numpy", "cython")
    assert kernels.get_backend(None).BACKEND == kernels.BACKEND


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown kernel backend"):
        kernels.get_backend("fortran")


def test_output_node_selection():
    # node m is the state after m steps; node 0 is the initial data
    problem = _random_problem(5, n_traj=3, n_steps=20)
    d_eta, w2, s_x, s_p, om_re, om_im, noise, _, x0, p0, sigma0 = problem

    full_idx = np.arange(21, dtype=np.int64)
    full = _run_backend(kernels.get_backend("numpy"),
                        (d_eta, w2, s_x, s_p, om_re, om_im, noise,
                         full_idx, x0, p0, sigma0))
    np.testing.assert_array_equal(full[3][0], x0)
    np.testing.assert_array_equal(full[3][-1], full[0])

    sparse_idx = np.array([0, 7, 20], dtype=np.int64)
    sparse = _run_backend(kernels.get_backend("numpy"),
                          (d_eta, w2, s_x, s_p, om_re, om_im, noise,
                           sparse_idx, x0, p0, sigma0))
    for row, node in enumerate(sparse_idx):
        np.testing.assert_array_equal(sparse[3][row], full[3][node])
        np.testing.assert_array_equal(sparse[4][row], full[4][node])
        np.testing.assert_array_equal(sparse[5][row], full[5][node])


def test_zero_noise_is_symplectic_euler():
    n_steps = 50
    d_eta = np.full(n_steps, 0.01)
    w2 = np.full(n_steps, 4.0)
    zeros = np.zeros(n_steps)
    om_re = np.full(n_steps, 1.0)
    noise = np.zeros((1, n_steps))
    out_idx = np.array([n_steps], dtype=np.int64)
    x, p, sigma, *_ = _run_backend(
        kernels.get_backend("numpy"),
        (d_eta, w2, zeros, zeros, om_re, zeros, noise, out_idx,
         np.array([1.0]), np.array([0.0]), np.array([0.0])))

    xs, ps = 1.0, 0.0
    for _ in range(n_steps):
        ps = ps - 4.0 * 0.01 * xs
        xs = xs + 0.01 * ps
    # momentum updates first and feeds the position within the same step
    assert x[0] == xs and p[0] == ps


def test_sigma_decays_at_vacuum_width():
    # pure vacuum (om = k/2 real), no noise: sigma' = -om_re along the run
    n_steps = 40
    d_eta = np.full(n_steps, 0.02)
    zeros = np.zeros(n_steps)
    om_re = np.full(n_steps, 0.5)
    noise = np.zeros((1, n_steps))
    out_idx = np.array([n_steps], dtype=np.int64)
    x, p, sigma, *_ = _run_backend(
        kernels.get_backend("numpy"),
        (d_eta, np.full(n_steps, 0.25), zeros, zeros, om_re, zeros,
         noise, out_idx, np.zeros(1), np.zeros(1), np.zeros(1)))
    assert x[0] == 0.0 and p[0] == 0.0
    assert np.isclose(sigma[0], -0.5 * n_steps * 0.02, rtol=0, atol=1e-15)
