# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Euler-Maruyama ensemble stepper.

Semantics twin of `_ensemble_np.step_ensemble`; see that module for the
update scheme.  Operation order matches the numpy path and the extension is
compiled with -ffp-contract=off, so the two backends agree to the last few
ulps on identical inputs.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def step_ensemble(double[::1] d_eta, double[::1] w2,
                  double[::1] s_x, double[::1] s_p,
                  double[::1] om_re, double[::1] om_im,
                  double[:, ::1] noise, long long[::1] out_idx,
                  double[::1] x, double[::1] p, double[::1] sigma,
                  double[:, ::1] out_x, double[:, ::1] out_p,
                  double[:, ::1] out_sigma):
    cdef Py_ssize_t n_steps = d_eta.shape[0]
    cdef Py_ssize_t n_traj = x.shape[0]
    cdef Py_ssize_t n_out = out_idx.shape[0]
    cdef Py_ssize_t n, j, ptr
    cdef double de, c_br, c_bi, cw, om_re_n, sxn, spn, b_r, b_i, nz

    with nogil:
        ptr = 0
        if ptr < n_out and out_idx[ptr] == 0:
            for j in range(n_traj):
                out_x[ptr, j] = x[j]
                out_p[ptr, j] = p[j]
                out_sigma[ptr, j] = sigma[j]
            ptr += 1
        for n in range(n_steps):
            de = d_eta[n]
            c_br = 2.0 * om_re[n]
            c_bi = 2.0 * om_im[n]
            om_re_n = om_re[n]
            cw = w2[n] * de
            sxn = s_x[n]
            spn = s_p[n]
            for j in range(n_traj):
                nz = noise[j, n]
                b_r = c_br * x[j]
                b_i = p[j] + c_bi * x[j]
                sigma[j] = sigma[j] + ((b_r * b_r - b_i * b_i) * (0.5 * de)
                                       - om_re_n * de)
                p[j] = p[j] + (spn * nz - cw * x[j])
                x[j] = x[j] + (de * p[j] + sxn * nz)
            while ptr < n_out and out_idx[ptr] == n + 1:
                for j in range(n_traj):
                    out_x[ptr, j] = x[j]
                    out_p[ptr, j] = p[j]
                    out_sigma[ptr, j] = sigma[j]
                ptr += 1
