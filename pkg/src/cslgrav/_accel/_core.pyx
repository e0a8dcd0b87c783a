# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: trajectory stepping and Monte-Carlo force gathers.

Mirrors cslgrav._accel.pure; see that module for the contract. The batch
dimensions here are large (10^4 trajectories, 10^6+ events) while the inner
dimensions are small, which is exactly where tight C loops beat vectorised
numpy on temporaries and where BLAS call overhead dominates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()


def csl_step_batch(double complex[:, ::1] alpha, double[::1] log_weight,
                   double[:, ::1] qmat, double[::1] qdiag,
                   double[:, ::1] s, double dt):
    cdef Py_ssize_t n = alpha.shape[0]
    cdef Py_ssize_t dim = alpha.shape[1]
    cdef Py_ssize_t i, c, d
    cdef double p_c, qp_c, pqp, sbar, w, scale, expo, re, im
    cdef double min_w = 1e308
    cdef double[::1] p = np.empty(dim, dtype=np.float64)
    cdef double[::1] qp = np.empty(dim, dtype=np.float64)

    with nogil:
        for i in range(n):
            pqp = 0.0
            sbar = 0.0
            for c in range(dim):
                re = alpha[i, c].real
                im = alpha[i, c].imag
                p_c = re * re + im * im
                p[c] = p_c
                sbar += p_c * s[i, c]
            for c in range(dim):
                qp_c = 0.0
                for d in range(dim):
                    qp_c += qmat[c, d] * p[d]
                qp[c] = qp_c
                pqp += p[c] * qp_c
            w = 0.0
            for c in range(dim):
                expo = dt * (2.0 * (s[i, c] - sbar)
                             - (qdiag[c] - 2.0 * qp[c] + pqp))
                scale = exp(expo)
                alpha[i, c] = alpha[i, c] * scale
                re = alpha[i, c].real
                im = alpha[i, c].imag
                w += re * re + im * im
            log_weight[i] += log(w)
            scale = 1.0 / sqrt(w)
            for c in range(dim):
                alpha[i, c] = alpha[i, c] * scale
            if w < min_w:
                min_w = w
    return min_w


def apply_matrix_batch(alpha, matrix_t, scratch):
    # Dense batched matmul is BLAS territory; a hand loop only loses here.
    # Delegating keeps this op bit-identical to the pure backend as a bonus.
    np.matmul(alpha, matrix_t, out=scratch)
    alpha[:] = scratch


def accumulate_forces(double[:, ::1] table, cnp.int64_t[::1] cell_idx,
                      cnp.int64_t[::1] run_idx, double[:, ::1] out):
    cdef Py_ssize_t k = cell_idx.shape[0]
    cdef Py_ssize_t ncomp = out.shape[1]
    cdef Py_ssize_t j, comp
    cdef cnp.int64_t cell, run
    with nogil:
        for j in range(k):
            cell = cell_idx[j]
            run = run_idx[j]
            for comp in range(ncomp):
                out[run, comp] += table[cell, comp]
