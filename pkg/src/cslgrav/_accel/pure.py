"""Pure-numpy implementations of the hot inner loops.

Reference backend: always available, used as the correctness baseline for the
compiled extension. Given identical inputs the two backends agree to floating
roundoff (the compiled loops may associate sums differently than BLAS);
bitwise determinism across runs and worker counts holds within each backend.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def csl_step_batch(alpha: np.ndarray, log_weight: np.ndarray,
                   qmat: np.ndarray, qdiag: np.ndarray,
                   s: np.ndarray, dt: float) -> float:
    """One stochastic collapse step for a batch of trajectories, in place.

    alpha: (n, dim) complex128, unit-norm rows. log_weight: (n,) float64.
    qmat: (dim, dim) Gram matrix of smeared-density fields under the inverse
    kernel; qdiag its diagonal. s: (n, dim) float64, the noise functionals
    s_c already projected onto the configuration basis (variance Q/(4 dt)).

    Updates amplitudes and accumulated log importance weights; returns the
    smallest pre-normalization squared norm in the batch (underflow guard).
    """
    p = (alpha.real**2 + alpha.imag**2)
    qp = p @ qmat
    pqp = np.einsum("ij,ij->i", p, qp)
    quad = qdiag[None, :] - 2.0 * qp + pqp[:, None]
    sbar = np.einsum("ij,ij->i", p, s)
    expo = dt * (2.0 * (s - sbar[:, None]) - quad)
    alpha *= np.exp(expo)
    w = np.einsum("ij,ij->i", alpha.real, alpha.real) + np.einsum(
        "ij,ij->i", alpha.imag, alpha.imag)
    with np.errstate(divide="ignore"):  # w = 0 -> -inf; caller raises on it
        log_weight += np.log(w)
    alpha /= np.sqrt(w)[:, None]
    return float(w.min())


def apply_matrix_batch(alpha: np.ndarray, matrix_t: np.ndarray,
                       scratch: np.ndarray) -> None:
    """alpha <- alpha @ matrix_t, in place via the scratch buffer.

    matrix_t is the transposed operator so rows transform as
    alpha'_c = sum_d matrix[c, d] alpha_d.
    """
    np.matmul(alpha, matrix_t, out=scratch)
    alpha[:] = scratch


def accumulate_forces(table: np.ndarray, cell_idx: np.ndarray,
                      run_idx: np.ndarray, out: np.ndarray) -> None:
    """out[run] += table[cell] for each event, in place.

    table: (n_cells, 3) float64 per-cell force vectors; cell_idx/run_idx:
    (n_events,) int64; out: (n_runs, 3) float64.
    """
    n_runs = out.shape[0]
    picked = table[cell_idx]
    for comp in range(out.shape[1]):
        out[:, comp] += np.bincount(run_idx, weights=picked[:, comp],
                                    minlength=n_runs)
