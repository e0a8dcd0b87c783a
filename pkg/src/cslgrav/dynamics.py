"""Stochastic collapse trajectories and the matching master equation.

The state diffuses under a norm-preserving multiplicative update: writing
p_c = |alpha_c|^2 and D_c = A_c - sum_c' p_c' A_c' (the mass-density field
relative to its quantum expectation), one time step multiplies each amplitude
by

    exp( -dt Q(D_c) + 2 dt stilde_c ),    stilde_c = s_c - sum_c' p_c' s_c'

where s_c = <w0, G^-1 A_c> are Gaussian functionals of the noise slice with
covariance Cov[s_c, s_c'] = Q_cc' / (4 dt), Q the Gram matrix of the
configuration fields under the inverse kernel. The pre-normalisation squared
norm of each step is the trajectory's importance weight increment; weights
form a martingale (mean 1), and weighted ensemble averages reproduce the
master equation

    drho/dt = -(i/hbar) [H, rho] - R o rho,
    R_cc'   = (Q_cc + Q_c'c' - 2 Q_cc') / 2

(o = elementwise). A Hamiltonian is interleaved by symmetric splitting with
the exact unitary exp(-i H dt / 2 hbar) on either side of the noise update.

The ensemble runner draws noise per fixed-size trajectory block from
counter-based substreams keyed (seed, block), so results are bitwise
reproducible for a given backend regardless of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.integrate import solve_ivp

from ._accel import get_backend
from .lattice import (KernelOperator, LatticeSystem, NoiseSlice, QuantumState,
                      smeared_mass_fields)
from .params import CollapseModel

__all__ = [
    "CollapsePropagator",
    "EnsembleResult",
    "DensityMatrixSeries",
    "TrajectoryUnderflow",
    "decay_rate_matrix",
    "evolve_density_matrix",
    "energy_slope_oracle",
    "trace_distance",
    "linear_fit",
    "suggest_dt",
]

_BLOCK_SIZE = 2048  # trajectories per RNG block; fixed for reproducibility
_UNDERFLOW_FLOOR = 1e-300


class TrajectoryUnderflow(RuntimeError):
    """A trajectory's step weight underflowed; dt is far too coarse."""


def _mask64(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # counter-based: every (seed, block) pair is an independent substream
    return np.random.Generator(np.random.Philox(key=[_mask64(seed), _mask64(block)]))


def decay_rate_matrix(system: LatticeSystem, model: CollapseModel) -> np.ndarray:
    """Off-diagonal decay rates R_cc' [s^-1]; zero diagonal, symmetric, >= 0."""
    op = KernelOperator(model, system)
    q = op.gram(smeared_mass_fields(system))
    qd = np.diag(q)
    r = 0.5 * (qd[:, None] + qd[None, :] - 2.0 * q)
    np.fill_diagonal(r, 0.0)
    return np.maximum(r, 0.0)


@dataclass
class EnsembleResult:
    """Weighted trajectory-ensemble summary on a fixed record grid."""

    times: np.ndarray                 # (n_rec,) [s], starting at 0
    rho: np.ndarray                   # (n_rec, dim, dim) weighted averages
    outcome_weights: np.ndarray       # (dim,) weighted argmax frequencies at t_final
    ess: float                        # effective sample size at t_final
    mean_weight: float                # should be ~1 (martingale check)
    energy_mean: np.ndarray | None    # (n_rec,) [erg] if the system has H
    energy_err: np.ndarray | None
    n_trajectories: int
    dt: float
    seed: int
    backend: str


@dataclass
class DensityMatrixSeries:
    times: np.ndarray
    matrices: np.ndarray  # (n_rec, dim, dim)

    def positivity_floor(self) -> float:
        """Most negative eigenvalue across the series (roundoff watchdog)."""
        return float(min(np.linalg.eigvalsh(m).min() for m in self.matrices))


class CollapsePropagator:
    """Precomputed lattice quadratic forms + steppers for one system/model."""

    def __init__(self, system: LatticeSystem, model: CollapseModel):
        self.system = system
        self.model = model
        self.fields = smeared_mass_fields(system)
        self.op = KernelOperator(model, system)
        self.qmat = self.op.gram(self.fields)
        self.qdiag = np.ascontiguousarray(np.diag(self.qmat))
        qd = self.qdiag
        rate = 0.5 * (qd[:, None] + qd[None, :] - 2.0 * self.qmat)
        np.fill_diagonal(rate, 0.0)
        self.rate_matrix = np.maximum(rate, 0.0)
        self.max_rate = float(self.rate_matrix.max())
        # symmetric square root of Q for sampling the projected functionals
        evals, evecs = np.linalg.eigh(self.qmat)
        evals = np.clip(evals, 0.0, None)
        self._sqrt_q = evecs * np.sqrt(evals)[None, :]
        h = system.hamiltonian
        self._hnorm = 0.0 if h is None else float(np.abs(np.linalg.eigvalsh(h)).max())

    # --- step-size hygiene -------------------------------------------------
    def check_dt(self, dt: float) -> None:
        """Reject step sizes that break the weak-coupling step expansion."""
        if not (dt > 0 and math.isfinite(dt)):
            raise ValueError("dt must be positive")
        hbar = self.system.constants.hbar
        if self.max_rate * dt > 0.1:
            raise ValueError(
                f"dt {dt:g} too coarse: max decay rate * dt = "
                f"{self.max_rate * dt:.3g} > 0.1; reduce dt"
            )
        if self._hnorm * dt / hbar > 0.1:
            raise ValueError(
                f"dt {dt:g} too coarse: |H| dt / hbar = "
                f"{self._hnorm * dt / hbar:.3g} > 0.1; reduce dt"
            )

    def _half_step_unitary(self, dt: float) -> np.ndarray | None:
        h = self.system.hamiltonian
        if h is None or self._hnorm == 0.0:
            return None
        return expm(-1j * h * dt / (2.0 * self.system.constants.hbar))

    # --- single-step API (explicit noise field) ----------------------------
    def step_with_field(self, state: QuantumState, noise: NoiseSlice) -> QuantumState:
        """One symmetric-split step driven by an explicit noise-field slice.

        Statistically identical to the batched projected-noise path; kept as
        the transparent reference (functionals computed from the full field).
        """
        dt = noise.dt
        self.check_dt(dt)
        s = self.op.noise_functionals(noise, self.fields)
        u_half = self._half_step_unitary(dt)
        alpha = state.amplitudes / np.linalg.norm(state.amplitudes)
        if u_half is not None:
            alpha = u_half @ alpha
        log_weight = state.log_weight + _apply_noise_exponent(
            alpha, s, self.qmat, self.qdiag, dt)
        if u_half is not None:
            alpha = u_half @ alpha
        return QuantumState(alpha, log_weight)

    # --- ensemble API -------------------------------------------------------
    def run_ensemble(self, psi0, n_steps: int, dt: float, seed: int,
                     n_trajectories: int, record_every: int | None = None,
                     workers: int = 1, backend: str | None = None) -> EnsembleResult:
        """Propagate a weighted trajectory ensemble; see module docstring.

        Records the weighted density matrix (and energy, if H is present) at
        t = 0 and every `record_every` steps (default: final step only).
        """
        self.check_dt(dt)
        if n_steps < 1 or n_trajectories < 1:
            raise ValueError("need n_steps >= 1 and n_trajectories >= 1")
        bk = get_backend(backend)
        dim = self.system.dim
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape != (dim,):
            raise ValueError(f"psi0 must have shape ({dim},)")
        psi0 = psi0 / np.linalg.norm(psi0)

        if record_every is None:
            record_every = n_steps
        record_steps = [0] + [k for k in range(record_every, n_steps + 1, record_every)]
        if record_steps[-1] != n_steps:
            record_steps.append(n_steps)
        times = np.array(record_steps, dtype=float) * dt
        n_rec = len(record_steps)

        u_half = self._half_step_unitary(dt)
        u_half_t = None if u_half is None else np.ascontiguousarray(u_half.T)
        chol_scaled = np.ascontiguousarray(self._sqrt_q.T / math.sqrt(4.0 * dt))
        h = self.system.hamiltonian
        # naive compiled loops win at small dim; BLAS wins once dim grows
        blas_unitary = dim > 16

        blocks = list(range((n_trajectories + _BLOCK_SIZE - 1) // _BLOCK_SIZE))

        def run_block(block: int):
            nb = min(_BLOCK_SIZE, n_trajectories - block * _BLOCK_SIZE)
            rng = _block_rng(seed, block)
            alpha = np.tile(psi0, (nb, 1))
            logw = np.zeros(nb)
            scratch = np.empty_like(alpha)
            rec_w = np.zeros(n_rec)
            rec_w2 = np.zeros(n_rec)
            rec_rho = np.zeros((n_rec, dim, dim), dtype=complex)
            rec_e = np.zeros(n_rec)
            rec_e2 = np.zeros(n_rec)
            rec_i = 0

            def record(idx: int):
                w = np.exp(logw)
                rec_w[idx] += w.sum()
                rec_w2[idx] += float(np.sum(w * w))
                rec_rho[idx] += np.einsum("i,ic,id->cd", w, alpha, alpha.conj())
                if h is not None:
                    e = np.einsum("ic,cd,id->i", alpha.conj(), h, alpha).real
                    rec_e[idx] += float(np.sum(w * e))
                    rec_e2[idx] += float(np.sum(w * e * e))

            def half_unitary():
                if u_half_t is None:
                    return
                if blas_unitary:
                    np.matmul(alpha, u_half_t, out=scratch)
                    alpha[:] = scratch
                else:
                    bk.apply_matrix_batch(alpha, u_half_t, scratch)

            record(0)
            rec_i = 1
            for step in range(1, n_steps + 1):
                # noise functionals projected onto the configuration basis:
                # same distribution the full field would induce
                xi = rng.standard_normal((nb, dim))
                s = xi @ chol_scaled
                half_unitary()
                min_w = bk.csl_step_batch(alpha, logw, self.qmat, self.qdiag,
                                          np.ascontiguousarray(s), dt)
                if min_w < _UNDERFLOW_FLOOR:
                    raise TrajectoryUnderflow(
                        f"step weight underflow (block {block}, step {step}, "
                        f"min weight {min_w:.3e}): dt {dt:g} is far too coarse "
                        "for these decay rates"
                    )
                half_unitary()
                if rec_i < n_rec and step == record_steps[rec_i]:
                    record(rec_i)
                    rec_i += 1
            w = np.exp(logw)
            outcome = np.bincount(np.argmax(np.abs(alpha) ** 2, axis=1),
                                  weights=w, minlength=dim)
            return rec_w, rec_w2, rec_rho, rec_e, rec_e2, outcome

        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run_block, blocks))
        else:
            results = [run_block(b) for b in blocks]

        # ordered reduction: independent of worker count
        rec_w = np.zeros(n_rec)
        rec_w2 = np.zeros(n_rec)
        rec_rho = np.zeros((n_rec, dim, dim), dtype=complex)
        rec_e = np.zeros(n_rec)
        rec_e2 = np.zeros(n_rec)
        outcome = np.zeros(dim)
        for bw, bw2, brho, be, be2, bout in results:
            rec_w += bw
            rec_w2 += bw2
            rec_rho += brho
            rec_e += be
            rec_e2 += be2
            outcome += bout

        rho = rec_rho / rec_w[:, None, None]
        if h is not None:
            e_mean = rec_e / rec_w
            e_var = np.maximum(rec_e2 / rec_w - e_mean**2, 0.0)
            e_err = np.sqrt(e_var * (rec_w2 / rec_w**2))
        else:
            e_mean = e_err = None
        return EnsembleResult(
            times=times, rho=rho, outcome_weights=outcome / outcome.sum(),
            ess=float(rec_w[-1] ** 2 / rec_w2[-1]),
            mean_weight=float(rec_w[-1] / n_trajectories),
            energy_mean=e_mean, energy_err=e_err,
            n_trajectories=n_trajectories, dt=dt, seed=seed, backend=bk.name,
        )


def _apply_noise_exponent(alpha: np.ndarray, s: np.ndarray, qmat: np.ndarray,
                          qdiag: np.ndarray, dt: float) -> float:
    """Single-trajectory noise update, in place; returns the log weight."""
    p = np.abs(alpha) ** 2
    p = p / p.sum()
    qp = qmat @ p
    quad = qdiag - 2.0 * qp + float(p @ qp)
    stilde = s - float(p @ s)
    alpha *= np.exp(dt * (2.0 * stilde - quad))
    w = float(np.sum(np.abs(alpha) ** 2))
    if w < _UNDERFLOW_FLOOR:
        raise TrajectoryUnderflow(f"step weight underflow ({w:.3e})")
    alpha /= math.sqrt(w)
    return math.log(w)


# --- master equation ---------------------------------------------------------

_EXPM_DIM_LIMIT = 16


def evolve_density_matrix(system: LatticeSystem, model: CollapseModel,
                          rho0: np.ndarray, times) -> DensityMatrixSeries:
    """Integrate drho/dt = -(i/hbar)[H, rho] - R o rho on a fixed time grid.

    With H = 0 the solution is the exact elementwise exponential decay
    rho_cc'(t) = rho_cc'(0) exp(-R_cc' t). With H present, small systems use
    the exact superoperator exponential; larger ones an adaptive integrator
    (rtol 1e-9). Positivity across the series can be checked via
    DensityMatrixSeries.positivity_floor().
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    rho0 = np.asarray(rho0, dtype=complex)
    dim = system.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 must be ({dim}, {dim})")
    rate = decay_rate_matrix(system, model)
    h = system.hamiltonian
    hbar = system.constants.hbar

    if h is None or float(np.abs(h).max()) == 0.0:
        mats = rho0[None, :, :] * np.exp(-rate[None, :, :] * times[:, None, None])
        return DensityMatrixSeries(times=times, matrices=mats)

    if dim <= _EXPM_DIM_LIMIT:
        eye = np.eye(dim)
        lind = (-1j / hbar) * (np.kron(h, eye) - np.kron(eye, h.T))
        lind -= np.diag(rate.ravel())
        mats = np.empty((times.size, dim, dim), dtype=complex)
        for i, t in enumerate(times):
            mats[i] = (expm(lind * t) @ rho0.ravel()).reshape(dim, dim)
        return DensityMatrixSeries(times=times, matrices=mats)

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        drho = (-1j / hbar) * (h @ rho - rho @ h) - rate * rho
        return drho.ravel()

    t_end = float(times[-1])
    sol = solve_ivp(rhs, (0.0, t_end if t_end > 0 else 1.0), rho0.ravel(),
                    t_eval=times, rtol=1e-9, atol=1e-12 * max(1.0, np.abs(rho0).max()),
                    method="DOP853")
    if not sol.success:
        raise RuntimeError(f"master-equation integration failed: {sol.message}")
    mats = sol.y.T.reshape(times.size, dim, dim)
    return DensityMatrixSeries(times=times, matrices=mats)


def energy_slope_oracle(system: LatticeSystem, model: CollapseModel,
                        rho0: np.ndarray, chunk: int = 65536) -> float:
    """d<H>/dt at t = 0 [erg s^-1], by the literal double commutator.

    Independent cross-check of the evolved energy series: sums
    -(1/2) tr( H [D, [D, rho]] ) over lattice sites (delta kernel) or over
    Fourier modes weighted by the inverse-kernel symbol (newtonian), using
    explicit operator products of the diagonal field operators, never the
    precomputed Gram/rate matrices.
    """
    h = system.hamiltonian
    if h is None:
        raise ValueError("system has no Hamiltonian; energy slope undefined")
    rho0 = np.asarray(rho0, dtype=complex)
    fields = smeared_mass_fields(system)
    dim = system.dim
    flat = fields.reshape(dim, -1)
    op = KernelOperator(model, system)

    from .params import KernelKind  # local import to avoid cycle noise
    if model.kind is KernelKind.DELTA:
        values = flat.astype(complex)
        weights = np.full(flat.shape[1], op.strength_eff * system.cell_volume)
    else:
        fk = np.fft.fftn(fields, axes=tuple(range(1, fields.ndim))).reshape(dim, -1)
        values = fk
        weights = op._symbol.reshape(-1) * (system.cell_volume**2 / system.volume)

    acc = 0.0
    n_modes = values.shape[1]
    for start in range(0, n_modes, chunk):
        d = values[:, start:start + chunk].T  # (K, dim) diagonal entries
        w = weights[start:start + chunk]
        left = d.conj()[:, :, None] * rho0[None, :, :]
        right = rho0[None, :, :] * d.conj()[:, None, :]
        c1 = left - right                      # [D^dag, rho]
        c2 = d[:, :, None] * c1 - c1 * d[:, None, :]  # [D, [D^dag, rho]]
        acc += float(np.einsum("k,cd,kdc->", w, h, c2).real)
    return -0.5 * acc


def energy_series_master(system: LatticeSystem, model: CollapseModel,
                         rho0: np.ndarray, times) -> np.ndarray:
    """<H>(t) [erg] along the master-equation solution."""
    h = system.hamiltonian
    if h is None:
        raise ValueError("system has no Hamiltonian")
    series = evolve_density_matrix(system, model, rho0, times)
    return np.einsum("tcd,dc->t", series.matrices, h).real


# --- small utilities ---------------------------------------------------------

def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """T(rho, sigma) = (1/2) || rho - sigma ||_1 for Hermitian matrices."""
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def linear_fit(t, y, yerr=None) -> tuple[float, float, float]:
    """Weighted least-squares line fit: returns (slope, intercept, slope_err).

    With yerr given, slope_err is propagated from the stated errors;
    otherwise it is estimated from the residual scatter.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size != y.size or t.size < 2:
        raise ValueError("need >= 2 points")
    if yerr is None:
        w = np.ones_like(t)
    else:
        e = np.asarray(yerr, dtype=float).copy()
        positive = e[e > 0]
        if positive.size == 0:
            w = np.ones_like(t)
            yerr = None
        else:
            e[e <= 0] = positive.min()  # deterministic points: weight like the best
            w = 1.0 / e**2
    sw = w.sum()
    tbar = float(np.sum(w * t) / sw)
    ybar = float(np.sum(w * y) / sw)
    stt = float(np.sum(w * (t - tbar) ** 2))
    slope = float(np.sum(w * (t - tbar) * (y - ybar)) / stt)
    intercept = ybar - slope * tbar
    if yerr is None:
        resid = y - (intercept + slope * t)
        dof = max(t.size - 2, 1)
        slope_err = math.sqrt(float(np.sum(resid**2)) / dof / stt)
    else:
        slope_err = math.sqrt(1.0 / stt)
    return slope, intercept, slope_err


def suggest_dt(system: LatticeSystem, model: CollapseModel,
               safety: float = 0.01) -> float:
    """Step size keeping both rate*dt and |H| dt / hbar at `safety`."""
    prop = CollapsePropagator(system, model)
    scale = max(prop.max_rate, prop._hnorm / system.constants.hbar)
    if scale <= 0:
        raise ValueError("system has neither decay nor Hamiltonian dynamics")
    return safety / scale
