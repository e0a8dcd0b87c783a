"""Trajectory ensembles vs the master equation, and the small fit utilities."""
from __future__ import annotations

import math

import numpy as np
import pytest

from cslgrav.constants import NATURAL
from cslgrav.dynamics import (
    CollapsePropagator,
    TrajectoryUnderflow,
    decay_rate_matrix,
    energy_series_master,
    energy_slope_oracle,
    evolve_density_matrix,
    linear_fit,
    suggest_dt,
    trace_distance,
)
from cslgrav.lattice import LatticeSystem, QuantumState
from cslgrav.params import CollapseModel


def two_site(sep=8, n=32, spacing=0.5, smear=1.0, hamiltonian=None):
    return LatticeSystem(
        shape=(n,), spacing=spacing, smear=smear, masses=(1.0,),
        configurations=(((0,),), ((sep,),)), hamiltonian=hamiltonian,
        constants=NATURAL,
    )


DELTA = CollapseModel.delta(4.0)


def test_decay_rate_matrix_structure():
    sys_ = two_site()
    r = decay_rate_matrix(sys_, DELTA)
    assert r.shape == (2, 2)
    assert r[0, 0] == r[1, 1] == 0.0
    assert r[0, 1] == r[1, 0] > 0


def test_master_h0_is_elementwise_decay():
    sys_ = two_site()
    r = decay_rate_matrix(sys_, DELTA)
    rho0 = np.array([[0.3, 0.2j], [-0.2j, 0.7]], dtype=complex)
    times = np.linspace(0.0, 2.0 / r[0, 1], 7)
    series = evolve_density_matrix(sys_, DELTA, rho0, times)
    for i, t in enumerate(times):
        np.testing.assert_allclose(series.matrices[i], rho0 * np.exp(-r * t),
                                   rtol=1e-12)
    assert series.positivity_floor() > -1e-12


def test_master_with_h_preserves_trace_and_positivity():
    h = np.array([[0.0, 0.8], [0.8, 0.3]], dtype=complex)
    sys_ = two_site(hamiltonian=h)
    rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    times = np.linspace(0.0, 3.0, 9)
    series = evolve_density_matrix(sys_, DELTA, rho0, times)
    traces = np.einsum("tcc->t", series.matrices).real
    np.testing.assert_allclose(traces, 1.0, rtol=1e-9)
    assert series.positivity_floor() > -1e-9


def test_master_large_dim_integrator_matches_expm_on_small_problem():
    # force the ODE path by a fake dim threshold: compare a 2-dim problem
    # solved through both code paths using monkey-free construction: the
    # solver picks expm for dim <= 16, so instead check ODE-path consistency
    # via a 17-configuration system against elementwise decay with H = 0
    # (H = None short-circuits; give a zero H to hit the integrator... a zero
    # H also short-circuits, so use a tiny-but-nonzero H and compare to expm
    # of the full superoperator built here by hand)
    n = 24
    configs = tuple(((i,),) for i in range(17))
    h = np.zeros((17, 17), dtype=complex)
    h[0, 1] = h[1, 0] = 1e-3
    sys_ = LatticeSystem(shape=(n,), spacing=0.5, smear=1.0, masses=(1.0,),
                         configurations=configs, hamiltonian=h,
                         constants=NATURAL)
    model = CollapseModel.delta(2.0)
    rate = decay_rate_matrix(sys_, model)
    rho0 = np.full((17, 17), 1.0 / 17.0, dtype=complex)
    t_end = 0.5 / rate.max()
    series = evolve_density_matrix(sys_, model, rho0, [t_end])
    from scipy.linalg import expm
    eye = np.eye(17)
    lind = (-1j) * (np.kron(h, eye) - np.kron(eye, h.T)) - np.diag(rate.ravel())
    expected = (expm(lind * t_end) @ rho0.ravel()).reshape(17, 17)
    np.testing.assert_allclose(series.matrices[0], expected, atol=1e-8)


def test_ensemble_reproduces_master_h0():
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    dt = suggest_dt(sys_, DELTA, safety=0.02)
    psi0 = np.sqrt([0.4, 0.6]).astype(complex)
    n_steps = 120
    res = prop.run_ensemble(psi0, n_steps=n_steps, dt=dt, seed=9,
                            n_trajectories=3000, record_every=20)
    master = evolve_density_matrix(sys_, DELTA, np.outer(psi0, psi0), res.times)
    for i in range(res.times.size):
        assert trace_distance(res.rho[i], master.matrices[i]) < 0.05
    assert abs(res.mean_weight - 1.0) < 0.05
    assert res.ess > 1000


def test_ensemble_offdiagonal_decay_exact_rate():
    # H = 0: the weighted mean off-diagonal decays at exactly R_01; fit it
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    r01 = prop.rate_matrix[0, 1]
    dt = 0.02 / r01
    psi0 = np.sqrt([0.5, 0.5]).astype(complex)
    res = prop.run_ensemble(psi0, n_steps=100, dt=dt, seed=4,
                            n_trajectories=20000, record_every=10)
    coh = np.abs(res.rho[:, 0, 1])
    slope, _, err = linear_fit(res.times, np.log(coh))
    assert abs(-slope - r01) < 0.03 * r01


def test_ensemble_martingale_and_born():
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    dt = suggest_dt(sys_, DELTA, safety=0.05)
    p0 = 0.3
    psi0 = np.sqrt([p0, 1 - p0]).astype(complex)
    res = prop.run_ensemble(psi0, n_steps=200, dt=dt, seed=12,
                            n_trajectories=8000)
    sigma = math.sqrt(p0 * (1 - p0) / res.ess)
    assert abs(res.outcome_weights[0] - p0) < 4 * sigma
    assert abs(res.mean_weight - 1.0) < 0.05


def test_ensemble_worker_invariance_bitwise():
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    dt = suggest_dt(sys_, DELTA, safety=0.05)
    psi0 = np.sqrt([0.5, 0.5]).astype(complex)
    kw = dict(n_steps=30, dt=dt, seed=77, n_trajectories=5000, record_every=10)
    a = prop.run_ensemble(psi0, workers=1, **kw)
    b = prop.run_ensemble(psi0, workers=4, **kw)
    assert np.array_equal(a.rho, b.rho)
    assert a.mean_weight == b.mean_weight
    assert np.array_equal(a.outcome_weights, b.outcome_weights)


def test_ensemble_backend_equivalence_to_roundoff():
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    dt = suggest_dt(sys_, DELTA, safety=0.05)
    psi0 = np.sqrt([0.5, 0.5]).astype(complex)
    kw = dict(n_steps=40, dt=dt, seed=5, n_trajectories=2000, record_every=10)
    from cslgrav._accel import available_backends
    if "compiled" not in available_backends():
        pytest.skip("compiled backend not built")
    a = prop.run_ensemble(psi0, backend="python", **kw)
    b = prop.run_ensemble(psi0, backend="compiled", **kw)
    np.testing.assert_allclose(a.rho, b.rho, atol=1e-10)
    assert a.backend == "python" and b.backend == "compiled"


def test_ensemble_with_hamiltonian_matches_master():
    h = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    sys_ = two_site(hamiltonian=h)
    prop = CollapsePropagator(sys_, DELTA)
    dt = suggest_dt(sys_, DELTA, safety=0.02)
    psi0 = np.array([1.0, 0.0], dtype=complex)
    res = prop.run_ensemble(psi0, n_steps=150, dt=dt, seed=21,
                            n_trajectories=4000, record_every=30)
    master = evolve_density_matrix(sys_, DELTA, np.outer(psi0, psi0), res.times)
    for i in range(res.times.size):
        assert trace_distance(res.rho[i], master.matrices[i]) < 0.06
    # energy recorded because H is present
    assert res.energy_mean is not None and res.energy_mean.shape == res.times.shape


def test_step_with_field_matches_batched_statistics():
    # the transparent single-trajectory API agrees with the batched one in
    # distribution: both must keep E[weight] = 1 and reproduce rho diagonal
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    dt = 0.02 / prop.max_rate
    rng = np.random.default_rng(8)
    n_traj, n_steps = 400, 30
    w_sum = 0.0
    p_sum = 0.0
    for _ in range(n_traj):
        state = QuantumState(np.sqrt([0.25, 0.75]).astype(complex))
        for _ in range(n_steps):
            noise = prop.op.sample_noise(rng, dt)
            state = prop.step_with_field(state, noise)
        w = math.exp(state.log_weight)
        w_sum += w
        p_sum += w * state.probabilities[0]
    mean_w = w_sum / n_traj
    mean_p = p_sum / w_sum
    assert abs(mean_w - 1.0) < 0.1
    assert abs(mean_p - 0.25) < 0.1


def test_check_dt_rejects_coarse_steps():
    sys_ = two_site()
    prop = CollapsePropagator(sys_, DELTA)
    with pytest.raises(ValueError):
        prop.check_dt(1.0 / prop.max_rate)
    with pytest.raises(ValueError):
        prop.check_dt(-1.0)
    prop.check_dt(0.05 / prop.max_rate)  # fine


def test_underflow_guard_triggers():
    # with check_dt in force a single step cannot underflow, and collapsed
    # trajectories stabilise their accumulated weights, so the guard is a
    # defensive invariant: exercise it at the step level directly
    from cslgrav.dynamics import _apply_noise_exponent

    alpha = np.sqrt([0.5, 0.5]).astype(complex)
    qmat = np.diag([800.0, 800.0])
    qdiag = np.ascontiguousarray(np.diag(qmat))
    s = np.zeros(2)
    with pytest.raises(TrajectoryUnderflow):
        _apply_noise_exponent(alpha, s, qmat, qdiag, dt=2.0)


def test_underflow_reported_by_backends():
    # both backends must report the pre-normalisation step weight so the
    # ensemble loop can raise instead of silently renormalising a zero
    from cslgrav._accel import available_backends, get_backend

    qmat = np.diag([800.0, 800.0])
    qdiag = np.ascontiguousarray(np.diag(qmat))
    for name in available_backends():
        bk = get_backend(name)
        alpha = np.tile(np.sqrt([0.5, 0.5]).astype(complex), (3, 1))
        logw = np.zeros(3)
        s = np.zeros((3, 2))
        min_w = bk.csl_step_batch(alpha, logw, qmat, qdiag, s, 2.0)
        assert min_w < 1e-300


def test_suggest_dt_respects_both_scales():
    h = np.array([[0.0, 50.0], [50.0, 0.0]], dtype=complex)
    sys_ = two_site(hamiltonian=h)
    dt = suggest_dt(sys_, DELTA, safety=0.01)
    prop = CollapsePropagator(sys_, DELTA)
    assert dt * prop.max_rate <= 0.011
    assert dt * 50.0 <= 0.011  # |H| dominates here (hbar = 1)


def test_trace_distance_properties():
    rho = np.diag([0.3, 0.7]).astype(complex)
    sigma = np.diag([0.7, 0.3]).astype(complex)
    assert math.isclose(trace_distance(rho, sigma), 0.4, rel_tol=1e-12)
    assert trace_distance(rho, rho) == 0.0
    # unitary invariance
    theta = 0.7
    u = np.array([[math.cos(theta), -math.sin(theta)],
                  [math.sin(theta), math.cos(theta)]], dtype=complex)
    assert math.isclose(trace_distance(u @ rho @ u.T.conj(), u @ sigma @ u.T.conj()),
                        0.4, rel_tol=1e-12)


def test_linear_fit_recovers_line():
    rng = np.random.default_rng(2)
    t = np.linspace(0, 10, 50)
    y = 3.0 * t + 1.0 + rng.normal(0, 0.1, t.size)
    slope, intercept, err = linear_fit(t, y, np.full(t.size, 0.1))
    assert abs(slope - 3.0) < 4 * err
    assert err < 0.02


def test_linear_fit_zero_errors_fall_back():
    t = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 2.0, 4.0])
    slope, intercept, err = linear_fit(t, y, np.zeros(3))
    assert math.isclose(slope, 2.0, rel_tol=1e-12)


def test_energy_oracle_matches_master_series_slope():
    h = np.array([[0.0, 0.4, 0.0], [0.4, 0.0, 0.4], [0.0, 0.4, 0.0]],
                 dtype=complex)
    sys_ = LatticeSystem(shape=(32,), spacing=0.5, smear=1.0, masses=(1.0,),
                         configurations=(((0,),), ((4,),), ((8,),)),
                         hamiltonian=h, constants=NATURAL)
    model = CollapseModel.delta(1.0)
    rho0 = np.full((3, 3), 1 / 3, dtype=complex)
    slope0 = energy_slope_oracle(sys_, model, rho0)
    eps = 1e-4 / decay_rate_matrix(sys_, model).max()
    e = energy_series_master(sys_, model, rho0, [0.0, eps])
    finite_diff = (e[1] - e[0]) / eps
    assert math.isclose(slope0, finite_diff, rel_tol=1e-4)


def test_energy_oracle_matches_master_series_slope_newtonian():
    h = np.zeros((2, 2), dtype=complex)
    h[0, 1] = h[1, 0] = 0.3
    sys_ = LatticeSystem(shape=(16, 16, 16), spacing=0.5, smear=1.0,
                         masses=(1.0,), configurations=(((0, 0, 0),), ((5, 0, 0),)),
                         hamiltonian=h, constants=NATURAL)
    model = CollapseModel.newtonian(2.0)
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    slope0 = energy_slope_oracle(sys_, model, rho0)
    eps = 1e-4 / decay_rate_matrix(sys_, model).max()
    e = energy_series_master(sys_, model, rho0, [0.0, eps])
    assert math.isclose(slope0, (e[1] - e[0]) / eps, rel_tol=1e-4)
