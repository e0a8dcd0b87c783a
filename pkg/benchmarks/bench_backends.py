"""Timing comparison: pure-numpy backend vs the compiled extension.

Benchmarks the three hot loops behind the trajectory and force ensembles:

  csl_step_batch      stochastic collapse update for a trajectory batch
  apply_matrix_batch  dense propagator application (Hamiltonian half-steps)
  accumulate_forces   scatter-add of per-event forces into per-run impulses

Run:  python benchmarks/bench_backends.py [--repeat 7] [--quick]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from cslgrav._accel import available_backends, get_backend


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_csl_step(backend, n_traj: int, dim: int, repeat: int, rng) -> float:
    qmat = rng.standard_normal((dim, dim))
    qmat = qmat @ qmat.T  # positive semidefinite, symmetric
    qdiag = np.ascontiguousarray(np.diag(qmat))
    s = rng.standard_normal((n_traj, dim))
    dt = 1e-3

    def run():
        alpha = (rng.standard_normal((n_traj, dim))
                 + 1j * rng.standard_normal((n_traj, dim)))
        alpha /= np.linalg.norm(alpha, axis=1, keepdims=True)
        logw = np.zeros(n_traj)
        backend.csl_step_batch(alpha, logw, qmat, qdiag, s, dt)

    return _time(run, repeat)


def bench_apply_matrix(backend, n_traj: int, dim: int, repeat: int, rng) -> float:
    matrix_t = (rng.standard_normal((dim, dim))
                + 1j * rng.standard_normal((dim, dim)))
    alpha = (rng.standard_normal((n_traj, dim))
             + 1j * rng.standard_normal((n_traj, dim)))
    scratch = np.empty_like(alpha)

    def run():
        backend.apply_matrix_batch(alpha, matrix_t, scratch)

    return _time(run, repeat)


def bench_accumulate(backend, n_events: int, n_runs: int, repeat: int, rng) -> float:
    table = rng.standard_normal((200_000, 3))
    cell_idx = rng.integers(0, table.shape[0], n_events)
    run_idx = np.sort(rng.integers(0, n_runs, n_events))
    out = np.zeros((n_runs, 3))

    def run():
        backend.accumulate_forces(table, cell_idx, run_idx, out)

    return _time(run, repeat)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()

    names = available_backends()
    backends = {name: get_backend(name) for name in names}
    scale = 4 if args.quick else 1
    rng_seed = 2024

    cases = [
        ("csl_step_batch  n=8192 dim=2",
         lambda b: bench_csl_step(b, 8192 // scale, 2, args.repeat,
                                  np.random.default_rng(rng_seed))),
        ("csl_step_batch  n=8192 dim=8",
         lambda b: bench_csl_step(b, 8192 // scale, 8, args.repeat,
                                  np.random.default_rng(rng_seed))),
        ("csl_step_batch  n=2048 dim=32",
         lambda b: bench_csl_step(b, 2048 // scale, 32, args.repeat,
                                  np.random.default_rng(rng_seed))),
        ("apply_matrix    n=8192 dim=16",
         lambda b: bench_apply_matrix(b, 8192 // scale, 16, args.repeat,
                                      np.random.default_rng(rng_seed))),
        ("accumulate      5e5 events, 1000 runs",
         lambda b: bench_accumulate(b, 500_000 // scale, 1000, args.repeat,
                                    np.random.default_rng(rng_seed))),
    ]

    width = max(len(c[0]) for c in cases)
    header = f"{'case':<{width}}" + "".join(f"  {n:>12}" for n in names)
    if len(names) > 1:
        header += "  speedup"
    print(header)
    print("-" * len(header))
    for label, fn in cases:
        times = [fn(backends[n]) for n in names]
        row = f"{label:<{width}}" + "".join(f"  {t * 1e3:>10.3f}ms" for t in times)
        if len(times) > 1 and times[-1] > 0:
            row += f"  {times[0] / times[-1]:>6.2f}x"
        print(row)
    if len(names) == 1:
        print("(compiled extension unavailable; showing pure backend only)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
