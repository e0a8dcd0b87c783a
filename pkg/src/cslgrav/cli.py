"""Command-line front door.

Subcommands::

    solve-params         closed-form collapse parameters for a named scenario
    simulate-csl         trajectory ensemble vs master equation on a demo lattice
    sample-vacuum        fluctuation-field correlation Monte Carlo
    brownian             Brownian energy-gain ensemble under fluctuation forces
    check-semiclassical  superposition-detectability verdicts (sweep or scenario)

Global flags: --config <json>, --seed <u64>, --out <dir> (default: env
CSLGRAV_OUT_DIR or the working directory), --check (gate exit code on the
manifest's pass flags), --workers <n>.  Exit codes: 0 success, 1 usage or
config error, 2 tolerance failure under --check.

Every run writes a JSON manifest (config echo, version, timestamp, seed,
summary rows with formula text, pass flags) plus CSV/JSON artifacts; data
files are byte-identical for a fixed config+seed, independent of --workers.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import default_backend_name, get_backend
from .constants import CGS
from .dynamics import CollapsePropagator, evolve_density_matrix, suggest_dt, trace_distance
from .forces import brownian_energy_ensemble
from .lattice import LatticeSystem
from .params import CollapseModel, KernelKind
from .runio import (
    ConfigError,
    SummaryRow,
    all_rows_pass,
    config_quantity,
    config_value,
    emit_series,
    read_config,
    write_manifest,
)
from .semiclassical import ProbeScenario, evaluate, random_sweep
from .solver import SCENARIOS, solve_scenario
from .vacuum import FluctuationModel, estimate_correlations, estimate_spectrum

COMMANDS = (
    "solve-params",
    "simulate-csl",
    "sample-vacuum",
    "brownian",
    "check-semiclassical",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); we reserve 2
        raise UsageError(message)


def _qdict(value: float, unit: str) -> dict:
    return {"value": value, "unit": unit}


# --- solve-params ------------------------------------------------------------

def _run_solve_params(args, cfg, outdir) -> tuple[list[SummaryRow], list[Path]]:
    scenario = args.scenario or config_value(cfg, "scenario", str, default="")
    if not scenario:
        raise ConfigError("scenario: give --scenario or a config entry")
    if scenario not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise ConfigError(f"scenario: unknown {scenario!r} (known: {known})")
    c_ = CGS
    sol = solve_scenario(scenario, c_)
    rows: list[SummaryRow] = []
    if scenario == "planck-nucleon-monopole":
        lam = sol.collapse_rate(c_.nucleon_mass)
        res = sol.residuals(c_.nucleon_mass)
        payload = {
            "scenario": scenario,
            "event_mass": _qdict(sol.event_mass, "g"),
            "event_density": _qdict(sol.event_density, "s/cm^3"),
            "smear": _qdict(sol.smear, "cm"),
            "collapse_rate_nucleon": _qdict(lam, "1/s"),
            "strength": _qdict(sol.gamma, "cm^3/s/g^2"),
            "rate_length_product_unit_mass": _qdict(
                sol.rate_length_product(1.0), "cm/s"
            ),
        }
        rows.append(SummaryRow(
            name="planck-monopole-width",
            formula="(3/pi^2)^(1/4)/4 * sqrt(hbar/(G*mu^2*ptilde))",
            value=sol.smear, target=1.4e-5, tolerance=0.03 * 1.4e-5,
        ))
        rows.append(SummaryRow(
            name="planck-monopole-rate",
            formula="G*m^2/(2*sqrt(3*pi)*a*hbar), m = nucleon",
            value=lam, target=2e-24, tolerance=0.05 * 2e-24,
        ))
        rows.append(SummaryRow(
            name="monopole-rate-residual",
            formula="lambda vs m^2/(32*pi^(3/2)*mu^2*a^3*ptilde)",
            value=res["rate"], target=0.0, tolerance=1e-10,
        ))
        rows.append(SummaryRow(
            name="monopole-heating-residual",
            formula="3*hbar^2*lambda/(4*m*a^2) vs 2*sqrt(pi)*m*(G*mu)^2*ptilde/a",
            value=res["heating"], target=0.0, tolerance=1e-10,
        ))
        rows.append(SummaryRow(
            name="monopole-strength",
            formula="1/(4*mu^2*ptilde)",
            value=sol.gamma,
        ))
    else:
        target_density = (3.0 / (8.0 * np.pi)) * c_.hbar / c_.G
        res = sol.residuals(c_.nucleon_mass)
        payload = {
            "scenario": scenario,
            "moment_density": _qdict(sol.moment_density, "g^2*s/cm"),
            "strength": _qdict(sol.gamma_prime, "cm/s/g^2"),
            "smear": _qdict(sol.smear, "cm"),
            "collapse_rate_nucleon": _qdict(
                sol.collapse_rate(c_.nucleon_mass), "1/s"
            ),
            "events_per_volume_planck_moment": _qdict(
                sol.events_per_volume(), "1/cm^3"
            ),
        }
        rows.append(SummaryRow(
            name="planck-dipole-density",
            formula="ptilde*p^2 = (3/(8*pi))*hbar/G",
            value=sol.moment_density, target=target_density,
            tolerance=1e-10 * target_density,
        ))
        mono = solve_scenario("planck-nucleon-monopole", c_)
        ratio = sol.collapse_rate(1.0) / mono.collapse_rate(1.0)
        rows.append(SummaryRow(
            name="dipole-rate-ratio",
            formula="lambda_dipole/lambda_monopole = 1/sqrt(3) at equal a",
            value=ratio, target=1.0 / np.sqrt(3.0),
            tolerance=1e-10 / np.sqrt(3.0),
        ))
        rows.append(SummaryRow(
            name="dipole-rate-residual",
            formula="lambda vs m^2/(16*pi^(3/2)*a*ptilde*p^2)",
            value=res["rate"], target=0.0, tolerance=1e-10,
        ))
        rows.append(SummaryRow(
            name="dipole-heating-residual",
            formula="3*hbar^2*lambda/(4*m*a^2) vs sqrt(pi)*G^2*m*ptilde*p^2/(3*a^3)",
            value=res["heating"], target=0.0, tolerance=1e-10,
        ))
        rows.append(SummaryRow(
            name="dipole-strength",
            formula="3/(16*pi*ptilde*p^2) = G/(2*hbar)",
            value=sol.gamma_prime,
        ))
    out = outdir / f"solve_params_{scenario}.json"
    out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return rows, [out]


# --- simulate-csl ------------------------------------------------------------

def _run_simulate_csl(args, cfg, outdir, seed, workers) -> tuple[list[SummaryRow], list[Path]]:
    kind = KernelKind(config_value(cfg, "kind", str, default="delta"))
    strength_unit = "cm^3/s/g^2" if kind is KernelKind.DELTA else "cm/s/g^2"
    strength = config_quantity(cfg, "strength", strength_unit, default=1.0)
    model = CollapseModel(kind=kind, strength=strength)
    n = int(config_value(cfg, "lattice_sites", int, default=16))
    spacing = config_quantity(cfg, "spacing", "cm", default=1.0)
    smear = config_quantity(cfg, "smear", "cm", default=2.0)
    mass = config_quantity(cfg, "mass", "g", default=1.0)
    sep = int(config_value(cfg, "site_separation", int, default=n // 3))
    probs = cfg.get("probabilities", [0.3, 0.7])
    if not isinstance(probs, list) or len(probs) < 2:
        raise ConfigError("probabilities: need a list of at least 2 weights")
    probs = np.asarray([float(p) for p in probs])
    if np.any(probs <= 0):
        raise ConfigError("probabilities: all entries must be positive")
    probs = probs / probs.sum()
    dim = probs.size
    sites = [((i * sep) % n,) * 3 for i in range(dim)]
    system = LatticeSystem(
        shape=(n, n, n),
        spacing=spacing,
        smear=smear,
        masses=(mass,),
        configurations=tuple((site,) for site in sites),
    )
    prop = CollapsePropagator(system, model)
    safety = float(config_value(cfg, "safety", float, default=0.05))
    dt = suggest_dt(system, model, safety=safety)
    n_steps = int(config_value(cfg, "n_steps", int, default=160))
    n_traj = int(config_value(cfg, "n_trajectories", int, default=4000))
    record_every = int(config_value(cfg, "record_every", int, default=max(1, n_steps // 40)))
    psi0 = np.sqrt(probs).astype(np.complex128)
    result = prop.run_ensemble(
        psi0, n_steps=n_steps, dt=dt, seed=seed, n_trajectories=n_traj,
        record_every=record_every, workers=workers, backend=args.backend,
    )
    master = evolve_density_matrix(
        system, model, np.outer(psi0, psi0.conj()), result.times
    )
    tdist = np.array([
        trace_distance(result.rho[i], master.matrices[i])
        for i in range(result.times.size)
    ])
    cols = [("t", "s")]
    data = [result.times]
    for i in range(dim):
        cols.append((f"master_p{i}", "1"))
        data.append(master.matrices[:, i, i].real)
    for i in range(dim):
        cols.append((f"ensemble_p{i}", "1"))
        data.append(result.rho[:, i, i].real)
    cols += [("master_coh01", "1"), ("ensemble_coh01", "1"), ("trace_distance", "1")]
    data += [np.abs(master.matrices[:, 0, 1]), np.abs(result.rho[:, 0, 1]), tdist]
    series_path = emit_series(outdir / "simulate_csl_series.csv", cols, np.column_stack(data))

    n_eff = result.ess
    w_sigma = result.mean_weight * np.sqrt(max(n_traj / max(n_eff, 1e-12) - 1.0, 0.0))
    rows = [
        SummaryRow(
            name="trajectory-master-distance",
            formula="tracedist(mean_w rho_traj, rho_master) -> 0",
            value=float(tdist[-1]), target=0.0, tolerance=0.05,
        ),
        SummaryRow(
            name="weight-martingale",
            formula="mean trajectory weight = 1",
            value=result.mean_weight, target=1.0,
            tolerance=5.0 * w_sigma / np.sqrt(n_traj),
        ),
    ]
    for i in range(dim):
        tol = 4.0 * np.sqrt(probs[i] * (1 - probs[i]) / max(n_eff, 1.0))
        rows.append(SummaryRow(
            name=f"born-frequency-{i}",
            formula="collapse outcome frequency = |amplitude|^2",
            value=float(result.outcome_weights[i]), target=float(probs[i]),
            tolerance=tol,
        ))
    rows.append(SummaryRow(
        name="effective-samples", formula="(sum w)^2 / sum w^2", value=n_eff,
    ))
    return rows, [series_path]


# --- sample-vacuum -----------------------------------------------------------

def _fluctuation_from_config(args, cfg) -> FluctuationModel:
    kind = args.model or config_value(cfg, "model", str, default="monopole")
    kwargs = {}
    if _has(cfg, "arm"):
        kwargs["arm"] = config_quantity(cfg, "arm", "cm")
    return FluctuationModel(
        kind=kind,
        event_mass=config_quantity(cfg, "event_mass", "g", default=1.0),
        probability=float(config_value(cfg, "probability", float, default=0.01)),
        cell=config_quantity(cfg, "cell", "cm", default=0.5),
        interval=config_quantity(cfg, "interval", "s", default=1.0),
        extent=int(config_value(cfg, "extent", int, default=48)),
        **kwargs,
    )


def _run_sample_vacuum(args, cfg, outdir, seed) -> tuple[list[SummaryRow], list[Path]]:
    model = _fluctuation_from_config(args, cfg)
    n_samples = int(config_value(cfg, "n_samples", int, default=600))
    spectrum_samples = int(config_value(cfg, "spectrum_samples", int, default=200))
    rng = np.random.default_rng(seed)
    est = estimate_correlations(model, n_samples, rng)
    spec = estimate_spectrum(model, spectrum_samples, rng)

    unit = "g^2*s/cm^3"
    cols = [
        ("same_cell", unit), ("same_cell_err", unit), ("same_cell_expected", unit),
        ("adjacent", unit), ("adjacent_err", unit), ("adjacent_expected", unit),
        ("axial_lag2", unit), ("axial_lag2_err", unit), ("axial_lag2_expected", unit),
        ("successive_intervals", unit), ("successive_intervals_err", unit),
    ]
    row = [
        est.same_cell, est.same_cell_err, est.expected["same_cell"],
        est.adjacent, est.adjacent_err, est.expected["adjacent"],
        est.axial_lag2, est.axial_lag2_err, est.expected["axial_lag2"],
        est.successive_intervals, est.successive_intervals_err,
    ]
    corr_path = emit_series(outdir / f"vacuum_correlations_{model.kind.value}.csv",
                            cols, np.asarray([row]))
    spec_path = emit_series(
        outdir / f"vacuum_spectrum_{model.kind.value}.csv",
        [("khat2", "1/cm^2"), ("spectrum", unit), ("spectrum_err", unit),
         ("expected", unit)],
        np.column_stack([spec.khat2, spec.spectrum, spec.spectrum_err, spec.expected]),
    )

    if model.kind.value == "monopole":
        coeff_formula = "mu^2*ptilde*(1-P)"
        strength_formula = "gamma = 1/(4*mu^2*ptilde)"
    else:
        coeff_formula = "2*mu^2*ptilde*(1-7P/12); face -mu^2*ptilde*(1-P)/3"
        strength_formula = "gamma_prime = 3/(16*pi*ptilde*p^2)"
    rows = [
        SummaryRow(
            name=f"{model.kind.value}-cell-coefficient", formula=coeff_formula,
            value=est.same_cell, stderr=est.same_cell_err,
            target=est.expected["same_cell"], tolerance=4.0 * est.same_cell_err,
        ),
        SummaryRow(
            name=f"{model.kind.value}-adjacent-coefficient", formula=coeff_formula,
            value=est.adjacent, stderr=est.adjacent_err,
            target=est.expected["adjacent"], tolerance=4.0 * est.adjacent_err,
        ),
        SummaryRow(
            name="interval-decorrelation", formula="cov across intervals = 0",
            value=est.successive_intervals, stderr=est.successive_intervals_err,
            target=0.0, tolerance=4.0 * est.successive_intervals_err,
        ),
        SummaryRow(
            name="recovered-strength", formula=strength_formula,
            value=est.strength_estimate, stderr=est.strength_err,
            target=est.strength_expected, tolerance=4.0 * est.strength_err,
        ),
    ]
    pulls = (spec.spectrum - spec.expected) / np.where(spec.spectrum_err > 0,
                                                       spec.spectrum_err, np.inf)
    rows.append(SummaryRow(
        name="spectrum-worst-shell-pull",
        formula="power spectrum vs ptilde*p^2*khat^2/3 (dipole) or flat (monopole)",
        value=float(np.max(np.abs(pulls))), target=0.0, tolerance=4.5,
    ))
    return rows, [corr_path, spec_path]


# --- brownian ----------------------------------------------------------------

def _run_brownian(args, cfg, outdir, seed) -> tuple[list[SummaryRow], list[Path]]:
    model = _fluctuation_from_config(args, cfg)
    test_mass = config_quantity(cfg, "test_mass", "g", default=1.0)
    smear = config_quantity(cfg, "smear", "cm", default=1.0)
    cutoff = config_quantity(cfg, "cutoff", "cm", default=10.0 * smear)
    n_runs = int(config_value(cfg, "n_runs", int, default=400))
    n_intervals = int(config_value(cfg, "n_intervals", int, default=400))
    rng = np.random.default_rng(seed)
    res = brownian_energy_ensemble(
        model, test_mass, smear, cutoff, n_runs, n_intervals, rng,
        backend=args.backend,
    )
    path = emit_series(
        outdir / f"brownian_energy_{model.kind.value}.csv",
        [("t", "s"), ("E_mean", "erg"), ("E_stderr", "erg")],
        np.column_stack([res.times, res.energy_mean, res.energy_err]),
    )
    formula = (
        "2*sqrt(pi)*m*(G*mu)^2*ptilde/a"
        if model.kind.value == "monopole"
        else "sqrt(pi)*G^2*m*ptilde*p^2/(3*a^3)"
    )
    tol = max(0.10 * abs(res.predicted_slope), 4.0 * res.slope_err)
    rows = [
        SummaryRow(
            name=f"{model.kind.value}-energy-slope", formula=formula,
            value=res.slope, stderr=res.slope_err,
            target=res.predicted_slope, tolerance=tol,
        ),
        SummaryRow(
            name="sampler-feedthrough",
            formula="slope = 3*K^2/(2*m) with sampled K^2 (resolved + tail)",
            value=res.sampler_slope, target=res.predicted_slope,
            tolerance=0.05 * abs(res.predicted_slope),
        ),
    ]
    return rows, [path]


# --- check-semiclassical -----------------------------------------------------

def _scenario_from_config(block: dict) -> ProbeScenario:
    kind = config_value(block, "kind", str, default="delta")
    kwargs = dict(
        radius=config_quantity(block, "radius", "cm"),
        probe_speed=config_quantity(block, "probe_speed", "cm/s"),
        collapse_length=config_quantity(block, "collapse_length", "cm"),
        kind=KernelKind(kind),
    )
    if _has(block, "sphere_mass"):
        kwargs["sphere_mass"] = config_quantity(block, "sphere_mass", "g")
    if _has(block, "density"):
        kwargs["density"] = config_quantity(block, "density", "g/cm^3")
    if _has(block, "smear_length"):
        kwargs["smear_length"] = config_quantity(block, "smear_length", "cm")
    if _has(block, "separation"):
        kwargs["separation"] = config_quantity(block, "separation", "cm")
    return ProbeScenario(**kwargs)


def _has(block: dict, key: str) -> bool:
    return isinstance(block, dict) and key in block


def _run_check_semiclassical(args, cfg, outdir, seed) -> tuple[list[SummaryRow], list[Path]]:
    outputs: list[Path] = []
    rows: list[SummaryRow] = []
    if _has(cfg, "scenario"):
        scenario = _scenario_from_config(cfg["scenario"])
        report = evaluate(scenario)
        payload = {
            "regime": report.regime,
            "detectable": report.detectable,
            "order_of_magnitude": report.order_of_magnitude,
            "window_low": _qdict(report.window_low, "cm"),
            "window_high": _qdict(report.window_high, "cm"),
            "model_window_high": _qdict(report.model_window_high, "cm"),
            "collapse_time": _qdict(report.collapse_time, "s"),
            "inequalities": [
                {"name": iq.name, "lhs": iq.lhs, "rhs": iq.rhs,
                 "satisfied": iq.satisfied, "margin": iq.margin}
                for iq in report.inequalities
            ],
        }
        if report.velocity_floor is not None:
            payload["velocity_floor"] = _qdict(report.velocity_floor, "cm/s")
        path = outdir / "semiclassical_report.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        outputs.append(path)
        rows.append(SummaryRow(
            name="scenario-detectable",
            formula="measurement AND z-window nonempty (order of magnitude)",
            value=float(report.detectable),
        ))
        return rows, outputs

    n = int(args.sweep if args.sweep else config_value(cfg, "sweep", int, default=10000))
    rng = np.random.default_rng(seed)
    reports = random_sweep(n, rng)
    compact_equal = 0
    newtonian_ext = 0
    viol_compact = 0
    viol_newt = 0
    table = np.zeros((len(reports), 13))
    for i, r in enumerate(reports):
        s = r.scenario
        meas = r.inequalities[0]
        table[i] = [
            s.radius, s.density, s.sphere_mass, s.collapse_length, s.smear,
            s.probe_speed, 1.0 if s.kind is KernelKind.NEWTONIAN else 0.0,
            1.0 if r.detectable else 0.0, r.window_low, r.window_high,
            meas.margin, r.window_margin, r.model_window_margin,
        ]
        if s.compact and s.smear <= s.collapse_length:
            compact_equal += 1
            if r.detectable and s.smear == s.collapse_length:
                viol_compact += 1
        if not s.compact and s.kind is KernelKind.NEWTONIAN:
            newtonian_ext += 1
            viol_newt += r.detectable
    # explicit structural families on top of the random sweep
    for _ in range(n // 10):
        a_ = 10.0 ** rng.uniform(-6, -4)
        s = ProbeScenario(
            radius=a_ * 10.0 ** rng.uniform(-4, -0.001),
            probe_speed=CGS.c * 10.0 ** rng.uniform(-6, -0.1),
            collapse_length=a_,
            kind="delta" if rng.random() < 0.5 else "newtonian",
            density=10.0 ** rng.uniform(-3, 3),
            smear_length=a_,
        )
        compact_equal += 1
        viol_compact += evaluate(s).detectable
    detectable_examples = sum(
        evaluate(ProbeScenario(radius=rad, probe_speed=1e5, collapse_length=1e-5,
                               kind="delta", density=1.0, smear_length=1e-5)).detectable
        for rad in (1.0, 3.0, 10.0, 100.0)
    )
    path = emit_series(
        outdir / "semiclassical_sweep.csv",
        [("radius", "cm"), ("density", "g/cm^3"), ("sphere_mass", "g"),
         ("collapse_length", "cm"), ("smear_length", "cm"),
         ("probe_speed", "cm/s"), ("kind_newtonian", "1"), ("detectable", "1"),
         ("window_low", "cm"), ("window_high", "cm"),
         ("measurement_margin", "1"), ("window_margin", "1"),
         ("model_window_margin", "1")],
        table,
    )
    outputs.append(path)
    rows += [
        SummaryRow(
            name="compact-equal-smear-undetectable",
            formula="a' = a, R < a: z-window (max(R,a'), a) empty",
            value=float(viol_compact), stderr=None, target=0.0, tolerance=0.0,
        ),
        SummaryRow(
            name="newtonian-extended-undetectable",
            formula="R > a: z-window (max(R,a'), R) empty",
            value=float(viol_newt), target=0.0, tolerance=0.0,
        ),
        SummaryRow(
            name="delta-extended-detectable-examples",
            formula="R > a, D = 1 g/cm^3, R >= 1 cm: window up to M/(D a^2)",
            value=float(detectable_examples), target=4.0, tolerance=0.0,
        ),
        SummaryRow(
            name="sweep-families",
            formula=f"{newtonian_ext} newtonian-extended, {compact_equal} compact a'<=a",
            value=float(len(reports)),
        ),
    ]
    return rows, outputs


# --- driver ------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="cslgrav", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cslgrav {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON config file")
    common.add_argument("--seed", type=int, default=1, help="RNG seed (recorded)")
    common.add_argument("--out", type=str, default=None,
                        help="output dir (default: $CSLGRAV_OUT_DIR or .)")
    common.add_argument("--check", action="store_true",
                        help="exit 2 unless all summary rows pass")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--backend", type=str, default=None,
                        choices=["python", "compiled"],
                        help="force an update-kernel backend")

    p = sub.add_parser("solve-params", parents=[common],
                       help="closed-form scenario parameters")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), default=None)

    p = sub.add_parser("simulate-csl", parents=[common],
                       help="trajectory ensemble vs master equation")

    p = sub.add_parser("sample-vacuum", parents=[common],
                       help="fluctuation correlation Monte Carlo")
    p.add_argument("--model", choices=["monopole", "dipole"], default=None)

    p = sub.add_parser("brownian", parents=[common],
                       help="energy gain under fluctuation forces")
    p.add_argument("--model", choices=["monopole", "dipole"], default=None)

    p = sub.add_parser("check-semiclassical", parents=[common],
                       help="detectability verdicts")
    p.add_argument("--sweep", type=int, default=None,
                   help="number of random scenarios")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = read_config(args.config) if args.config else {}
        if args.command in cfg and isinstance(cfg[args.command], dict):
            cfg = cfg[args.command]
        outdir = Path(args.out or os.environ.get("CSLGRAV_OUT_DIR") or ".")
        outdir.mkdir(parents=True, exist_ok=True)
        if args.backend:
            get_backend(args.backend)  # fail fast if unavailable
        backend = args.backend or default_backend_name()

        if args.command == "solve-params":
            rows, outputs = _run_solve_params(args, cfg, outdir)
        elif args.command == "simulate-csl":
            rows, outputs = _run_simulate_csl(args, cfg, outdir, args.seed, args.workers)
        elif args.command == "sample-vacuum":
            rows, outputs = _run_sample_vacuum(args, cfg, outdir, args.seed)
        elif args.command == "brownian":
            rows, outputs = _run_brownian(args, cfg, outdir, args.seed)
        else:
            rows, outputs = _run_check_semiclassical(args, cfg, outdir, args.seed)

        manifest_path = outdir / f"{args.command.replace('-', '_')}_manifest.json"
        write_manifest(
            manifest_path,
            command=args.command,
            config=cfg,
            seed=args.seed,
            backend=backend,
            workers=args.workers,
            rows=rows,
            outputs=outputs,
            check=args.check,
        )
        for row in rows:
            status = {True: "pass", False: "FAIL", None: "info"}[row.passed]
            extra = ""
            if row.target is not None:
                extra = f" (target {row.target:.6g}, tol {row.tolerance:.3g})"
            print(f"[{status}] {row.name}: {row.value:.9g}{extra}")
        print(f"manifest: {manifest_path}")
        if args.check and not all_rows_pass(rows):
            return 2
        return 0
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
