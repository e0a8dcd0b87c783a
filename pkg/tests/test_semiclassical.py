"""Detectability decision chain for superposed-sphere scenarios."""
from __future__ import annotations

import math

import numpy as np
import pytest

from cslgrav.constants import CGS
from cslgrav.params import KernelKind
from cslgrav.semiclassical import (
    DetectabilityReport,
    Inequality,
    ProbeScenario,
    collapse_time_estimate,
    evaluate,
    min_probe_mass_condition,
    random_sweep,
)

A_REF = 1.4e-5  # typical collapse length [cm] used throughout


def scenario(radius, kind, *, density=1.0, speed=1e3, a=A_REF, **kw):
    return ProbeScenario(radius=radius, probe_speed=speed, collapse_length=a,
                         kind=kind, density=density, **kw)


# --- scenario construction -----------------------------------------------------

def test_mass_density_completion_and_consistency():
    ball = 4.0 * math.pi / 3.0
    s = scenario(1.0, "delta", density=2.0)
    assert math.isclose(s.sphere_mass, 2.0 * ball, rel_tol=1e-12)
    s2 = ProbeScenario(radius=1.0, probe_speed=1e3, collapse_length=A_REF,
                       kind="delta", sphere_mass=2.0 * ball)
    assert math.isclose(s2.density, 2.0, rel_tol=1e-12)
    with pytest.raises(ValueError, match="disagree"):
        ProbeScenario(radius=1.0, probe_speed=1e3, collapse_length=A_REF,
                      kind="delta", sphere_mass=1.0, density=2.0)
    with pytest.raises(ValueError, match="sphere_mass or density"):
        ProbeScenario(radius=1.0, probe_speed=1e3, collapse_length=A_REF,
                      kind="delta")


def test_scenario_validation():
    with pytest.raises(ValueError):
        scenario(-1.0, "delta")
    with pytest.raises(ValueError, match="below c"):
        scenario(1.0, "delta", speed=CGS.c)
    with pytest.raises(ValueError):
        scenario(1.0, "delta", smear_length=0.0)
    with pytest.raises(ValueError):
        scenario(1.0, "delta", separation=-2.0)
    with pytest.raises(ValueError):
        scenario(1.0, "octupole")


def test_smear_defaults_to_collapse_length():
    assert scenario(1.0, "delta").smear == A_REF
    assert scenario(1.0, "delta", smear_length=3e-5).smear == 3e-5
    assert scenario(1e-6, "delta").compact
    assert not scenario(1.0, "delta").compact


# --- the measurement inequality ------------------------------------------------

def test_measurement_condition_hand_values():
    ineq = min_probe_mass_condition(CGS.planck_mass, 0.5 * CGS.c)
    assert ineq.lhs == 1.0 and ineq.rhs == 0.5
    assert ineq.satisfied and math.isclose(ineq.margin, 2.0, rel_tol=1e-12)
    tiny = min_probe_mass_condition(1e-10, 1e5)
    assert not tiny.satisfied
    assert math.isclose(tiny.lhs, (1e-10 / CGS.planck_mass) ** 2, rel_tol=1e-12)


def test_inequality_margin_degenerate_rhs():
    assert Inequality("x", 1.0, 0.0).margin == np.inf


# --- collapse-time estimates ---------------------------------------------------

def test_collapse_time_per_regime_hand_formulas():
    compact = scenario(1e-6, "delta", density=5.0)
    m_ = compact.sphere_mass
    assert math.isclose(collapse_time_estimate(compact),
                        A_REF * CGS.hbar / (CGS.G * m_**2), rel_tol=1e-12)
    # compact estimate does not depend on the kernel
    compact_n = scenario(1e-6, "newtonian", density=5.0)
    assert collapse_time_estimate(compact) == collapse_time_estimate(compact_n)

    ext_d = scenario(1.0, "delta", density=5.0)
    assert math.isclose(
        collapse_time_estimate(ext_d),
        CGS.hbar / (CGS.G * A_REF**2 * ext_d.sphere_mass * 5.0), rel_tol=1e-12)

    ext_n = scenario(1.0, "newtonian", density=5.0)
    assert math.isclose(
        collapse_time_estimate(ext_n),
        CGS.hbar * 1.0 / (CGS.G * ext_n.sphere_mass**2), rel_tol=1e-12)


def test_model_prefactor_shortens_collapse_times():
    ext_d = scenario(1.0, "delta", density=5.0)
    assert math.isclose(
        collapse_time_estimate(ext_d) / collapse_time_estimate(ext_d, model_prefactor=True),
        4.0 * math.pi / math.sqrt(3.0), rel_tol=1e-12)
    ext_n = scenario(1.0, "newtonian", density=5.0)
    assert math.isclose(
        collapse_time_estimate(ext_n) / collapse_time_estimate(ext_n, model_prefactor=True),
        0.5, rel_tol=1e-12)


# --- the Z-window --------------------------------------------------------------

def test_window_bounds_per_regime_are_exact():
    compact = evaluate(scenario(1e-6, "newtonian", density=5.0))
    assert compact.regime == "compact"
    assert compact.window_high == A_REF          # exactly a
    assert compact.window_low == A_REF           # max(R, a') with a' = a
    assert not compact.window_nonempty           # empty whenever a' = a

    ext_n = evaluate(scenario(2.5, "newtonian", density=5.0))
    assert ext_n.regime == "extended"
    assert ext_n.window_high == 2.5              # exactly R
    assert ext_n.window_low == 2.5
    assert not ext_n.window_nonempty             # structurally empty

    ext_d = evaluate(scenario(2.5, "delta", density=5.0))
    m_ = ext_d.scenario.sphere_mass
    assert math.isclose(ext_d.window_high, m_ / (5.0 * A_REF**2), rel_tol=1e-12)


def test_window_high_equals_collapse_time_at_best_speed():
    # window_high = tau * G M^2 / hbar in every regime
    for s in (scenario(1e-6, "delta", density=5.0),
              scenario(2.5, "delta", density=5.0),
              scenario(2.5, "newtonian", density=5.0)):
        rep = evaluate(s)
        want = collapse_time_estimate(s) * CGS.G * s.sphere_mass**2 / CGS.hbar
        assert math.isclose(rep.window_high, want, rel_tol=1e-12)


def test_extended_delta_sphere_is_detectable():
    rep = evaluate(scenario(1.0, "delta", density=1.0))
    assert rep.measurement_ok and rep.window_nonempty and rep.detectable
    assert rep.window_margin > 1e9
    # same sphere, newtonian kernel: never detectable
    rep_n = evaluate(scenario(1.0, "newtonian", density=1.0))
    assert rep_n.measurement_ok and not rep_n.detectable


def test_smear_length_narrows_the_window():
    base = evaluate(scenario(1.0, "delta", density=1.0))
    wide = evaluate(scenario(1.0, "delta", density=1.0, smear_length=1e3))
    assert wide.window_low == 1e3
    assert wide.window_margin < base.window_margin
    # push a' beyond the window top: verdict flips
    top = base.window_high
    closed = evaluate(scenario(1.0, "delta", density=1.0, smear_length=2 * top))
    assert not closed.window_nonempty and not closed.detectable


def test_report_bookkeeping_and_model_margin():
    rep = evaluate(scenario(1.0, "delta", density=1.0))
    assert rep.order_of_magnitude is True
    assert [i.name for i in rep.inequalities] == ["measurement", "z-window"]
    assert rep.detectable == (rep.measurement_ok and rep.window_nonempty)
    assert math.isclose(rep.model_window_high,
                        rep.window_high / (4.0 * math.pi / math.sqrt(3.0)),
                        rel_tol=1e-12)
    assert math.isclose(rep.model_window_margin,
                        rep.window_margin / (4.0 * math.pi / math.sqrt(3.0)),
                        rel_tol=1e-12)
    assert rep.velocity_floor is None


def test_fixed_separation_appends_chain():
    s = scenario(1.0, "delta", density=1.0, separation=50.0, speed=1e3)
    rep = evaluate(s)
    names = [i.name for i in rep.inequalities]
    assert names == ["measurement", "z-window", "geometry", "survival"]
    geom = rep.inequalities[2]
    assert geom.lhs == 50.0 and geom.rhs == rep.window_low and geom.satisfied
    surv = rep.inequalities[3]
    assert surv.lhs == rep.collapse_time
    assert math.isclose(surv.rhs, 50.0 / 1e3, rel_tol=1e-12)
    assert math.isclose(rep.velocity_floor,
                        CGS.hbar / (s.sphere_mass * 50.0), rel_tol=1e-12)


# --- structural sweeps ----------------------------------------------------------

def test_sweep_structural_invariants():
    rng = np.random.default_rng(42)
    reports = random_sweep(2000, rng)
    assert len(reports) == 2000
    saw_delta_detectable = 0
    for rep in reports:
        s = rep.scenario
        assert rep.window_low == max(s.radius, s.smear)
        assert rep.detectable == (rep.measurement_ok and rep.window_nonempty)
        if rep.regime == "compact" and s.smear >= s.collapse_length:
            assert not rep.window_nonempty
        if rep.regime == "extended" and s.kind is KernelKind.NEWTONIAN:
            assert not rep.window_nonempty
        if rep.detectable:
            assert s.kind is KernelKind.DELTA or rep.regime == "compact"
        if rep.detectable and rep.regime == "extended":
            saw_delta_detectable += 1
        assert rep.collapse_time > 0 and np.isfinite(rep.window_margin)
    # the sweep ranges are wide enough to exhibit detectable extended spheres
    assert saw_delta_detectable > 0


def test_sweep_compact_needs_narrow_smear_to_open():
    # a' < a and R < a' leaves (a', a) open: verdict then rests on measurement
    s = scenario(1e-7, "newtonian", density=10.0, smear_length=1e-6,
                 speed=1e-6)
    rep = evaluate(s)
    assert rep.regime == "compact"
    assert rep.window_nonempty
    assert rep.detectable == rep.measurement_ok


def test_margins_are_scale_invariant():
    # metres/kilograms/minutes instead of CGS: every dimensionless margin and
    # every verdict must come out identical
    scale = dict(mass=1e3, length=1e2, time=60.0)
    alt = CGS.rescaled(**scale)
    for radius, kind, density in [(1.0, "delta", 1.0), (2.5, "newtonian", 5.0),
                                  (1e-6, "delta", 5.0)]:
        rep = evaluate(scenario(radius, kind, density=density, speed=1e3))
        alt_rep = evaluate(ProbeScenario(
            radius=radius / scale["length"],
            probe_speed=1e3 / scale["length"] * scale["time"],
            collapse_length=A_REF / scale["length"],
            kind=kind,
            density=density * scale["length"] ** 3 / scale["mass"],
            constants=alt,
        ))
        assert alt_rep.detectable == rep.detectable
        assert math.isclose(alt_rep.window_margin, rep.window_margin,
                            rel_tol=1e-9)
        for a_, b_ in zip(alt_rep.inequalities, rep.inequalities):
            assert math.isclose(a_.margin, b_.margin, rel_tol=1e-9)
        assert math.isclose(alt_rep.collapse_time / rep.collapse_time,
                            1.0 / scale["time"], rel_tol=1e-9)


def test_report_type():
    assert isinstance(evaluate(scenario(1.0, "delta", density=1.0)),
                      DetectabilityReport)
