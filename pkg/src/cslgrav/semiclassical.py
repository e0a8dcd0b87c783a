"""Can a superposed sphere's gravitational field be measured before collapse?

Scenario: a sphere (mass M, radius R, density D) sits in an equal
superposition of two center positions; a probe of comparable mass flying by
at speed v tries to read the field sourced by the superposition (which only a
mean-field coupling would produce) before the superposition collapses.

The decision chain, with mu_p the Planck mass:

  resolution   the probe's velocity uncertainty floor is hbar/(M Z) for a
               position uncertainty ~ Z
  measurement  deflection beats the floor iff (M / mu_p)^2 > v / c
  geometry     Z > max(R, a') -- the probe must clear both the sphere and the
               effective smeared mass distributions (a' = smearing length)
  survival     the collapse time must exceed the measurement time Z / v

Collapse times are order-of-magnitude pointer-decay estimates with the
gravitationally suggested strengths at coefficient one (gamma ~ G a^2/hbar,
gamma' ~ G/hbar):

  R < a (either kernel)   tau ~ a hbar / (G M^2)
  R > a, delta kernel     tau ~ hbar / (G M D a^2)
  R > a, newtonian kernel tau ~ hbar R / (G M^2)

Optimizing the probe speed up to the measurement boundary turns survival +
geometry into a Z-window whose emptiness decides the verdict:

  R < a:                 max(R, a') < Z < a      (empty whenever a' = a)
  R > a, delta:          max(R, a') < Z < M/(D a^2)
  R > a, newtonian:      max(R, a') < Z < R      (always empty)

so with a' = a a compact superposition is never detectable, and with the
newtonian kernel an extended one never is, while the delta kernel lets
sufficiently large dense spheres through (M grows like R^3).

All strength inequalities are order-of-magnitude: every report carries
``order_of_magnitude = True``, margins instead of bare booleans, and a
parallel set of margins computed with the exact model prefactors
(gamma = (4 pi / sqrt(3)) G a^2/hbar, gamma' = G/(2 hbar)) for users who want
to see how far coefficient-one arithmetic is from the model-closed values;
the verdict itself always follows the coefficient-one strengths.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import CGS, PhysicalConstants
from .params import KernelKind

__all__ = [
    "ProbeScenario",
    "Inequality",
    "DetectabilityReport",
    "evaluate",
    "min_probe_mass_condition",
    "collapse_time_estimate",
    "random_sweep",
]

_MODEL_PREFACTOR = {
    KernelKind.DELTA: 4.0 * np.pi / np.sqrt(3.0),
    KernelKind.NEWTONIAN: 0.5,
}


@dataclass(frozen=True)
class ProbeScenario:
    """One sphere-plus-probe configuration.

    Give ``sphere_mass`` or ``density`` (or both, checked for consistency
    against mass = (4 pi / 3) D R^3).  ``separation`` (Z) is optional: when
    given, the report additionally evaluates the fixed-Z inequality chain.
    ``smear_length`` is the force-smearing radius a'; defaults to the
    collapse length a.
    """

    radius: float                     # R [cm]
    probe_speed: float                # v [cm/s]
    collapse_length: float            # a [cm]
    kind: KernelKind
    sphere_mass: float | None = None  # M [g]
    density: float | None = None      # D [g/cm^3]
    smear_length: float | None = None  # a' [cm]
    separation: float | None = None   # Z [cm]
    constants: PhysicalConstants = field(default=CGS)

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        for name in ("radius", "probe_speed", "collapse_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sphere_mass is None and self.density is None:
            raise ValueError("give sphere_mass or density")
        ball = 4.0 * np.pi * self.radius**3 / 3.0
        if self.sphere_mass is None:
            object.__setattr__(self, "sphere_mass", self.density * ball)
        elif self.density is None:
            object.__setattr__(self, "density", self.sphere_mass / ball)
        elif not np.isclose(self.sphere_mass, self.density * ball, rtol=1e-6):
            raise ValueError(
                "sphere_mass and density disagree: "
                f"{self.sphere_mass} vs (4pi/3) D R^3 = {self.density * ball}"
            )
        if not self.sphere_mass > 0:
            raise ValueError("sphere_mass must be positive")
        if not self.probe_speed < self.constants.c:
            raise ValueError("probe_speed must be below c")
        if self.smear_length is not None and not self.smear_length > 0:
            raise ValueError("smear_length must be positive")
        if self.separation is not None and not self.separation > 0:
            raise ValueError("separation must be positive")

    @property
    def smear(self) -> float:
        return self.collapse_length if self.smear_length is None else self.smear_length

    @property
    def compact(self) -> bool:
        """True when the sphere is smaller than the collapse length."""
        return self.radius < self.collapse_length


@dataclass(frozen=True)
class Inequality:
    """One decision inequality: satisfied iff lhs > rhs; margin = lhs/rhs."""

    name: str
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs > self.rhs

    @property
    def margin(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else np.inf


def collapse_time_estimate(scenario: ProbeScenario, model_prefactor: bool = False) -> float:
    """Order-of-magnitude superposition collapse time [s].

    Coefficient-one strengths by default; model_prefactor=True multiplies the
    strength by the exact model closure ((4 pi/sqrt 3) for delta, 1/2 for
    newtonian) -- a margin view only, never used for verdicts.
    """
    c_ = scenario.constants
    m_ = scenario.sphere_mass
    a_ = scenario.collapse_length
    if scenario.compact:
        rate = c_.G * m_**2 / (a_ * c_.hbar)
    elif scenario.kind is KernelKind.DELTA:
        rate = c_.G * a_**2 * m_ * scenario.density / c_.hbar
    else:
        rate = c_.G * m_**2 / (scenario.radius * c_.hbar)
    if model_prefactor:
        rate *= _MODEL_PREFACTOR[scenario.kind]
    return 1.0 / rate


def _window_high(scenario: ProbeScenario, model_prefactor: bool) -> float:
    """Largest Z surviving collapse at the best measurement-allowed speed.

    Equal to collapse_time * (G M^2 / hbar), evaluated in the per-regime
    cancelled form so that structural identities (newtonian extended: = R;
    compact: = a) hold exactly in floating point, not just algebraically.
    """
    if scenario.compact:
        high = scenario.collapse_length
    elif scenario.kind is KernelKind.DELTA:
        high = scenario.sphere_mass / (scenario.density * scenario.collapse_length**2)
    else:
        high = scenario.radius
    if model_prefactor:
        high /= _MODEL_PREFACTOR[scenario.kind]
    return high


def min_probe_mass_condition(
    sphere_mass: float,
    probe_speed: float,
    constants: PhysicalConstants = CGS,
) -> Inequality:
    """Good-measurement condition (M / planck mass)^2 > v / c."""
    return Inequality(
        name="measurement",
        lhs=(sphere_mass / constants.planck_mass) ** 2,
        rhs=probe_speed / constants.c,
    )


@dataclass(frozen=True)
class DetectabilityReport:
    """Verdict and margins for one scenario.

    ``detectable`` = measurement condition holds at the scenario's probe
    speed AND the Z-window is non-empty -- both at coefficient-one strengths.
    ``model_window_margin`` repeats the window margin with the exact model
    strength prefactors, for comparison only.  When the scenario fixes Z, the
    fixed-Z chain (geometry, survival at the given probe speed, and the
    velocity-resolution floor hbar/(M Z)) is appended to ``inequalities``.
    """

    scenario: ProbeScenario
    regime: str                      # "compact" or "extended"
    inequalities: tuple[Inequality, ...]
    window_low: float
    window_high: float
    collapse_time: float
    measurement_ok: bool
    window_nonempty: bool
    detectable: bool
    order_of_magnitude: bool
    model_window_high: float
    velocity_floor: float | None     # hbar/(M Z), fixed-Z mode only

    @property
    def window_margin(self) -> float:
        return self.window_high / self.window_low

    @property
    def model_window_margin(self) -> float:
        return self.model_window_high / self.window_low


def evaluate(scenario: ProbeScenario) -> DetectabilityReport:
    """Evaluate the full decision chain for one scenario."""
    c_ = scenario.constants
    measurement = min_probe_mass_condition(
        scenario.sphere_mass, scenario.probe_speed, c_
    )
    low = max(scenario.radius, scenario.smear)
    high = _window_high(scenario, model_prefactor=False)
    model_high = _window_high(scenario, model_prefactor=True)
    window = Inequality(name="z-window", lhs=high, rhs=low)
    tau = collapse_time_estimate(scenario)
    ineqs = [measurement, window]
    velocity_floor = None
    if scenario.separation is not None:
        z_ = scenario.separation
        velocity_floor = c_.hbar / (scenario.sphere_mass * z_)
        ineqs.append(Inequality(name="geometry", lhs=z_, rhs=low))
        ineqs.append(
            Inequality(name="survival", lhs=tau, rhs=z_ / scenario.probe_speed)
        )
    return DetectabilityReport(
        scenario=scenario,
        regime="compact" if scenario.compact else "extended",
        inequalities=tuple(ineqs),
        window_low=low,
        window_high=high,
        collapse_time=tau,
        measurement_ok=measurement.satisfied,
        window_nonempty=window.satisfied,
        detectable=measurement.satisfied and window.satisfied,
        order_of_magnitude=True,
        model_window_high=model_high,
        velocity_floor=velocity_floor,
    )


def random_sweep(
    n: int,
    rng: np.random.Generator,
    constants: PhysicalConstants = CGS,
) -> list[DetectabilityReport]:
    """Evaluate n random scenarios spanning both kernels and regimes.

    Radii span 1e-7..1e2 cm, densities 1e-3..1e2 g/cm^3, collapse lengths
    1e-6..1e-4 cm, probe speeds 1e-8..0.99 c, smear lengths a' between a/100
    and 100 a -- log-uniform throughout.
    """
    out = []
    for _ in range(n):
        kind = KernelKind.DELTA if rng.random() < 0.5 else KernelKind.NEWTONIAN
        a_ = 10.0 ** rng.uniform(-6, -4)
        scenario = ProbeScenario(
            radius=10.0 ** rng.uniform(-7, 2),
            probe_speed=constants.c * 10.0 ** rng.uniform(-8, np.log10(0.99)),
            collapse_length=a_,
            kind=kind,
            density=10.0 ** rng.uniform(-3, 2),
            smear_length=a_ * 10.0 ** rng.uniform(-2, 2),
            constants=constants,
        )
        out.append(evaluate(scenario))
    return out
