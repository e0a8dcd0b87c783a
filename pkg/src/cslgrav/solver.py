"""Closed-form collapse parameters from vacuum-fluctuation model inputs.

Matching the collapse rate implied by the fluctuation two-point function to
the heating rate budget fixes the model parameters in closed form.

Monopole model (inputs: event mass mu [g], event density Ptilde [s cm^-3]):

    a        = (3/pi^2)^(1/4) * (1/4) * sqrt(hbar / (G mu^2 Ptilde))
    lambda_m = G m^2 / (2 sqrt(3 pi) a hbar)
    gamma    = 1 / (4 mu^2 Ptilde)

so the product lambda_m * a = G m^2 / (2 sqrt(3 pi) hbar) is independent of
(mu, Ptilde).  The solution balances the defining pair

    rate:    lambda_m = m^2 / (32 pi^(3/2) mu^2 a^3 Ptilde)
    heating: lambda_m * 3 hbar^2 / (4 m a^2) = 2 sqrt(pi) m (G mu)^2 Ptilde / a

(collapse-noise energy gain = fluctuation-force Brownian energy gain), whose
relative residuals are exposed by ``MonopoleSolution.residuals``.

Dipole model: the analogous pair of relations admits no freedom in
Ptilde p^2 -- they force

    Ptilde p^2 = (3 / 8 pi) hbar / G        (any a)
    lambda_m   = G m^2 / (6 sqrt(pi) a hbar)
    gamma'     = 3 / (16 pi Ptilde p^2) = G / (2 hbar)

and lambda_dipole / lambda_monopole = 1/sqrt(3) at equal a.

Named scenarios:

* ``planck-nucleon-monopole``: mu = Planck mass, one event per nucleon
  Compton volume per Planck time, i.e. Ptilde = t_planck * (M c / hbar)^3
  with M the nucleon (proton) mass.  Gives a ~ 1.4e-5 cm and
  lambda(nucleon) ~ 2e-24 s^-1.
* ``planck-dipole``: interval = Planck time and p = hbar / c, which turns
  Ptilde p^2 = (3/8 pi) hbar/G into one dipole per volume
  (8 pi / 3)^(1/3) hbar / (mu_planck c) cubed -- events per volume
  (3 / 8 pi) (mu_planck c / hbar)^3.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CGS, PhysicalConstants
from .params import CollapseModel

__all__ = [
    "MonopoleSolution",
    "DipoleSolution",
    "solve_monopole",
    "solve_dipole",
    "planck_nucleon_monopole",
    "planck_dipole",
    "SCENARIOS",
    "solve_scenario",
]


@dataclass(frozen=True)
class MonopoleSolution:
    """Collapse parameters fixed by a monopole fluctuation background."""

    event_mass: float        # mu [g]
    event_density: float     # Ptilde [s cm^-3]
    smear: float             # a [cm]
    gamma: float             # [cm^3 s^-1 g^-2]
    constants: PhysicalConstants

    def collapse_rate(self, mass: float) -> float:
        """Single-particle collapse rate lambda_m [s^-1] for mass m [g]."""
        c_ = self.constants
        return c_.G * mass**2 / (2.0 * np.sqrt(3.0 * np.pi) * self.smear * c_.hbar)

    def rate_length_product(self, mass: float) -> float:
        """lambda_m * a = G m^2 / (2 sqrt(3 pi) hbar); model-independent."""
        return self.collapse_rate(mass) * self.smear

    def collapse_model(self) -> CollapseModel:
        return CollapseModel.delta(self.gamma)

    def residuals(self, mass: float = 1.0) -> dict[str, float]:
        """Relative residuals of the two defining relations (should be ~1e-16):
        rate    lambda_m = m^2 / (32 pi^(3/2) mu^2 a^3 Ptilde), and
        heating lambda_m 3 hbar^2/(4 m a^2) = 2 sqrt(pi) m (G mu)^2 Ptilde / a.
        """
        c_ = self.constants
        lam = self.collapse_rate(mass)
        rate_rhs = mass**2 / (
            32.0 * np.pi**1.5 * self.event_mass**2 * self.smear**3 * self.event_density
        )
        lhs_heat = lam * 3.0 * c_.hbar**2 / (4.0 * mass * self.smear**2)
        rhs_heat = (
            2.0 * np.sqrt(np.pi) * mass * (c_.G * self.event_mass) ** 2
            * self.event_density / self.smear
        )
        return {
            "rate": lam / rate_rhs - 1.0,
            "heating": lhs_heat / rhs_heat - 1.0,
        }


@dataclass(frozen=True)
class DipoleSolution:
    """Collapse parameters fixed by a dipole fluctuation background."""

    smear: float                  # a [cm]; carried through, not constrained
    moment_density: float         # Ptilde p^2 [g^2 s cm^-1], forced value
    gamma_prime: float            # [cm s^-1 g^-2]
    constants: PhysicalConstants

    def collapse_rate(self, mass: float, smear: float | None = None) -> float:
        """lambda_m = G m^2 / (6 sqrt(pi) a hbar) [s^-1]."""
        a_ = self.smear if smear is None else smear
        c_ = self.constants
        return c_.G * mass**2 / (6.0 * np.sqrt(np.pi) * a_ * c_.hbar)

    def collapse_model(self) -> CollapseModel:
        return CollapseModel.newtonian(self.gamma_prime)

    def events_per_volume(self) -> float:
        """Events per unit volume [cm^-3] with interval = Planck time and
        moment p = hbar/c: P/L^3 = Ptilde p^2 / (p^2 T) works out to
        (3/8 pi) (planck_mass c / hbar)^3 -- about one pair per Planck cell.
        """
        c_ = self.constants
        p_ = c_.hbar / c_.c
        return self.moment_density / (p_**2 * c_.planck_time)

    def residuals(self, mass: float = 1.0) -> dict[str, float]:
        """Relative residuals of the defining pair (should be ~1e-16)."""
        c_ = self.constants
        lam = self.collapse_rate(mass)
        rate_rhs = mass**2 / (
            16.0 * np.pi**1.5 * self.smear * self.moment_density
        )
        lhs_heat = lam * 3.0 * c_.hbar**2 / (4.0 * mass * self.smear**2)
        rhs_heat = (
            np.sqrt(np.pi) * c_.G**2 * mass * self.moment_density
            / (3.0 * self.smear**3)
        )
        return {
            "rate": lam / rate_rhs - 1.0,
            "heating": lhs_heat / rhs_heat - 1.0,
        }


def solve_monopole(
    event_mass: float,
    event_density: float,
    constants: PhysicalConstants = CGS,
) -> MonopoleSolution:
    """Solve the monopole relations for (a, lambda, gamma) in closed form."""
    if not event_mass > 0 or not event_density > 0:
        raise ValueError("event_mass and event_density must be positive")
    c_ = constants
    smear = (
        (3.0 / np.pi**2) ** 0.25
        * 0.25
        * np.sqrt(c_.hbar / (c_.G * event_mass**2 * event_density))
    )
    gamma = 1.0 / (4.0 * event_mass**2 * event_density)
    return MonopoleSolution(
        event_mass=event_mass,
        event_density=event_density,
        smear=smear,
        gamma=gamma,
        constants=constants,
    )


def solve_dipole(
    smear: float,
    constants: PhysicalConstants = CGS,
) -> DipoleSolution:
    """Solve the dipole relations: Ptilde p^2 is forced, independent of a."""
    if not smear > 0:
        raise ValueError("smear must be positive")
    c_ = constants
    moment_density = (3.0 / (8.0 * np.pi)) * c_.hbar / c_.G
    gamma_prime = 3.0 / (16.0 * np.pi * moment_density)
    return DipoleSolution(
        smear=smear,
        moment_density=moment_density,
        gamma_prime=gamma_prime,
        constants=constants,
    )


def planck_nucleon_monopole(constants: PhysicalConstants = CGS) -> MonopoleSolution:
    """mu = Planck mass; one event per nucleon Compton volume per Planck time."""
    c_ = constants
    compton = c_.hbar / (c_.nucleon_mass * c_.c)
    event_density = c_.planck_time / compton**3
    return solve_monopole(c_.planck_mass, event_density, constants)


def planck_dipole(constants: PhysicalConstants = CGS) -> DipoleSolution:
    """Dipole scenario with interval = Planck time and p = hbar/c.

    The forced Ptilde p^2 then corresponds to events per volume
    (3/8 pi) (mu c / hbar)^3 with mu the Planck mass (about one pair per
    Planck-scale cell); the smear carried on the solution is the
    planck-nucleon-monopole value so the two scenarios are directly
    comparable.
    """
    mono = planck_nucleon_monopole(constants)
    return solve_dipole(mono.smear, constants)


SCENARIOS = {
    "planck-nucleon-monopole": planck_nucleon_monopole,
    "planck-dipole": planck_dipole,
}


def solve_scenario(name: str, constants: PhysicalConstants = CGS):
    try:
        factory = SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise KeyError(f"unknown scenario {name!r}; known: {known}") from None
    return factory(constants)
