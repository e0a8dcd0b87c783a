"""Physical constants in unprefixed CGS, with Planck-scale combinations.

All stored values are CODATA-2018-era reference numbers. The Planck-scale
fields are stored explicitly rather than derived so that a corrupted value of
any one of them is caught by `validate()` (and by the test suite) instead of
propagating silently. Constants are not configurable at run time by default,
but every routine that needs them accepts an instance, so sensitivity studies
can pass a modified copy (e.g. `replace(CGS, hbar=...)` or unit-rescaled sets).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .quantities import Quantity, quantity

__all__ = ["PhysicalConstants", "CGS", "NATURAL", "planck_mass", "planck_time", "planck_length"]


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = 6.67430e-8            # gravitational constant [cm^3 g^-1 s^-2]
    hbar: float = 1.054571817e-27    # reduced Planck constant [erg s]
    c: float = 2.99792458e10         # speed of light [cm s^-1]
    planck_mass: float = 2.176434e-5     # sqrt(hbar c / G) [g]
    planck_time: float = 5.391247e-44    # hbar / (planck_mass c^2) [s]
    planck_length: float = 1.616255e-33  # planck_time * c [cm]
    nucleon_mass: float = 1.67262192369e-24  # proton mass [g]

    def validate(self, rtol: float = 1e-3) -> None:
        """Check the stored Planck-scale values against their definitions.

        Raises ValueError if any derived combination disagrees beyond rtol.
        """
        checks = {
            "planck_mass": ((self.hbar * self.c / self.G) ** 0.5, self.planck_mass),
            "planck_time": (self.hbar / (self.planck_mass * self.c**2), self.planck_time),
            "planck_length": (self.planck_time * self.c, self.planck_length),
        }
        for name, (derived, stored) in checks.items():
            if abs(derived - stored) > rtol * abs(stored):
                raise ValueError(
                    f"inconsistent constants: {name} stored {stored:.6e}, "
                    f"derived {derived:.6e}"
                )

    # Dimension-tagged views, used by the solver layer and the tests.
    @property
    def G_q(self) -> Quantity:
        return quantity(self.G, "cm^3*g^-1*s^-2")

    @property
    def hbar_q(self) -> Quantity:
        return quantity(self.hbar, "erg*s")

    @property
    def c_q(self) -> Quantity:
        return quantity(self.c, "cm/s")

    @property
    def planck_mass_q(self) -> Quantity:
        return quantity(self.planck_mass, "g")

    @property
    def nucleon_mass_q(self) -> Quantity:
        return quantity(self.nucleon_mass, "g")

    def rescaled(self, mass: float = 1.0, length: float = 1.0, time: float = 1.0) -> "PhysicalConstants":
        """Same physics expressed in units scaled by the given CGS factors.

        E.g. `rescaled(length=100.0)` converts every stored value from
        centimetre-based to metre-based units. Used by the scale-consistency
        tests: dimensionless verdicts and margins must not change.
        """
        def conv(value: float, m: int, l: int, t: int) -> float:
            return value / (mass**m * length**l * time**t)

        return PhysicalConstants(
            G=conv(self.G, -1, 3, -2),
            hbar=conv(self.hbar, 1, 2, -1),
            c=conv(self.c, 0, 1, -1),
            planck_mass=conv(self.planck_mass, 1, 0, 0),
            planck_time=conv(self.planck_time, 0, 0, 1),
            planck_length=conv(self.planck_length, 0, 1, 0),
            nucleon_mass=conv(self.nucleon_mass, 1, 0, 0),
        )


CGS = PhysicalConstants()

# Convenience set for dynamics tests: hbar = 1 keeps every lattice timescale
# O(1). Planck-scale entries are recomputed so validate() still passes.
NATURAL = PhysicalConstants(
    G=1.0,
    hbar=1.0,
    c=1.0,
    planck_mass=1.0,
    planck_time=1.0,
    planck_length=1.0,
    nucleon_mass=1.0,
)


def planck_mass(constants: PhysicalConstants = CGS) -> Quantity:
    """sqrt(hbar c / G) [g], derived from the stored fundamental trio."""
    return (constants.hbar_q * constants.c_q / constants.G_q).sqrt()


def planck_time(constants: PhysicalConstants = CGS) -> Quantity:
    """hbar / (planck_mass c^2) [s]."""
    return constants.hbar_q / (planck_mass(constants) * constants.c_q**2)


def planck_length(constants: PhysicalConstants = CGS) -> Quantity:
    """planck_time * c [cm]."""
    return planck_time(constants) * constants.c_q


def scaled_copy(constants: PhysicalConstants, **overrides: float) -> PhysicalConstants:
    """dataclasses.replace wrapper kept here so callers need one import."""
    return replace(constants, **overrides)
