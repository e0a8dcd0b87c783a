"""Constant sets: stored values, derived combinations, unit rescaling."""
from __future__ import annotations

import math

import pytest

from cslgrav.constants import (
    CGS,
    NATURAL,
    PhysicalConstants,
    planck_length,
    planck_mass,
    planck_time,
)


def test_reference_values_in_range():
    # sanity bands, not precision checks: catches unit slips (SI vs CGS)
    assert 6.6e-8 < CGS.G < 6.8e-8
    assert 1.05e-27 < CGS.hbar < 1.06e-27
    assert 2.99e10 < CGS.c < 3.0e10
    assert 1.6e-24 < CGS.nucleon_mass < 1.7e-24
    assert 2.1e-5 < CGS.planck_mass < 2.2e-5


def test_validate_passes_for_shipped_sets():
    CGS.validate()
    NATURAL.validate()


def test_validate_catches_corruption():
    bad = PhysicalConstants(planck_mass=CGS.planck_mass * 1.05)
    with pytest.raises(ValueError):
        bad.validate()


def test_planck_combinations_match_stored():
    assert math.isclose(planck_mass(CGS).in_unit("g"), CGS.planck_mass, rel_tol=1e-4)
    assert math.isclose(planck_time(CGS).in_unit("s"), CGS.planck_time, rel_tol=1e-4)
    assert math.isclose(planck_length(CGS).in_unit("cm"), CGS.planck_length, rel_tol=1e-4)


def test_natural_units_are_unity():
    assert NATURAL.G == NATURAL.hbar == NATURAL.c == 1.0
    assert NATURAL.planck_mass == NATURAL.planck_time == NATURAL.planck_length == 1.0


def test_rescaled_identity():
    same = CGS.rescaled()
    assert same == CGS


def test_rescaled_to_si_lengths():
    mks = CGS.rescaled(mass=1e3, length=1e2, time=1.0)
    assert math.isclose(mks.G, 6.67430e-11, rel_tol=1e-12)
    assert math.isclose(mks.hbar, 1.054571817e-34, rel_tol=1e-12)
    assert math.isclose(mks.c, 2.99792458e8, rel_tol=1e-12)
    mks.validate()


def test_rescaled_preserves_dimensionless_combinations():
    # hbar c / (G m^2) is dimensionless; the same physical mass expressed in
    # rescaled units must give the identical number
    for scale in [(1e3, 1e2, 1.0), (2.0, 5.0, 7.0), (1.0, 1e-3, 1e6)]:
        other = CGS.rescaled(*scale)
        mass_cgs = 3.7e-5
        mass_other = mass_cgs / scale[0]
        combo_cgs = CGS.hbar * CGS.c / (CGS.G * mass_cgs**2)
        combo_other = other.hbar * other.c / (other.G * mass_other**2)
        assert math.isclose(combo_cgs, combo_other, rel_tol=1e-12)


def test_quantity_views_carry_dimensions():
    assert CGS.G_q.in_unit("cm^3/g/s^2") == CGS.G
    assert CGS.hbar_q.in_unit("erg*s") == CGS.hbar
    assert CGS.c_q.in_unit("cm/s") == CGS.c
    # sqrt(hbar c / G) must come out as a clean mass
    assert planck_mass(CGS).in_unit("g") > 0
