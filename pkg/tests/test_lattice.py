"""Lattice systems, smeared fields, kernel quadratic forms, noise sampling."""
from __future__ import annotations

import math

import numpy as np
import pytest

from cslgrav.constants import NATURAL
from cslgrav.kernels import off_diagonal_decay_rate
from cslgrav.lattice import (
    DensityMatrix,
    KernelOperator,
    LatticeSystem,
    QuantumState,
    smeared_mass_fields,
)
from cslgrav.params import CollapseModel


def two_site_system(n=32, sep=8, spacing=0.5, smear=1.0, ndim=1, mass=1.0,
                    hamiltonian=None):
    shape = (n,) * ndim
    site0 = (0,) * ndim
    site1 = (sep,) + (0,) * (ndim - 1)
    return LatticeSystem(
        shape=shape, spacing=spacing, smear=smear, masses=(mass,),
        configurations=((site0,), (site1,)), hamiltonian=hamiltonian,
        constants=NATURAL,
    )


# --- construction validation -------------------------------------------------

def test_rejects_bad_dimensionality():
    with pytest.raises(ValueError):
        LatticeSystem(shape=(8, 8), spacing=1.0, smear=1.0, masses=(1.0,),
                      configurations=(((0, 0),),))


def test_rejects_smear_below_spacing():
    with pytest.raises(ValueError):
        two_site_system(spacing=1.0, smear=0.5)


def test_rejects_out_of_range_site():
    with pytest.raises(ValueError):
        LatticeSystem(shape=(8,), spacing=1.0, smear=1.0, masses=(1.0,),
                      configurations=(((9,),),))


def test_rejects_non_hermitian_hamiltonian():
    h = np.array([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        two_site_system(hamiltonian=h)


def test_rejects_wrong_particle_count():
    with pytest.raises(ValueError):
        LatticeSystem(shape=(8,), spacing=1.0, smear=1.0, masses=(1.0, 2.0),
                      configurations=(((0,),),))


# --- smeared fields -----------------------------------------------------------

def test_fields_integrate_to_total_mass():
    for ndim in (1, 3):
        n = 32 if ndim == 1 else 12
        sys_ = two_site_system(n=n, sep=3, ndim=ndim, mass=2.5)
        fields = smeared_mass_fields(sys_)
        sums = fields.reshape(sys_.dim, -1).sum(axis=1) * sys_.cell_volume
        np.testing.assert_allclose(sums, 2.5, rtol=1e-12)


def test_fields_translation_covariant():
    sys_ = two_site_system(n=48, sep=5)
    fields = smeared_mass_fields(sys_)
    np.testing.assert_allclose(fields[1], np.roll(fields[0], 5), rtol=1e-12)


def test_field_peak_at_site_and_symmetric():
    sys_ = two_site_system(n=33, sep=0)
    f = smeared_mass_fields(sys_)[0]
    assert np.argmax(f) == 0
    np.testing.assert_allclose(f[1:], f[:0:-1], rtol=1e-12)  # even around site


# --- gram matrices ------------------------------------------------------------

def test_gram_symmetric_psd_both_kernels():
    sys3 = LatticeSystem(
        shape=(16, 16, 16), spacing=0.5, smear=1.0, masses=(1.0,),
        configurations=(((0, 0, 0),), ((4, 0, 0),), ((0, 7, 2),)),
        constants=NATURAL,
    )
    fields = smeared_mass_fields(sys3)
    for model in (CollapseModel.delta(2.0), CollapseModel.newtonian(2.0)):
        q = KernelOperator(model, sys3).gram(fields)
        np.testing.assert_allclose(q, q.T, rtol=0, atol=1e-12 * np.abs(q).max())
        evals = np.linalg.eigvalsh(q)
        assert evals.min() >= -1e-12 * evals.max()


def test_gram_matches_pairwise_quadratic_forms():
    sys3 = LatticeSystem(
        shape=(12, 12, 12), spacing=0.5, smear=1.0, masses=(1.0,),
        configurations=(((0, 0, 0),), ((3, 1, 0),)), constants=NATURAL,
    )
    fields = smeared_mass_fields(sys3)
    for model in (CollapseModel.delta(1.7), CollapseModel.newtonian(1.7)):
        op = KernelOperator(model, sys3)
        q = op.gram(fields)
        for i in range(2):
            for j in range(2):
                assert math.isclose(q[i, j], op.pair_form(fields[i], fields[j]),
                                    rel_tol=1e-10)


def test_newtonian_requires_3d():
    sys1 = two_site_system()
    with pytest.raises(ValueError):
        KernelOperator(CollapseModel.newtonian(1.0), sys1)


def test_delta_decay_rate_matches_continuum_formula():
    # lattice Gram-derived rate vs the closed-form pair function, far from
    # wrap-around and with spacing << smear
    n, sep, spacing, smear = 128, 24, 0.25, 2.0
    sys_ = two_site_system(n=n, sep=sep, spacing=spacing, smear=smear)
    model = CollapseModel.delta(3.0)
    q = KernelOperator(model, sys_).gram(smeared_mass_fields(sys_))
    rate_lattice = 0.5 * (q[0, 0] + q[1, 1] - 2 * q[0, 1])
    d = sep * spacing
    rate_cont = off_diagonal_decay_rate(
        model, [1.0], [[0.0, 0.0, 0.0]], [[d, 0.0, 0.0]], smear)
    # 1D lattice with transverse directions integrated out matches the 3D
    # two-point rate for a single particle displaced along one axis
    assert math.isclose(rate_lattice, rate_cont, rel_tol=2e-3)


def test_newtonian_decay_rate_matches_continuum_formula():
    n, spacing, smear = 64, 0.5, 2.0
    sep = 12
    sys_ = LatticeSystem(
        shape=(n, n, n), spacing=spacing, smear=smear, masses=(1.0,),
        configurations=(((0, 0, 0),), ((sep, 0, 0),)), constants=NATURAL,
    )
    model = CollapseModel.newtonian(3.0)
    q = KernelOperator(model, sys_).gram(smeared_mass_fields(sys_))
    rate_lattice = 0.5 * (q[0, 0] + q[1, 1] - 2 * q[0, 1])
    d = sep * spacing
    rate_cont = off_diagonal_decay_rate(
        model, [1.0], [[0.0, 0.0, 0.0]], [[d, 0.0, 0.0]], smear)
    # periodic images and the discrete 1/khat^2 bias the box result at the
    # few-percent level for a 32-smear box; keep a visible but honest bound
    assert math.isclose(rate_lattice, rate_cont, rel_tol=0.05)


# --- noise sampling -----------------------------------------------------------

def test_noise_functional_covariance_delta():
    sys_ = two_site_system(n=32, sep=6)
    model = CollapseModel.delta(2.0)
    op = KernelOperator(model, sys_)
    fields = smeared_mass_fields(sys_)
    q = op.gram(fields)
    dt = 0.25
    rng = np.random.default_rng(42)
    n_draw = 4000
    s = np.array([op.noise_functionals(op.sample_noise(rng, dt), fields)
                  for _ in range(n_draw)])
    cov = np.cov(s.T)
    np.testing.assert_allclose(cov, q / (4 * dt), rtol=0.1, atol=0.02 * q.max())
    mean_tol = 4 * float(np.sqrt(np.diag(q).max() / (4 * dt) / n_draw))
    np.testing.assert_allclose(s.mean(axis=0), 0.0, atol=mean_tol)


def test_noise_functional_covariance_newtonian():
    sys_ = LatticeSystem(
        shape=(12, 12, 12), spacing=0.5, smear=1.0, masses=(1.0,),
        configurations=(((0, 0, 0),), ((3, 0, 0),)), constants=NATURAL,
    )
    model = CollapseModel.newtonian(2.0)
    op = KernelOperator(model, sys_)
    fields = smeared_mass_fields(sys_)
    q = op.gram(fields)
    dt = 0.5
    rng = np.random.default_rng(43)
    s = np.array([op.noise_functionals(op.sample_noise(rng, dt), fields)
                  for _ in range(3000)])
    cov = np.cov(s.T)
    np.testing.assert_allclose(cov, q / (4 * dt), rtol=0.12, atol=0.03 * q.max())


def test_noise_zero_mode_absent_newtonian():
    sys_ = LatticeSystem(
        shape=(8, 8, 8), spacing=1.0, smear=1.0, masses=(1.0,),
        configurations=(((0, 0, 0),),), constants=NATURAL,
    )
    op = KernelOperator(CollapseModel.newtonian(1.0), sys_)
    rng = np.random.default_rng(3)
    for _ in range(5):
        slice_ = op.sample_noise(rng, 0.1)
        assert abs(slice_.values.sum()) < 1e-9 * np.abs(slice_.values).max()


# --- state containers ---------------------------------------------------------

def test_quantum_state_normalization():
    s = QuantumState(np.array([3.0, 4.0]))
    np.testing.assert_allclose(s.probabilities, [0.36, 0.64], rtol=1e-12)
    n = s.normalized()
    assert math.isclose(np.linalg.norm(n.amplitudes), 1.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        QuantumState(np.zeros(3))


def test_density_matrix_validation():
    good = DensityMatrix(np.diag([0.3, 0.7]).astype(complex))
    good.validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6])).validate()  # trace 1.1
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.2, 0], [0, -0.2]])).validate()  # negative
    pure = DensityMatrix.pure(QuantumState(np.array([1.0, 1.0j])))
    pure.validate()
    np.testing.assert_allclose(np.diag(pure.matrix).real, [0.5, 0.5], rtol=1e-12)
