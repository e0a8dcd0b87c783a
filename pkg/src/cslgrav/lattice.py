"""Discretised quantum systems and lattice representations of the kernels.

A system lives on a periodic lattice (1D or 3D). Its Hilbert space is spanned
by a finite list of N-particle placement configurations; each configuration c
has a smeared mass-density field A_c(x) on the lattice, built by convolving
point masses with a normalised Gaussian of width a. All collapse dynamics is
driven by quadratic forms of these fields under the inverse correlation
kernel, evaluated here with periodic FFT symbols:

    delta:      ginv(k) = gamma_eff                 (flat)
    newtonian:  ginv(k) = 4 pi gamma' / khat^2      (khat^2 the discrete
                Laplacian symbol; zero mode projected out)

The newtonian zero mode carries no physics: every difference of configuration
fields integrates to zero (same total mass), and the sampled noise field is
built as a lattice divergence, so it has no zero mode either. For 1D systems
only the delta kernel is meaningful (its transverse directions factorise into
the constant (4 pi a^2)^{-1}); requesting the newtonian kernel in 1D raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CGS, PhysicalConstants
from .params import CollapseModel, KernelKind

__all__ = [
    "LatticeSystem",
    "QuantumState",
    "DensityMatrix",
    "NoiseSlice",
    "KernelOperator",
    "smeared_mass_fields",
]


@dataclass(frozen=True)
class LatticeSystem:
    """Periodic lattice plus the configuration basis of an N-particle system.

    shape: sites per axis, length 1 or 3. spacing: dx [cm]. smear: a [cm],
    must be >= spacing (narrower smearing than the grid resolves is an error).
    masses: (N,) particle masses [g]. configurations: for each basis state,
    a tuple of per-particle site-index tuples. hamiltonian: (dim, dim)
    Hermitian matrix [erg] in the configuration basis, or None for free decay.
    """

    shape: tuple[int, ...]
    spacing: float
    smear: float
    masses: tuple[float, ...]
    configurations: tuple[tuple[tuple[int, ...], ...], ...]
    hamiltonian: np.ndarray | None = None
    constants: PhysicalConstants = field(default=CGS, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(
            self,
            "configurations",
            tuple(tuple(tuple(int(i) for i in site) for site in config)
                  for config in self.configurations),
        )
        d = len(self.shape)
        if d not in (1, 3):
            raise ValueError(f"lattice dimension must be 1 or 3, got {d}")
        if any(n < 2 for n in self.shape):
            raise ValueError("need at least 2 sites per axis")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be positive")
        if self.smear < self.spacing:
            raise ValueError(
                f"smear {self.smear} below lattice spacing {self.spacing}: "
                "the grid cannot resolve the smearing Gaussian"
            )
        if not self.masses or any(m <= 0 for m in self.masses):
            raise ValueError("particle masses must be positive")
        if not self.configurations:
            raise ValueError("need at least one configuration")
        n_part = len(self.masses)
        for config in self.configurations:
            if len(config) != n_part:
                raise ValueError("every configuration must place every particle")
            for site in config:
                if len(site) != d:
                    raise ValueError("site index arity must match lattice dimension")
                if any(not (0 <= i < n) for i, n in zip(site, self.shape)):
                    raise ValueError(f"site {site} outside lattice {self.shape}")
        if self.hamiltonian is not None:
            h = np.asarray(self.hamiltonian, dtype=complex)
            if h.shape != (self.dim, self.dim):
                raise ValueError(
                    f"hamiltonian shape {h.shape} != ({self.dim}, {self.dim})"
                )
            if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, np.abs(h).max())):
                raise ValueError("hamiltonian must be Hermitian")
            object.__setattr__(self, "hamiltonian", h)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension (number of configurations)."""
        return len(self.configurations)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.ndim

    @property
    def volume(self) -> float:
        return self.n_sites * self.cell_volume


def _separable_gaussian_kernel(system: LatticeSystem) -> np.ndarray:
    """Normalised periodic Gaussian kernel centred on site 0 (sums to 1)."""
    axes = []
    for n in system.shape:
        idx = np.arange(n, dtype=float)
        u = np.minimum(idx, n - idx) * system.spacing  # minimum-image distance
        k1 = np.exp(-(u**2) / (2.0 * system.smear**2))
        axes.append(k1 / k1.sum())
    kernel = axes[0]
    for k1 in axes[1:]:
        kernel = np.multiply.outer(kernel, k1)
    return kernel


def smeared_mass_fields(system: LatticeSystem) -> np.ndarray:
    """Mass-density field of every configuration: (dim, *shape) [g cm^-d].

    Each particle contributes mass * kernel / cell_volume centred on its
    site, so the lattice integral of each field is exactly the total mass.
    """
    kernel = _separable_gaussian_kernel(system)
    fields = np.zeros((system.dim,) + system.shape, dtype=float)
    axes_all = tuple(range(system.ndim))
    for c, config in enumerate(system.configurations):
        for mass, site in zip(system.masses, config):
            fields[c] += mass * np.roll(kernel, shift=site, axis=axes_all)
    fields /= system.cell_volume
    return fields


@dataclass
class QuantumState:
    """Amplitudes in the configuration basis plus an importance log-weight."""

    amplitudes: np.ndarray
    log_weight: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        n = np.linalg.norm(self.amplitudes)
        if not np.isfinite(n) or n == 0:
            raise ValueError("amplitudes must be finite and non-null")

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def normalized(self) -> "QuantumState":
        return QuantumState(self.amplitudes / np.linalg.norm(self.amplitudes),
                            self.log_weight)


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive matrix in config basis."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)

    def validate(self, tol: float = 1e-9) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        scale = max(1.0, float(np.abs(m).max()))
        if not np.allclose(m, m.conj().T, atol=tol * scale):
            raise ValueError("density matrix must be Hermitian")
        tr = float(m.trace().real)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr} != 1 beyond tolerance {tol}")
        floor = float(np.linalg.eigvalsh(m).min())
        if floor < -tol:
            raise ValueError(f"negative eigenvalue {floor} beyond tolerance {tol}")

    @classmethod
    def pure(cls, state: QuantumState) -> "DensityMatrix":
        a = state.amplitudes / np.linalg.norm(state.amplitudes)
        return cls(np.outer(a, a.conj()))


@dataclass(frozen=True)
class NoiseSlice:
    """One time-slice realisation of the classical noise field.

    values: lattice array [noise units: field * (g cm^-d) integrates against
    mass densities]; dt: slice duration [s]; lineage: (seed, stream, step)
    identifying the counter-based substream that produced it.
    """

    values: np.ndarray
    dt: float
    lineage: tuple[int, ...] = ()


class KernelOperator:
    """Inverse-kernel quadratic forms and noise sampling on one lattice."""

    def __init__(self, model: CollapseModel, system: LatticeSystem):
        if model.kind is KernelKind.NEWTONIAN and system.ndim != 3:
            raise ValueError("newtonian kernel requires a 3D lattice")
        self.model = model
        self.system = system
        d = system.ndim
        if model.kind is KernelKind.DELTA:
            # transverse Gaussian directions integrate out to (4 pi a^2)^-1 each
            self.strength_eff = model.strength * (4.0 * math.pi * system.smear**2) ** ((d - 3) / 2.0)
            self._symbol = None
        else:
            self.strength_eff = model.strength
            k_axes = [2.0 * np.pi * np.fft.fftfreq(n, d=system.spacing) for n in system.shape]
            khat2 = 0.0
            for ax, k in enumerate(k_axes):
                stencil = (2.0 - 2.0 * np.cos(k * system.spacing)) / system.spacing**2
                shape = [1] * d
                shape[ax] = k.size
                khat2 = khat2 + stencil.reshape(shape)
            with np.errstate(divide="ignore"):
                sym = 4.0 * np.pi * model.strength / khat2
            sym[(0,) * d] = 0.0  # zero mode projected out
            self._symbol = sym

    # --- quadratic forms -------------------------------------------------
    def pair_form(self, f: np.ndarray, g: np.ndarray) -> float:
        """<f, G^-1 g> for real lattice fields f, g."""
        sys = self.system
        if self.model.kind is KernelKind.DELTA:
            return float(self.strength_eff * sys.cell_volume * np.sum(f * g))
        fk = np.fft.fftn(f)
        gk = np.fft.fftn(g)
        acc = np.sum(self._symbol * (fk.conj() * gk).real)
        return float(acc * sys.cell_volume**2 / sys.volume)

    def quadratic_form(self, f: np.ndarray) -> float:
        """Q(f) = <f, G^-1 f> >= 0."""
        return self.pair_form(f, f)

    def gram(self, fields: np.ndarray) -> np.ndarray:
        """Gram matrix Q_cc' = <A_c, G^-1 A_c'> for stacked fields (m, *shape)."""
        sys = self.system
        m = fields.shape[0]
        flat = fields.reshape(m, -1)
        if self.model.kind is KernelKind.DELTA:
            q = self.strength_eff * sys.cell_volume * (flat @ flat.T)
        else:
            fk = np.fft.fftn(fields, axes=tuple(range(1, fields.ndim)))
            fk = fk.reshape(m, -1)
            weighted = fk * self._symbol.reshape(1, -1)
            q = (weighted @ fk.conj().T).real * (sys.cell_volume**2 / sys.volume)
        return 0.5 * (q + q.T)  # symmetrise away roundoff

    # --- noise ------------------------------------------------------------
    def sample_noise(self, rng: np.random.Generator, dt: float,
                     lineage: tuple[int, ...] = ()) -> NoiseSlice:
        """Draw one slice of the noise field w0 with covariance G/(4 dt).

        Guarantees Var[<w0, G^-1 f>] = Q(f) / (4 dt) exactly for any field f,
        which is the only statistic the dynamics consumes.
        """
        if not (dt > 0 and math.isfinite(dt)):
            raise ValueError("dt must be positive")
        sys = self.system
        if self.model.kind is KernelKind.DELTA:
            if self.strength_eff <= 0:
                raise ValueError("cannot sample noise for zero-strength kernel")
            sigma = 1.0 / math.sqrt(4.0 * self.strength_eff * sys.cell_volume * dt)
            values = rng.normal(0.0, sigma, size=sys.shape)
        else:
            if self.model.strength <= 0:
                raise ValueError("cannot sample noise for zero-strength kernel")
            sigma = 1.0 / math.sqrt(16.0 * math.pi * self.model.strength
                                    * sys.cell_volume * dt)
            values = np.zeros(sys.shape)
            for ax in range(sys.ndim):
                eta = rng.normal(0.0, sigma, size=sys.shape)
                values += (eta - np.roll(eta, 1, axis=ax)) / sys.spacing
        return NoiseSlice(values=values, dt=float(dt), lineage=lineage)

    def noise_functionals(self, noise: NoiseSlice, fields: np.ndarray) -> np.ndarray:
        """s_c = <w0, G^-1 A_c> for every configuration field."""
        return np.array([self.pair_form(noise.values, fields[c])
                         for c in range(fields.shape[0])])
