"""Monte-Carlo models of vacuum mass-density fluctuations on a cell lattice.

Space is partitioned into cubical cells of side ``cell`` and time into
intervals of length ``interval``.  During each interval, every cell
independently hosts an event with probability ``probability``:

* ``monopole`` -- a point mass ``event_mass`` appears at the cell center; a
  uniform static background of density ``-event_mass * probability / cell^3``
  keeps the ensemble-mean density fluctuation at zero.
* ``dipole`` -- a (+event_mass, -event_mass) pair appears, the positive half
  at the seed cell center and the negative half at the center of a uniformly
  chosen face-adjacent cell (6 directions, periodic wrap).  The mean density
  is zero without background subtraction.

The derived intensity ``event_density = probability * interval / cell**3``
(written P-tilde in the docstrings below) controls all integrated correlation
coefficients: with ``p = event_mass * arm``,

    monopole: <w w'> integrated over one cell and one interval
              = event_mass^2 * Ptilde * (1 - P)            (same cell)
    dipole:   same cell      2 * event_mass^2 * Ptilde * (1 - 7P/12)
              face adjacent  -(event_mass^2 * Ptilde / 3) * (1 - P)
              axial lag 2    -event_mass^2 * Ptilde * P / 36
              spectrum       (Ptilde p^2 / 3) * khat^2 at small k

so the dipole pattern is the discrete (-laplacian delta) stencil with
coefficient Ptilde p^2 / 3, and the recovered two-point couplings are

    gamma       = 1 / (4 mu^2 Ptilde)         (monopole)
    gamma_prime = 3 / (16 pi Ptilde p^2)      (dipole).

The exact finite-P factors above were derived from the Bernoulli sampling
scheme and are used to de-bias the estimators; they reduce to the ideal
coefficients as P -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "FluctuationKind",
    "FluctuationModel",
    "EventSample",
    "CorrelationEstimate",
    "SpectrumEstimate",
    "sample_events",
    "density_fluctuation_field",
    "estimate_correlations",
    "estimate_spectrum",
    "FACE_STEPS",
]

# Face-adjacent unit steps, indexed by direction code 0..5 (axis*2 + sign).
FACE_STEPS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
    dtype=np.int64,
)


class FluctuationKind(str, Enum):
    MONOPOLE = "monopole"
    DIPOLE = "dipole"


@dataclass(frozen=True)
class FluctuationModel:
    """Parameters of one vacuum-fluctuation model.

    kind         monopole or dipole
    event_mass   g; mass of a monopole event, or of each half of a pair
    probability  event probability per cell per interval, in [0, 1]
    cell         cm; cell side
    interval     s; duration of one interval
    extent       cells per axis of the periodic sampling lattice
    arm          cm; separation of the +/- pair (dipole); defaults to cell
    """

    kind: FluctuationKind
    event_mass: float
    probability: float
    cell: float
    interval: float
    extent: int = 64
    arm: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", FluctuationKind(self.kind))
        if not self.event_mass > 0:
            raise ValueError("event_mass must be positive")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if not self.cell > 0:
            raise ValueError("cell must be positive")
        if not self.interval > 0:
            raise ValueError("interval must be positive")
        if self.extent < 4:
            raise ValueError("extent must be at least 4 cells")
        if self.arm is not None and not self.arm > 0:
            raise ValueError("arm must be positive when given")

    @property
    def arm_length(self) -> float:
        """Pair separation in cm (defaults to one cell)."""
        return self.cell if self.arm is None else self.arm

    @property
    def event_density(self) -> float:
        """Event probability times interval per unit volume [s cm^-3]."""
        return self.probability * self.interval / self.cell**3

    @property
    def dipole_moment(self) -> float:
        """event_mass * arm_length [g cm]; dipole models only."""
        if self.kind is not FluctuationKind.DIPOLE:
            raise ValueError("dipole_moment is defined for dipole models only")
        return self.event_mass * self.arm_length


@dataclass(frozen=True)
class EventSample:
    """Events of a single time interval on the periodic cell lattice.

    occupied    bool (n, n, n); seed cells hosting an event
    directions  int8 (n, n, n) in 0..5 (FACE_STEPS row of the negative half),
                or None for monopole samples
    """

    occupied: np.ndarray
    directions: np.ndarray | None

    @property
    def n_events(self) -> int:
        return int(self.occupied.sum())


def sample_events(model: FluctuationModel, rng: np.random.Generator) -> EventSample:
    """Draw one interval's events: iid Bernoulli cells, uniform orientations."""
    shape = (model.extent,) * 3
    occupied = rng.random(shape) < model.probability
    directions = None
    if model.kind is FluctuationKind.DIPOLE:
        directions = rng.integers(0, 6, size=shape, dtype=np.int8)
    return EventSample(occupied=occupied, directions=directions)


def density_fluctuation_field(sample: EventSample, model: FluctuationModel) -> np.ndarray:
    """Per-cell mass-density fluctuation [g cm^-3], zero ensemble mean.

    Monopole: event_mass * (occupied - probability) / cell^3, i.e. events on
    top of the uniform compensating background.  Dipole: +/- event_mass/cell^3
    at the seed and its face neighbor (no background needed).
    """
    unit = model.event_mass / model.cell**3
    if model.kind is FluctuationKind.MONOPOLE:
        return unit * (sample.occupied.astype(np.float64) - model.probability)
    fld = sample.occupied.astype(np.float64)
    for code in range(6):
        mask = sample.occupied & (sample.directions == code)
        axis, neg = divmod(code, 2)
        fld -= np.roll(mask, -1 if neg else 1, axis=axis)
    return unit * fld


def _integrated_coefficients(model: FluctuationModel) -> dict[str, float]:
    """Exact expected space-time-integrated covariances of the sampler."""
    p_ = model.probability
    base = model.event_mass**2 * model.event_density
    if model.kind is FluctuationKind.MONOPOLE:
        return {"same_cell": base * (1.0 - p_), "adjacent": 0.0, "axial_lag2": 0.0}
    return {
        "same_cell": 2.0 * base * (1.0 - 7.0 * p_ / 12.0),
        "adjacent": -(base / 3.0) * (1.0 - p_),
        "axial_lag2": -base * p_ / 36.0,
    }


@dataclass(frozen=True)
class CorrelationEstimate:
    """Empirical space-time-integrated covariances, interval * cell^3 * Cov.

    Units g^2 s cm^-3 throughout.  ``strength_estimate`` is the two-point
    coupling recovered from the de-biased same-cell coefficient:
    1/(4 mu^2 Ptilde-hat) for monopole [cm^3 s^-1 g^-2], or
    3/(16 pi (Ptilde p^2)-hat) for dipole [cm s^-1 g^-2].
    """

    model: FluctuationModel
    n_samples: int
    same_cell: float
    same_cell_err: float
    adjacent: float
    adjacent_err: float
    axial_lag2: float
    axial_lag2_err: float
    successive_intervals: float
    successive_intervals_err: float
    strength_estimate: float
    strength_err: float
    strength_expected: float
    expected: dict[str, float]
    sufficient_samples: bool


def estimate_correlations(
    model: FluctuationModel,
    n_samples: int,
    rng: np.random.Generator,
) -> CorrelationEstimate:
    """Estimate density-fluctuation covariances from n_samples fresh intervals.

    Per interval, cell-lattice averages estimate the covariance at cell
    separations (0,0,0), face-adjacent, and lag 2 along an axis, plus the
    cross-interval (successive) covariance; the stderr comes from the spread
    across intervals.  Results are integrated coefficients (x interval*cell^3).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    scale = model.interval * model.cell**3
    per = {k: np.empty(n_samples) for k in ("same", "adj", "lag2", "succ")}
    prev = None
    for i in range(n_samples):
        fld = density_fluctuation_field(sample_events(model, rng), model)
        per["same"][i] = np.mean(fld * fld)
        per["adj"][i] = np.mean(
            [(fld * np.roll(fld, 1, axis=ax)).mean() for ax in range(3)]
        )
        per["lag2"][i] = np.mean(
            [(fld * np.roll(fld, 2, axis=ax)).mean() for ax in range(3)]
        )
        per["succ"][i] = 0.0 if prev is None else np.mean(fld * prev)
        prev = fld
    stats = {}
    for key, vals in per.items():
        if key == "succ":
            vals = vals[1:]
        mean = float(vals.mean()) * scale
        err = float(vals.std(ddof=1) / np.sqrt(len(vals))) * scale
        stats[key] = (mean, err)

    expected = _integrated_coefficients(model)
    p_ = model.probability
    if model.kind is FluctuationKind.MONOPOLE:
        # same_cell -> mu^2 Ptilde (1-P); de-bias, then gamma = 1/(4 mu^2 Ptilde)
        mu2pt = stats["same"][0] / (1.0 - p_) if p_ < 1.0 else np.inf
        mu2pt_err = stats["same"][1] / (1.0 - p_) if p_ < 1.0 else np.inf
        strength = 1.0 / (4.0 * mu2pt)
        strength_err = strength * mu2pt_err / mu2pt
        strength_expected = 1.0 / (4.0 * model.event_mass**2 * model.event_density)
    else:
        # The field realization separates the pair by exactly one cell, so the
        # field moment is event_mass * cell whatever ``arm`` says (arm enters
        # the continuous-space force model instead).  same_cell ->
        # 2 Ptilde p^2 / cell^2 * (1 - 7P/12); de-bias, then
        # gamma' = 3/(16 pi Ptilde p^2).
        debias = 2.0 * (1.0 - 7.0 * p_ / 12.0)
        ptp2 = stats["same"][0] * model.cell**2 / debias
        ptp2_err = stats["same"][1] * model.cell**2 / debias
        strength = 3.0 / (16.0 * np.pi * ptp2)
        strength_err = strength * ptp2_err / ptp2
        strength_expected = 3.0 / (
            16.0 * np.pi * model.event_density * (model.event_mass * model.cell) ** 2
        )
    return CorrelationEstimate(
        model=model,
        n_samples=n_samples,
        same_cell=stats["same"][0],
        same_cell_err=stats["same"][1],
        adjacent=stats["adj"][0],
        adjacent_err=stats["adj"][1],
        axial_lag2=stats["lag2"][0],
        axial_lag2_err=stats["lag2"][1],
        successive_intervals=stats["succ"][0],
        successive_intervals_err=stats["succ"][1],
        strength_estimate=float(strength),
        strength_err=float(strength_err),
        strength_expected=float(strength_expected),
        expected=expected,
        sufficient_samples=n_samples >= 1000,
    )


@dataclass(frozen=True)
class SpectrumEstimate:
    """Angular-averaged power spectrum of the integrated fluctuation field.

    spectrum[k] estimates interval * <|w-hat(k)|^2> / volume on shells of the
    lattice wavenumber; for the dipole model the small-k expectation is
    (Ptilde p^2 / 3) * khat^2 with khat^2 the lattice stencil symbol, making
    spectrum/khat^2 flat at small k; for the monopole it is flat everywhere.
    """

    khat2: np.ndarray
    spectrum: np.ndarray
    spectrum_err: np.ndarray
    expected: np.ndarray
    n_samples: int


def estimate_spectrum(
    model: FluctuationModel,
    n_samples: int,
    rng: np.random.Generator,
    n_shells: int = 12,
) -> SpectrumEstimate:
    """Estimate the fluctuation power spectrum on lattice-wavenumber shells."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    n = model.extent
    dx = model.cell
    volume = (n * dx) ** 3
    k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    khat2_axis = (2.0 - 2.0 * np.cos(k1 * dx)) / dx**2
    khat2 = (
        khat2_axis[:, None, None] + khat2_axis[None, :, None] + khat2_axis[None, None, :]
    )
    # shell binning on khat (skip the zero mode)
    khat = np.sqrt(khat2).ravel()
    kmax = khat.max()
    edges = np.linspace(0.0, kmax, n_shells + 1)
    shell = np.clip(np.digitize(khat, edges) - 1, 0, n_shells - 1)
    shell[0] = -1  # exclude k = 0
    counts = np.bincount(shell[shell >= 0], minlength=n_shells)

    acc = np.zeros((n_samples, n_shells))
    for i in range(n_samples):
        fld = density_fluctuation_field(sample_events(model, rng), model)
        power = np.abs(np.fft.fftn(fld) * dx**3) ** 2 / volume * model.interval
        acc[i] = np.bincount(
            shell[shell >= 0], weights=power.ravel()[shell >= 0], minlength=n_shells
        ) / np.maximum(counts, 1)

    khat2_flat = khat2.ravel()
    khat2_shell = np.bincount(
        shell[shell >= 0], weights=khat2_flat[shell >= 0], minlength=n_shells
    ) / np.maximum(counts, 1)
    base = model.event_mass**2 * model.event_density
    if model.kind is FluctuationKind.DIPOLE:
        # One-cell pair separation on the lattice: field moment = mass * cell.
        # Exact per-mode expectation, finite-P factor included:
        #   S(k) = mu^2 Ptilde [cell^2 khat^2/3 - P cell^4 (khat^2)^2/36]
        khat4_shell = np.bincount(
            shell[shell >= 0], weights=khat2_flat[shell >= 0] ** 2, minlength=n_shells
        ) / np.maximum(counts, 1)
        expected = base * (
            model.cell**2 * khat2_shell / 3.0
            - model.probability * model.cell**4 * khat4_shell / 36.0
        )
    else:
        expected = np.full(n_shells, base * (1.0 - model.probability))
    return SpectrumEstimate(
        khat2=khat2_shell,
        spectrum=acc.mean(axis=0),
        spectrum_err=acc.std(axis=0, ddof=1) / np.sqrt(n_samples),
        expected=expected,
        n_samples=n_samples,
    )
