"""Shared data model: physical constants, grids, force paths, packets, fields.

Everything here is immutable after construction.  Units are hbar = 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when a parameter or grid violates its invariants."""


class DomainWarning(UserWarning):
    """The spatial domain may be too small for the expected packet excursion."""


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicalParams:
    """Particle and bath constants.

    ``gamma`` is derived as ``eta / m`` and never stored.
    """

    m: float
    eta: float = 0.0
    D: float = 0.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValidationError("mass must be positive")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValidationError("damping eta must be non-negative")
        if not (self.D >= 0 and math.isfinite(self.D)):
            raise ValidationError("noise strength D must be non-negative")

    @property
    def gamma(self) -> float:
        return self.eta / self.m


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValidationError("t_end must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValidationError("time grid needs n_steps >= 1")

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    def nodes(self) -> np.ndarray:
        """Node times ``j * dt`` for ``j = 0..n_steps``."""
        return np.arange(self.n_nodes) * self.dt

    def index_of(self, t: float) -> int:
        """Index of the node nearest to ``t``."""
        j = int(round(t / self.dt))
        if j < 0 or j > self.n_steps:
            raise ValidationError(f"time {t} lies outside [0, {self.t_end}]")
        return j

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.t_end, self.n_steps * int(factor))


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic grid on ``[x_min, x_max)``; ``x_max`` itself is not a node."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValidationError("domain bounds must be finite")
        if not self.x_max > self.x_min:
            raise ValidationError("x_max must exceed x_min")
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise ValidationError("spatial grid needs n_points >= 8")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    def nodes(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_points) * self.dx

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


NOISE_KINDS = ("white", "constant", "zero", "custom")


@dataclass(frozen=True)
class NoiseMeta:
    kind: str
    D: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class NoisePath:
    """Force realization, piecewise constant on ``[t_j, t_{j+1})`` with value ``samples[j]``.

    The last sample is kept so that ``len(samples) == grid.n_nodes``; it is
    never integrated over.
    """

    grid: TimeGrid
    samples: np.ndarray
    meta: NoiseMeta = field(default_factory=lambda: NoiseMeta("custom"))

    def __post_init__(self):
        samples = _frozen_array(self.samples, float)
        if samples.shape != (self.grid.n_nodes,):
            raise ValidationError(
                f"expected {self.grid.n_nodes} force samples, got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValidationError("force samples must be finite")
        if self.meta.kind == "zero" and np.any(samples != 0):
            raise ValidationError("zero path with nonzero samples")
        if self.meta.kind == "constant" and np.any(samples != samples[0]):
            raise ValidationError("constant path with varying samples")
        object.__setattr__(self, "samples", samples)

    def refine(self, factor: int) -> "NoisePath":
        """Same force function on a grid with ``factor`` times more steps.

        Each interval value is repeated, so the piecewise-constant force is
        unchanged.  White paths become ``custom`` since the per-sample variance
        no longer equals ``D/dt`` on the finer grid.
        """
        factor = int(factor)
        fine = np.repeat(self.samples[:-1], factor)
        fine = np.append(fine, self.samples[-1])
        kind = self.meta.kind if self.meta.kind in ("zero", "constant") else "custom"
        meta = NoiseMeta(kind, self.meta.D, self.meta.seed)
        return NoisePath(self.grid.refine(factor), fine, meta)


@dataclass(frozen=True)
class GaussianPacket:
    sigma0: float
    x0: float = 0.0

    def __post_init__(self):
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValidationError("initial width sigma0 must be positive")
        if not math.isfinite(self.x0):
            raise ValidationError("initial center x0 must be finite")


@dataclass(frozen=True, eq=False)
class WaveField:
    """Wave function sampled on a spatial grid at one time.

    ``values`` hold the envelope; the lab-frame wave function is
    ``exp(i * carrier * x) * values``.  A nonzero carrier lets the solver
    represent large canonical momenta without aliasing.
    """

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0
    carrier: float = 0.0

    def __post_init__(self):
        values = _frozen_array(self.values, complex)
        if values.shape != (self.grid.n_points,):
            raise ValidationError("wave field length does not match its grid")
        object.__setattr__(self, "values", values)

    def psi(self) -> np.ndarray:
        """Lab-frame samples of the wave function."""
        if self.carrier == 0.0:
            return np.array(self.values)
        return np.exp(1j * self.carrier * self.grid.nodes()) * self.values

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.grid.dx)


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Per-node statistics of the packet center across noise realizations.

    ``centers`` and ``widths`` keep the per-path series (rows in path-index
    order) so that engines can be compared seed by seed.
    """

    times: np.ndarray
    tau: np.ndarray
    n_paths: int
    center_mean: np.ndarray
    center_var: np.ndarray
    width_qu: np.ndarray
    dx_cl_analytic: np.ndarray
    dx_total: np.ndarray
    base_seed: int
    seeds: tuple
    engine: str
    centers: np.ndarray | None = None
    widths: np.ndarray | None = None

    def __post_init__(self):
        for name in ("times", "tau", "center_mean", "center_var", "width_qu",
                     "dx_cl_analytic", "dx_total"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), float))
        if np.any(self.center_var < 0):
            raise ValidationError("negative center variance")


@dataclass(frozen=True)
class SimulationConfig:
    params: PhysicalParams
    tgrid: TimeGrid
    xgrid: SpatialGrid
    packet: GaussianPacket = GaussianPacket(1.0)


def expected_excursion(params: PhysicalParams, packet: GaussianPacket, t_end: float) -> float:
    """Late width plus five classical center deviations at ``t_end``."""
    from .kernels import gaussian_width, tau_of_t

    sigma_late = gaussian_width(packet.sigma0, params.m, tau_of_t(params.gamma, t_end))
    if params.eta > 0:
        g = params.gamma
        bracket = t_end + math.expm1(-g * t_end) / g
        spread = math.sqrt(params.D / params.eta**2 * bracket)
    else:
        # undamped limit: x = int int F / m
        spread = math.sqrt(params.D * t_end**3 / (3 * params.m**2))
    return sigma_late + 5 * spread


def validate(params: PhysicalParams, tgrid: TimeGrid, xgrid: SpatialGrid,
             packet: GaussianPacket | None = None) -> SimulationConfig:
    """Check a configuration and return it.

    Emits :class:`DomainWarning` when the expected excursion of the packet
    exceeds a quarter of the spatial domain.
    """
    for obj, cls in ((params, PhysicalParams), (tgrid, TimeGrid), (xgrid, SpatialGrid)):
        if not isinstance(obj, cls):
            raise ValidationError(f"expected {cls.__name__}, got {type(obj).__name__}")
    # re-run the invariant checks in case objects were built with object.__new__
    PhysicalParams(params.m, params.eta, params.D)
    TimeGrid(tgrid.t_end, tgrid.n_steps)
    SpatialGrid(xgrid.x_min, xgrid.x_max, xgrid.n_points)
    packet = packet if packet is not None else GaussianPacket(1.0)
    GaussianPacket(packet.sigma0, packet.x0)

    excursion = expected_excursion(params, packet, tgrid.t_end)
    if excursion > xgrid.length / 4:
        warnings.warn(
            f"expected packet excursion {excursion:.3g} exceeds a quarter of the "
            f"domain ({xgrid.length / 4:.3g})",
            DomainWarning,
            stacklevel=2,
        )
    return SimulationConfig(params, tgrid, xgrid, packet)
