"""Split-step Fourier solver for the Caldirola-Kanai Schroedinger equation (V = 0).

    i dpsi/dt = [ -exp(-gamma t)/(2m) d^2/dx^2 - exp(gamma t) F(t) x ] psi

Each step applies half a force kick, a full kinetic step in wavenumber space
and another half kick, with the time-dependent coefficients taken at the
step midpoint.  The kick ``exp(i c x)`` is a pure momentum shift, so by
default it is accumulated in the field's carrier wavenumber instead of being
multiplied onto the grid; the canonical momentum grows like ``exp(gamma t)``
and would otherwise alias.  ``kick="grid"`` applies it on the grid literally.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    GaussianPacket,
    NoisePath,
    PhysicalParams,
    SpatialGrid,
    TimeGrid,
    ValidationError,
    WaveField,
)

SCHEMES = ("strang", "lie")
KICKS = ("carrier", "grid")


class SolverError(RuntimeError):
    pass


class NormDriftError(SolverError):
    pass


class DomainExcursionError(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    xgrid: SpatialGrid
    tgrid: TimeGrid
    scheme: str = "strang"
    kick: str = "carrier"
    norm_tol: float = 1e-8
    edge_tol: float = 1e-8

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        if self.kick not in KICKS:
            raise ValidationError(f"unknown kick mode {self.kick!r}")


def init_state(packet: GaussianPacket, xgrid: SpatialGrid) -> WaveField:
    """Sampled initial Gaussian, renormalized to unit discrete norm."""
    reach = 8 * packet.sigma0
    if packet.x0 - reach < xgrid.x_min or packet.x0 + reach > xgrid.x_max:
        raise ValidationError("packet too wide for the domain: need 8 sigma0 on each side")
    x = xgrid.nodes() - packet.x0
    values = (2 * np.pi * packet.sigma0**2) ** -0.25 * np.exp(-x * x / (4 * packet.sigma0**2))
    values = values / np.sqrt(np.sum(values**2) * xgrid.dx)
    return WaveField(xgrid, values.astype(complex), 0.0)


def observables(state: WaveField):
    """``(norm, mean_x, var_x)`` by rectangle quadrature on the periodic grid."""
    x = state.grid.nodes()
    rho = state.density()
    dx = state.grid.dx
    norm = float(np.sum(rho) * dx)
    mean = float(np.sum(x * rho) * dx / norm)
    var = float(np.sum((x - mean) ** 2 * rho) * dx / norm)
    return norm, mean, var


def momentum_expectation(state: WaveField) -> float:
    """Canonical momentum <p>, carrier included."""
    power = np.abs(np.fft.fft(state.values)) ** 2
    q = state.grid.wavenumbers()
    return float(state.carrier + np.sum(q * power) / np.sum(power))


class _Stepper:
    """Per-run workspace: wavenumbers, node positions, fixed options."""

    def __init__(self, xgrid: SpatialGrid, params: PhysicalParams, dt: float,
                 scheme: str = "strang", kick: str = "carrier"):
        self.x = xgrid.nodes()
        self.q = xgrid.wavenumbers()
        self.gamma = params.gamma
        self.m = params.m
        self.dt = dt
        self.scheme = scheme
        self.kick = kick

    def _kick(self, values, carrier, c):
        if self.kick == "carrier":
            return values, carrier + c
        return values * np.exp(1j * c * self.x), carrier

    def advance(self, values, carrier, t_left, force):
        dt = self.dt
        t_mid = t_left + 0.5 * dt
        impulse = np.exp(self.gamma * t_mid) * force * dt
        kinetic = np.exp(-self.gamma * t_mid) * dt / (2 * self.m)
        frac = 0.5 if self.scheme == "strang" else 1.0
        values, carrier = self._kick(values, carrier, frac * impulse)
        k = self.q + carrier
        values = np.fft.ifft(np.exp(-1j * kinetic * k * k) * np.fft.fft(values))
        if self.scheme == "strang":
            values, carrier = self._kick(values, carrier, 0.5 * impulse)
        return values, carrier


def step(state: WaveField, path: NoisePath, params: PhysicalParams, j: int,
         scheme: str = "strang", kick: str = "carrier") -> WaveField:
    """Advance ``state`` from node ``j`` to node ``j + 1`` of ``path.grid``."""
    tgrid = path.grid
    if not 0 <= j < tgrid.n_steps:
        raise ValidationError(f"step index {j} outside [0, {tgrid.n_steps})")
    stepper = _Stepper(state.grid, params, tgrid.dt, scheme, kick)
    values, carrier = stepper.advance(state.values, state.carrier, j * tgrid.dt,
                                      path.samples[j])
    return WaveField(state.grid, values, (j + 1) * tgrid.dt, carrier)


@dataclass(frozen=True, eq=False)
class SolverRun:
    times: np.ndarray
    norm: np.ndarray
    mean_x: np.ndarray
    var_x: np.ndarray
    carrier: np.ndarray
    snapshots: dict = field(default_factory=dict)
    final: WaveField | None = None

    @property
    def width(self) -> np.ndarray:
        return np.sqrt(self.var_x)


def run(packet: GaussianPacket, path: NoisePath, params: PhysicalParams,
        config: SolverConfig, snapshot_indices=()) -> SolverRun:
    """Integrate from t = 0 to the end of ``path.grid``.

    Observables are recorded at every node; full fields only at
    ``snapshot_indices``.  Aborts on norm drift beyond ``config.norm_tol``,
    on NaN, or when more than ``config.edge_tol`` of the density reaches the
    outer 1/32 of the domain at either end.
    """
    tgrid = path.grid
    if tgrid != config.tgrid:
        raise ValidationError("solver time grid does not match the noise path grid")
    xgrid = config.xgrid
    n = tgrid.n_nodes
    wanted = set(int(i) for i in snapshot_indices)
    if any(i < 0 or i >= n for i in wanted):
        raise ValidationError("snapshot index outside the time grid")

    state = init_state(packet, xgrid)
    stepper = _Stepper(xgrid, params, tgrid.dt, config.scheme, config.kick)
    x = stepper.x
    dx = xgrid.dx
    edge = max(1, xgrid.n_points // 32)

    norm = np.empty(n)
    mean = np.empty(n)
    var = np.empty(n)
    carrier_hist = np.empty(n)
    snapshots = {}

    values = np.array(state.values)
    carrier = 0.0
    for j in range(n):
        rho = values.real**2 + values.imag**2
        nj = np.sum(rho) * dx
        if not np.isfinite(nj):
            raise SolverError(f"non-finite wave function at step {j}")
        if abs(nj - 1.0) > config.norm_tol:
            raise NormDriftError(f"norm drifted to {nj!r} at step {j}")
        if (np.sum(rho[:edge]) + np.sum(rho[-edge:])) * dx > config.edge_tol:
            raise DomainExcursionError(
                f"packet reached the domain boundary at t = {j * tgrid.dt:.6g}"
            )
        mj = np.sum(x * rho) * dx / nj
        norm[j] = nj
        mean[j] = mj
        var[j] = np.sum((x - mj) ** 2 * rho) * dx / nj
        carrier_hist[j] = carrier
        if j in wanted:
            snapshots[j] = WaveField(xgrid, values, j * tgrid.dt, carrier)
        if j < n - 1:
            values, carrier = stepper.advance(values, carrier, j * tgrid.dt,
                                              path.samples[j])

    final = WaveField(xgrid, values, tgrid.t_end, carrier)
    return SolverRun(tgrid.nodes(), norm, mean, var, carrier_hist, snapshots, final)


def phase_aligned_error(numeric: WaveField, exact: WaveField, center: float) -> float:
    """Max pointwise difference after removing the relative global phase.

    Both fields are rotated to be real and positive at the node nearest
    ``center``.
    """
    if numeric.grid != exact.grid:
        raise ValidationError("fields live on different grids")
    a = numeric.psi()
    b = exact.psi()
    k = int(np.argmin(np.abs(numeric.grid.nodes() - center)))
    a = a * (np.conj(a[k]) / abs(a[k]))
    b = b * (np.conj(b[k]) / abs(b[k]))
    return float(np.max(np.abs(a - b)))
