"""Closed-form evolution of a free particle in the Caldirola-Kanai model.

The force enters only through three path integrals, all evaluated in
physical time with ``dtau = exp(-gamma t) dt``::

    I(t)  = int_0^t exp(gamma s) F(s) ds              canonical impulse
    f1(t) = (1/m)  int_0^t I(s) exp(-gamma s) ds      center displacement
    f2(t) = (1/2m) int_0^t I(s)^2 exp(-gamma s) ds    global phase

Working in ``t`` instead of ``tau`` keeps every integrand bounded; the force
in rescaled time blows up as tau approaches 1/gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

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

_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 16


class CoincidentTimeError(ValueError):
    """Propagator requested at equal rescaled times."""


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def _poly(coeffs, u):
    total = np.zeros_like(u)
    for c in reversed(coeffs):
        total = total * u + c
    return total


def tau_of_t(gamma: float, t):
    """Rescaled time ``(1 - exp(-gamma t)) / gamma``; equals ``t`` when gamma is 0."""
    t = np.asarray(t, dtype=float)
    if gamma == 0:
        return _scalar_or_array(t.copy())
    return _scalar_or_array(-np.expm1(-gamma * t) / gamma)


def t_minus_tau(gamma: float, t):
    """``t - tau(t)``, evaluated by series when ``gamma * t`` is small."""
    t = np.asarray(t, dtype=float)
    if gamma == 0:
        return _scalar_or_array(np.zeros_like(t))
    u = gamma * t
    with np.errstate(over="ignore", invalid="ignore"):
        direct = t + np.expm1(-u) / gamma
    # t - tau = t * sum_{n>=2} (-1)^n u^(n-1) / n!
    coeffs = [(-1) ** n / math.factorial(n) for n in range(2, _SERIES_TERMS)]
    series = t * u * _poly(coeffs, u)
    return _scalar_or_array(np.where(u < _SERIES_CUTOFF, series, direct))


def gaussian_width(sigma0: float, m: float, tau):
    """Packet width ``sqrt(sigma0^2 + tau^2 / (4 m^2 sigma0^2))``."""
    if not sigma0 > 0:
        raise ValidationError("initial width sigma0 must be positive")
    tau = np.asarray(tau, dtype=float)
    return _scalar_or_array(np.sqrt(sigma0**2 + tau**2 / (4 * m**2 * sigma0**2)))


def classical_uncertainty_analytic(params: PhysicalParams, t):
    """Closed-form spread of the packet center for white noise.

    ``sqrt((D / eta^2) * (t - (1 - exp(-gamma t)) / gamma))``.  This is the
    mean-square displacement of a particle whose velocity is already in
    thermal equilibrium at t = 0; see :func:`classical_center_variance_exact`
    for a center that starts at rest.
    """
    if params.eta == 0:
        raise ValidationError("classical uncertainty formula needs eta > 0")
    bracket = np.asarray(t_minus_tau(params.gamma, t))
    return _scalar_or_array(np.sqrt(params.D / params.eta**2 * bracket))


def classical_center_variance_exact(params: PhysicalParams, t):
    """Variance of ``f1(t)`` over white-noise paths for a center starting at rest.

    ``(D / eta^2) * int_0^t (1 - exp(-gamma w))^2 dw``, which tends to
    ``D t^3 / (3 m^2)`` as eta goes to 0.
    """
    t = np.asarray(t, dtype=float)
    g = params.gamma
    if g == 0:
        return _scalar_or_array(params.D * t**3 / (3 * params.m**2))
    u = g * t
    with np.errstate(over="ignore", invalid="ignore"):
        direct = t + 2 * np.expm1(-u) / g - np.expm1(-2 * u) / (2 * g)
    # (1 - e^-u)^2 = sum_{n>=2} c_n u^n with c_n = (-2 (-1)^n + (-2)^n) / n!
    coeffs = [(-2 * (-1) ** n + (-2) ** n) / math.factorial(n) / (n + 1)
              for n in range(2, _SERIES_TERMS)]
    series = t * u * u * _poly(coeffs, u)
    bracket = np.where(u < _SERIES_CUTOFF, series, direct)
    return _scalar_or_array(params.D / params.eta**2 * bracket)


@dataclass(frozen=True, eq=False)
class PathIntegrals:
    """Path integrals on the nodes of ``path.grid`` from ``start_index`` on.

    Index ``j`` of every array refers to node ``start_index + j``; ``tau``
    holds ``tau(t) - tau(t_start)``.
    """

    path: NoisePath
    times: np.ndarray
    tau: np.ndarray
    I: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    start_index: int = 0

    @property
    def tgrid(self) -> TimeGrid:
        return self.path.grid


def _cumtrapz(y, dt):
    out = np.zeros_like(y)
    out[..., 1:] = np.cumsum(0.5 * (y[..., 1:] + y[..., :-1]), axis=-1) * dt
    return out


def integrate_path_arrays(samples, times, gamma: float, m: float):
    """Vectorized core of :func:`compute_path_integrals`.

    ``samples`` may carry leading batch axes; the last axis runs over the
    uniformly spaced nodes ``times``.  Returns ``(I, f1, f2)``.

    ``I`` applies the trapezoid rule interval by interval to the
    piecewise-constant integrand ``exp(gamma s) F_j``, so the left-node force
    is used at both ends of a step.  ``f1`` and ``f2`` are cumulative
    trapezoids of node values.
    """
    samples = np.asarray(samples, dtype=float)
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0] if times.size > 1 else 0.0
    grow = np.exp(gamma * times)
    shrink = np.exp(-gamma * times)
    kicks = 0.5 * (grow[:-1] + grow[1:]) * samples[..., :-1] * dt
    I = np.zeros_like(samples)
    I[..., 1:] = np.cumsum(kicks, axis=-1)
    f1 = _cumtrapz(I * shrink, dt) / m
    f2 = _cumtrapz(I * I * shrink, dt) / (2 * m)
    return I, f1, f2


def compute_path_integrals(path: NoisePath, params: PhysicalParams,
                           start_index: int = 0) -> PathIntegrals:
    """Impulse, drift and phase integrals of ``path``.

    With ``start_index > 0`` the integrals are re-based at that node: ``I``
    accumulates from zero there and ``f1``, ``f2`` are rebuilt from it.
    """
    tgrid = path.grid
    if not 0 <= start_index < tgrid.n_nodes:
        raise ValidationError(f"start index {start_index} outside the time grid")
    times = tgrid.nodes()[start_index:]
    I, f1, f2 = integrate_path_arrays(path.samples[start_index:], times,
                                      params.gamma, params.m)
    tau = np.asarray(tau_of_t(params.gamma, times)) - tau_of_t(params.gamma, times[0])
    return PathIntegrals(path, times, tau, I, f1, f2, start_index)


def plane_wave(k, x, integrals: PathIntegrals, params: PhysicalParams, t_index: int):
    """Plane-wave solution labelled by its initial wavenumber ``k``, normalized to delta(k - k')."""
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    tau = integrals.tau[t_index]
    alpha = k * k * tau / (2 * params.m) + k * integrals.f1[t_index] + integrals.f2[t_index]
    return np.exp(1j * (k + integrals.I[t_index]) * x - 1j * alpha) / np.sqrt(2 * np.pi)


def propagator(x, t: float, x_prime, t_prime: float, integrals: PathIntegrals,
               params: PhysicalParams):
    """Kernel ``G(x, t | x', t')`` for the force path behind ``integrals``.

    Both times are snapped to the nearest grid node.  For ``t' > 0`` the
    integrals are re-based at ``t'``.  The square root uses the branch
    ``sqrt(1/i) = exp(-i pi/4)``.
    """
    tgrid = integrals.tgrid
    j = tgrid.index_of(t)
    j_prime = tgrid.index_of(t_prime)
    if j < j_prime:
        raise ValidationError("propagator needs t >= t_prime")
    if j_prime == integrals.start_index:
        local = integrals
    else:
        local = compute_path_integrals(integrals.path, params, start_index=j_prime)
    jj = j - j_prime
    dtau = local.tau[jj]
    if dtau == 0:
        raise CoincidentTimeError("propagator is singular at coincident times")
    m = params.m
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    amp = np.sqrt(m / (2 * np.pi * dtau)) * np.exp(-0.25j * np.pi)
    shift = x - x_prime - local.f1[jj]
    phase = m * shift * shift / (2 * dtau) + local.I[jj] * x - local.f2[jj]
    return amp * np.exp(1j * phase)


def gaussian_wavefunction(x, packet: GaussianPacket, m: float, tau: float,
                          I: float = 0.0, f1: float = 0.0, f2: float = 0.0):
    """Evolved Gaussian packet at positions ``x`` given the path integrals at one time.

    A packet centered at ``x0`` is the centered solution translated by
    ``x0`` times the global phase ``exp(i I x0)``.
    """
    x = np.asarray(x, dtype=float)
    s = packet.sigma0
    y = x - packet.x0 - f1
    pref = (2 * np.pi) ** -0.25 / np.sqrt(s + 1j * tau / (2 * m * s))
    expo = -m * y * y / (4 * m * s * s + 2j * tau) + 1j * I * x - 1j * f2
    return pref * np.exp(expo)


def evolve_gaussian(packet: GaussianPacket, integrals: PathIntegrals,
                    params: PhysicalParams, t_index: int, xgrid: SpatialGrid) -> WaveField:
    """Exact wave function of the Gaussian packet at node ``t_index``."""
    if integrals.start_index != 0:
        raise ValidationError("evolve_gaussian needs integrals that start at t = 0")
    values = gaussian_wavefunction(
        xgrid.nodes(), packet, params.m, integrals.tau[t_index],
        integrals.I[t_index], integrals.f1[t_index], integrals.f2[t_index],
    )
    return WaveField(xgrid, values, float(integrals.times[t_index]))


def center_trajectory(packet: GaussianPacket, integrals: PathIntegrals) -> np.ndarray:
    """Density center ``x0 + f1(t)`` at every node."""
    return packet.x0 + integrals.f1
