"""Classical oracle: m x'' + eta x' = F(t) integrated exactly per step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoisePath, PhysicalParams, ValidationError
from .kernels import t_minus_tau, tau_of_t


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray


def step_coefficients(gamma: float, dt: float, m: float):
    """Coefficients of the exact one-step flow for a constant force.

    Returns ``(decay, v_gain, x_from_v, x_from_F)`` such that::

        v' = decay * v + v_gain * F
        x' = x + x_from_v * v + x_from_F * F
    """
    decay = np.exp(-gamma * dt)
    x_from_v = tau_of_t(gamma, dt)
    v_gain = x_from_v / m
    # (1/eta) [dt - (1 - e^{-gamma dt}) / gamma], finite as gamma -> 0
    if gamma == 0:
        x_from_F = dt * dt / (2 * m)
    else:
        x_from_F = t_minus_tau(gamma, dt) / (m * gamma)
    return decay, v_gain, x_from_v, x_from_F


def integrate_arrays(samples, dt: float, params: PhysicalParams, x0=0.0, v0=0.0):
    """Batch version of :func:`integrate`; the last axis of ``samples`` runs over nodes."""
    samples = np.asarray(samples, dtype=float)
    decay, v_gain, x_from_v, x_from_F = step_coefficients(params.gamma, dt, params.m)
    x = np.empty_like(samples)
    v = np.empty_like(samples)
    x[..., 0] = x0
    v[..., 0] = v0
    for j in range(samples.shape[-1] - 1):
        F = samples[..., j]
        x[..., j + 1] = x[..., j] + x_from_v * v[..., j] + x_from_F * F
        v[..., j + 1] = decay * v[..., j] + v_gain * F
    return x, v


def integrate(path: NoisePath, params: PhysicalParams, x0: float = 0.0,
              v0: float = 0.0) -> Trajectory:
    """Trajectory on the nodes of ``path.grid``.

    The update is the exact flow for a force held at ``F_j`` on each step, so
    node values carry only rounding error.
    """
    x, v = integrate_arrays(path.samples, path.grid.dt, params, x0, v0)
    return Trajectory(path.grid.nodes(), x, v)


def ensemble_center_variance(paths, params: PhysicalParams, x0: float = 0.0,
                             v0: float = 0.0) -> np.ndarray:
    """Unbiased variance of x(t) across paths, at every node."""
    paths = list(paths)
    if len(paths) < 2:
        raise ValidationError("center variance needs at least 2 paths")
    grid = paths[0].grid
    if any(p.grid != grid for p in paths):
        raise ValidationError("all paths must share one time grid")
    samples = np.stack([p.samples for p in paths])
    x, _ = integrate_arrays(samples, grid.dt, params, x0, v0)
    return np.var(x, axis=0, ddof=1)
