"""Noise-averaged statistics of the packet center and width."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import (
    EnsembleReport,
    GaussianPacket,
    PhysicalParams,
    TimeGrid,
    ValidationError,
)
from .kernels import (
    classical_uncertainty_analytic,
    compute_path_integrals,
    gaussian_width,
    tau_of_t,
)
from .noise import derive_seed, make_white_noise
from . import tdse

ENGINES = ("analytic", "solver")
THREADS_ENV = "CKBROWNIAN_THREADS"


class PathDependentWidthError(RuntimeError):
    """Per-path widths disagree; the width must not depend on the force."""


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValidationError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def default_probe_times(params: PhysicalParams, t_end: float) -> list[float]:
    """``{0.5, 1, 2, 5, 10} / gamma`` clipped to the horizon; fractions of t_end when gamma is 0."""
    factors = (0.5, 1.0, 2.0, 5.0, 10.0)
    if params.gamma > 0:
        probes = [f / params.gamma for f in factors]
    else:
        probes = [f / 10 * t_end for f in factors]
    return [t for t in probes if t <= t_end * (1 + 1e-12)]


def tree_moments(rows: np.ndarray):
    """Count, mean and sum of squared deviations over axis 0.

    Rows are merged pairwise in a fixed binary tree over their index, so the
    result depends only on the row order, never on how rows were produced.
    """
    rows = np.asarray(rows, dtype=float)

    def reduce(lo, hi):
        if hi - lo == 1:
            return 1, rows[lo].copy(), np.zeros_like(rows[lo])
        mid = (lo + hi) // 2
        na, ma, sa = reduce(lo, mid)
        nb, mb, sb = reduce(mid, hi)
        n = na + nb
        delta = mb - ma
        return n, ma + delta * (nb / n), sa + sb + delta * delta * (na * nb / n)

    if rows.shape[0] == 0:
        raise ValidationError("no rows to reduce")
    return reduce(0, rows.shape[0])


def _analytic_path(params, packet, tgrid, seed):
    path = make_white_noise(params, tgrid, seed)
    integrals = compute_path_integrals(path, params)
    width = np.asarray(gaussian_width(packet.sigma0, params.m, integrals.tau))
    return packet.x0 + integrals.f1, width


def _solver_path(params, packet, config, seed):
    path = make_white_noise(params, config.tgrid, seed)
    result = tdse.run(packet, path, params, config)
    return result.mean_x, result.width


def run_ensemble(params: PhysicalParams, packet: GaussianPacket, tgrid: TimeGrid,
                 n_paths: int, base_seed: int, engine: str = "analytic",
                 solver_config: tdse.SolverConfig | None = None,
                 workers: int | None = None, width_rtol: float = 1e-6) -> EnsembleReport:
    """Evolve ``n_paths`` white-noise realizations and aggregate per node.

    Path ``i`` uses seed ``derive_seed(base_seed, i)``.  The quantum width is
    checked to be the same on every path: bit-identical for the analytic
    engine, within ``width_rtol`` (relative) for the solver.
    """
    if n_paths < 2:
        raise ValidationError("an ensemble needs at least 2 paths")
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}")
    if engine == "solver":
        if solver_config is None:
            raise ValidationError("solver engine needs a SolverConfig")
        if solver_config.tgrid != tgrid:
            raise ValidationError("solver config time grid differs from the ensemble grid")
    workers = workers or default_workers()
    seeds = tuple(derive_seed(base_seed, i) for i in range(n_paths))

    if engine == "analytic":
        def one(seed):
            return _analytic_path(params, packet, tgrid, seed)
    else:
        def one(seed):
            return _solver_path(params, packet, solver_config, seed)

    if workers == 1:
        results = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))

    centers = np.stack([c for c, _ in results])
    widths = np.stack([w for _, w in results])

    if engine == "analytic":
        if np.any(widths != widths[0]):
            raise PathDependentWidthError("analytic widths differ between paths")
        width_qu = widths[0]
    else:
        spread = np.max(np.abs(widths - widths[0]) / widths[0])
        if spread > width_rtol:
            raise PathDependentWidthError(
                f"solver widths differ between paths by {spread:.3g} (relative)"
            )
        _, width_qu, _ = tree_moments(widths)

    n, center_mean, m2 = tree_moments(centers)
    center_var = np.maximum(m2 / (n - 1), 0.0)
    times = tgrid.nodes()
    if params.eta > 0:
        dx_cl = np.asarray(classical_uncertainty_analytic(params, times))
    else:
        dx_cl = np.full(times.shape, np.nan)
    dx_total = np.sqrt(width_qu**2 + center_var)

    return EnsembleReport(
        times=times,
        tau=np.asarray(tau_of_t(params.gamma, times)),
        n_paths=n_paths,
        center_mean=center_mean,
        center_var=center_var,
        width_qu=width_qu,
        dx_cl_analytic=dx_cl,
        dx_total=dx_total,
        base_seed=int(base_seed),
        seeds=seeds,
        engine=engine,
        centers=centers,
        widths=widths,
    )


def decompose_uncertainty(report: EnsembleReport, t_index: int):
    """``(dx_qu, dx_cl_sample, dx_cl_analytic, dx_total)`` at one node."""
    if not 0 <= t_index < report.times.size:
        raise ValidationError(f"time index {t_index} outside the report")
    return (
        float(report.width_qu[t_index]),
        float(np.sqrt(report.center_var[t_index])),
        float(report.dx_cl_analytic[t_index]),
        float(report.dx_total[t_index]),
    )
