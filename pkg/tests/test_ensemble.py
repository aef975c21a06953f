import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ckbrownian.core import GaussianPacket, PhysicalParams, SpatialGrid, TimeGrid, ValidationError
from ckbrownian.ensemble import (
    PathDependentWidthError,
    decompose_uncertainty,
    default_probe_times,
    default_workers,
    run_ensemble,
    tree_moments,
)
from ckbrownian.kernels import classical_center_variance_exact, classical_uncertainty_analytic
from ckbrownian.tdse import SolverConfig


@pytest.fixture(scope="module")
def diffusion_report():
    params = PhysicalParams(1.0, 1.0, 1.0)
    tg = TimeGrid(10.0, 1000)
    return params, tg, run_ensemble(params, GaussianPacket(1.0), tg, 2000, 7, workers=4)


def test_deterministic_ensemble(packet):
    params = PhysicalParams(1.0, 1.0, 0.0)
    rep = run_ensemble(params, packet, TimeGrid(3.0, 30), 5, 1)
    assert not rep.center_var.any()
    assert np.array_equal(rep.dx_total, rep.width_qu)


def test_variance_and_width_at_t10(diffusion_report):
    params, tg, rep = diffusion_report
    n = rep.n_paths
    assert abs(rep.center_var[-1] / 9.000045 - 1) <= 3 * math.sqrt(2 / (n - 1))
    assert rep.width_qu[-1] == pytest.approx(math.sqrt(1 + (1 - math.exp(-10)) ** 2 / 4))
    assert rep.width_qu[-1] == pytest.approx(1.118, abs=5e-4)


def test_variance_matches_start_at_rest_law(diffusion_report):
    params, tg, rep = diffusion_report
    tol = 3 * math.sqrt(2 / (rep.n_paths - 1))
    for t in default_probe_times(params, tg.t_end):
        j = tg.index_of(t)
        assert abs(rep.center_var[j] / classical_center_variance_exact(params, t) - 1) <= tol


def test_center_mean_stays_put(diffusion_report):
    params, tg, rep = diffusion_report
    for t in (0.5, 1.0, 2.0, 5.0, 10.0):
        j = tg.index_of(t)
        assert abs(rep.center_mean[j]) <= 3 * rep.dx_cl_analytic[j] / math.sqrt(rep.n_paths)


def test_construction_identity(diffusion_report):
    _, _, rep = diffusion_report
    for j in range(0, rep.times.size, 7):
        qu, cl, _, total = decompose_uncertainty(rep, j)
        assert abs(total**2 - qu**2 - cl**2) <= 4 * np.finfo(float).eps * total**2


def test_decomposition_at_start(diffusion_report):
    _, _, rep = diffusion_report
    assert decompose_uncertainty(rep, 0) == (1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        decompose_uncertainty(rep, rep.times.size)


def test_classical_part_outgrows_quantum_width():
    params = PhysicalParams(1.0, 1.0, 1.0)
    ratios = []
    for t in (10.0, 100.0, 1000.0, 10000.0):
        sigma_late = math.sqrt(1 + (1 - math.exp(-t)) ** 2 / 4)
        ratios.append(classical_uncertainty_analytic(params, t) / sigma_late)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 80


def test_reproducible_for_any_worker_count(packet):
    params = PhysicalParams(1.0, 0.5, 2.0)
    tg = TimeGrid(2.0, 200)
    a = run_ensemble(params, packet, tg, 33, 5, workers=1)
    b = run_ensemble(params, packet, tg, 33, 5, workers=6)
    assert np.array_equal(a.center_var, b.center_var)
    assert np.array_equal(a.center_mean, b.center_mean)
    assert a.seeds == b.seeds


def test_solver_engine_agrees_per_seed(packet, unit_params):
    tg = TimeGrid(4.0, 400)
    config = SolverConfig(SpatialGrid(-32.0, 32.0, 256), tg)
    a = run_ensemble(unit_params, packet, tg, 6, 3, engine="analytic")
    s = run_ensemble(unit_params, packet, tg, 6, 3, engine="solver", solver_config=config)
    assert np.max(np.abs(s.centers - a.centers)) <= 5 * tg.dt**2
    assert np.max(np.abs(s.width_qu - a.width_qu) / a.width_qu) <= 1e-5
    with pytest.raises(PathDependentWidthError):
        run_ensemble(unit_params, packet, tg, 3, 3, engine="solver", solver_config=config,
                     width_rtol=-1.0)


def test_bad_requests(packet, unit_params):
    tg = TimeGrid(1.0, 10)
    with pytest.raises(ValidationError):
        run_ensemble(unit_params, packet, tg, 1, 0)
    with pytest.raises(ValidationError):
        run_ensemble(unit_params, packet, tg, 4, 0, engine="magic")
    with pytest.raises(ValidationError):
        run_ensemble(unit_params, packet, tg, 4, 0, engine="solver")


def test_undamped_report_has_no_closed_form(packet):
    rep = run_ensemble(PhysicalParams(1.0, 0.0, 1.0), packet, TimeGrid(1.0, 10), 3, 0)
    assert np.all(np.isnan(rep.dx_cl_analytic))


def test_probe_times():
    assert default_probe_times(PhysicalParams(1.0, 1.0), 10.0) == [0.5, 1.0, 2.0, 5.0, 10.0]
    assert default_probe_times(PhysicalParams(2.0, 1.0), 10.0) == [1.0, 2.0, 4.0, 10.0]
    assert default_probe_times(PhysicalParams(1.0, 0.0), 4.0) == pytest.approx(
        [0.2, 0.4, 0.8, 2.0, 4.0])


def test_worker_env(monkeypatch):
    monkeypatch.setenv("CKBROWNIAN_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("CKBROWNIAN_THREADS", "zero")
    with pytest.raises(ValidationError):
        default_workers()
    monkeypatch.delenv("CKBROWNIAN_THREADS")
    assert default_workers() >= 1


@settings(max_examples=50)
@given(arrays(float, st.tuples(st.integers(2, 40), st.integers(1, 4)),
              elements=st.floats(-1e3, 1e3)))
def test_tree_moments_match_numpy(rows):
    n, mean, m2 = tree_moments(rows)
    assert n == rows.shape[0]
    assert np.allclose(mean, rows.mean(axis=0), rtol=1e-12, atol=1e-9)
    assert np.allclose(m2 / (n - 1), rows.var(axis=0, ddof=1), rtol=1e-9, atol=1e-7)
