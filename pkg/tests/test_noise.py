import math

import numpy as np
import pytest

from ckbrownian.core import PhysicalParams, TimeGrid, ValidationError
from ckbrownian.kernels import compute_path_integrals
from ckbrownian.noise import (
    derive_seed,
    make_constant_force,
    make_custom,
    make_white_noise,
)


def test_zero_strength_gives_zero_path():
    path = make_white_noise(PhysicalParams(1.0, 1.0, 0.0), TimeGrid(1.0, 50), seed=9)
    assert np.all(path.samples == 0)


def test_same_seed_same_path():
    p = PhysicalParams(1.0, 1.0, 1.0)
    tg = TimeGrid(1.0, 100)
    a = make_white_noise(p, tg, 42)
    b = make_white_noise(p, tg, 42)
    assert np.array_equal(a.samples, b.samples)
    assert a.meta.seed == 42 and a.meta.kind == "white"


def test_sample_variance_is_D_over_dt():
    n = 100_000
    tg = TimeGrid(0.01 * n, n)
    path = make_white_noise(PhysicalParams(1.0, 1.0, 1.0), tg, 7)
    var = np.var(path.samples, ddof=1)
    assert abs(var / 100.0 - 1) <= 5 * math.sqrt(2 / n)


def test_constant_force():
    tg = TimeGrid(3.0, 30)
    assert make_constant_force(0.0, tg).meta.kind == "zero"
    path = make_constant_force(2.0, tg)
    assert path.meta.kind == "constant"
    assert np.all(path.samples == 2.0)
    assert np.trapezoid(path.samples, tg.nodes()) == pytest.approx(2.0 * 3.0, rel=1e-14)


def test_custom_paths():
    tg = TimeGrid(2.0, 40)
    params = PhysicalParams(1.0, 0.5, 1.0)
    with pytest.raises(ValidationError):
        make_custom(np.zeros(40), tg)

    zero = compute_path_integrals(make_custom(np.zeros(41), tg), params)
    ref = compute_path_integrals(make_constant_force(0.0, tg), params)
    for name in ("I", "f1", "f2", "tau"):
        assert np.array_equal(getattr(zero, name), getattr(ref, name))

    white = make_white_noise(params, tg, 5)
    wrapped = make_custom(white.samples, tg)
    a = compute_path_integrals(white, params)
    b = compute_path_integrals(wrapped, params)
    assert np.array_equal(a.f1, b.f1) and np.array_equal(a.f2, b.f2)

    wave = compute_path_integrals(make_custom(np.sin(tg.nodes()), tg), params)
    assert np.all(np.isfinite(wave.f2))


def test_pooled_mean_converges_to_zero():
    M, n = 100, 10_000
    tg = TimeGrid(n * 0.01, n)
    p = PhysicalParams(1.0, 1.0, 1.0)
    pooled = np.concatenate([make_white_noise(p, tg, derive_seed(1, i)).samples[:-1]
                             for i in range(M)])
    assert abs(pooled.mean()) <= 5 * math.sqrt(p.D / (tg.dt * M * n))


def test_disjoint_seeds_are_uncorrelated():
    n = 20_000
    tg = TimeGrid(1.0, n)
    p = PhysicalParams(1.0, 1.0, 1.0)
    a = make_white_noise(p, tg, derive_seed(3, 0)).samples
    b = make_white_noise(p, tg, derive_seed(3, 1)).samples
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 5 / math.sqrt(n + 1)


def test_derived_seeds():
    seeds = [derive_seed(123, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert all(0 <= s < 2**64 for s in seeds)
    assert derive_seed(123, 17) == seeds[17]
    assert derive_seed(124, 0) != seeds[0]
