"""Force realizations on a time grid."""
from __future__ import annotations

import numpy as np

from .core import NoiseMeta, NoisePath, PhysicalParams, TimeGrid, ValidationError

_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, index: int) -> int:
    """64-bit seed for path ``index`` of an ensemble.

    Hashes ``(base_seed, index)`` through numpy's SeedSequence, so neighbouring
    indices give unrelated streams and the result does not depend on the order
    in which paths are generated.
    """
    ss = np.random.SeedSequence([int(base_seed) & _MASK64, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_white_noise(params: PhysicalParams, tgrid: TimeGrid, seed: int) -> NoisePath:
    """Piecewise-constant white noise with samples ~ N(0, D/dt).

    The per-step impulse then has variance ``D * dt``, the discrete form of
    the correlation ``D * delta(t - t')``.
    """
    seed = int(seed) & _MASK64
    if params.D == 0:
        samples = np.zeros(tgrid.n_nodes)
    else:
        rng = np.random.default_rng(seed)
        samples = rng.standard_normal(tgrid.n_nodes) * np.sqrt(params.D / tgrid.dt)
    return NoisePath(tgrid, samples, NoiseMeta("white", params.D, seed))


def make_constant_force(F0: float, tgrid: TimeGrid) -> NoisePath:
    kind = "zero" if F0 == 0 else "constant"
    return NoisePath(tgrid, np.full(tgrid.n_nodes, float(F0)), NoiseMeta(kind))


def make_zero_force(tgrid: TimeGrid) -> NoisePath:
    return make_constant_force(0.0, tgrid)


def make_custom(samples, tgrid: TimeGrid) -> NoisePath:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (tgrid.n_nodes,):
        raise ValidationError(
            f"custom path needs {tgrid.n_nodes} samples, got {samples.shape}"
        )
    return NoisePath(tgrid, samples, NoiseMeta("custom"))
