"""Solver center vs Langevin trajectory for one white-noise path, with dt halving."""
import argparse

import numpy as np

from ckbrownian.core import GaussianPacket, PhysicalParams, SpatialGrid, TimeGrid
from ckbrownian.langevin import integrate
from ckbrownian.noise import make_white_noise
from ckbrownian.tdse import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t-end", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=512)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    params = PhysicalParams(1.0, 1.0, 1.0)
    base = make_white_noise(params, TimeGrid(args.t_end, args.steps), args.seed)
    xgrid = SpatialGrid(-32.0, 32.0, 1024)
    prev = None
    print(f"{'steps':>7} {'max gap':>11} {'gap/dt^2':>9} {'order':>6}")
    for level in range(args.levels):
        path = base.refine(2**level)
        res = run(GaussianPacket(1.0), path, params, SolverConfig(xgrid, path.grid))
        gap = float(np.max(np.abs(res.mean_x - integrate(path, params).x)))
        order = f"{np.log2(prev / gap):6.3f}" if prev else "     -"
        print(f"{path.grid.n_steps:7d} {gap:11.3e} {gap / path.grid.dt**2:9.4f} {order}")
        prev = gap


if __name__ == "__main__":
    main()
