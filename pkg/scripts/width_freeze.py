"""Print the solver and closed-form packet width for a free damped particle."""
import argparse
import math

from ckbrownian.core import GaussianPacket, PhysicalParams, SpatialGrid, TimeGrid
from ckbrownian.kernels import gaussian_width, tau_of_t
from ckbrownian.noise import make_zero_force
from ckbrownian.tdse import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--t-end", type=float, default=20.0)
    ap.add_argument("--steps", type=int, default=4096)
    args = ap.parse_args()

    params = PhysicalParams(1.0, args.eta)
    tg = TimeGrid(args.t_end, args.steps)
    res = run(GaussianPacket(1.0), make_zero_force(tg), params,
              SolverConfig(SpatialGrid(-32.0, 32.0, 1024), tg))
    print(f"{'t':>8} {'solver':>14} {'closed form':>14} {'rel err':>10}")
    for j in range(0, tg.n_nodes, max(1, tg.n_steps // 16)):
        t = res.times[j]
        exact = gaussian_width(1.0, 1.0, tau_of_t(params.gamma, t))
        print(f"{t:8.3f} {res.width[j]:14.10f} {exact:14.10f} {abs(res.width[j] / exact - 1):10.2e}")
    if params.gamma > 0:
        print(f"frozen width sqrt(1 + 1/(4 gamma^2)) = {math.sqrt(1 + 0.25 / params.gamma**2):.10f}")


if __name__ == "__main__":
    main()
