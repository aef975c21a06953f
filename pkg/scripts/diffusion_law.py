"""Compare the ensemble center variance with the two closed-form diffusion laws.

``thermal`` is (D/eta^2)[t - tau(t)], which holds for a thermalized initial
velocity. ``at rest`` is the exact variance for a center released at rest,
which is what the simulation does.
"""
import argparse
import math

from ckbrownian.acceptance import BASE_SEED
from ckbrownian.core import GaussianPacket, PhysicalParams, TimeGrid
from ckbrownian.ensemble import default_probe_times, run_ensemble
from ckbrownian.kernels import classical_center_variance_exact, classical_uncertainty_analytic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=BASE_SEED)
    ap.add_argument("--steps", type=int, default=1000)
    args = ap.parse_args()

    params = PhysicalParams(1.0, 1.0, 1.0)
    tg = TimeGrid(10.0, args.steps)
    rep = run_ensemble(params, GaussianPacket(1.0), tg, args.paths, args.seed)
    tol = 3 * math.sqrt(2 / (args.paths - 1))
    print(f"N = {args.paths}, 3-sigma band on relative error = {tol:.4f}")
    print(f"{'t':>6} {'sample var':>11} {'thermal':>9} {'rel':>7} {'at rest':>9} {'rel':>7}")
    for t in default_probe_times(params, tg.t_end):
        j = tg.index_of(t)
        thermal = classical_uncertainty_analytic(params, t) ** 2
        rest = classical_center_variance_exact(params, t)
        v = rep.center_var[j]
        print(f"{t:6.2f} {v:11.5f} {thermal:9.5f} {v / thermal - 1:+7.3f} {rest:9.5f} {v / rest - 1:+7.3f}")


if __name__ == "__main__":
    main()
