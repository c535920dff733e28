"""Per-step and fixed-horizon drift of the scheme on stationary Euler data.

Laplacian eigenfunctions are steady solutions, so any change is scheme error.
The per-step drift shrinks like tau^3 and the drift accumulated up to a fixed
horizon like tau^2.
"""

import argparse

import numpy as np

from vortexcg import scheme, torus
from vortexcg.analysis import fit_order
from vortexcg.initial import InitialCondition
from vortexcg.torus import GridSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--t-final", type=float, default=0.5)
    ap.add_argument("--taus", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--initial", default="eigen_pair", choices=["eigen_pair", "shear"])
    args = ap.parse_args()
    grid = GridSpec(args.n)
    w0 = InitialCondition(args.initial).generate(grid)

    step_drift, horizon_drift = [], []
    for tau in args.taus:
        step_drift.append(torus.sobolev_norm(scheme.single_step(w0, tau, grid) - w0, 0))
        cfg = scheme.SchemeConfig(tau=tau, t_final=args.t_final, grid=grid)
        horizon_drift.append(torus.sobolev_norm(scheme.run(w0, cfg).final.omega - w0, 0))
        print(f"tau={tau:<8g} step drift {step_drift[-1]:.4e}   drift at T={args.t_final:g} {horizon_drift[-1]:.4e}")

    for name, d in (("per step", step_drift), ("horizon", horizon_drift)):
        if min(d) > 0 and len(d) >= 3:
            slope = fit_order(list(zip(args.taus, d)))[0]
            ratios = np.array(d[:-1]) / np.array(d[1:])
            print(f"{name:<9} slope {slope:.3f}  ratios {np.round(ratios, 3).tolist()}")


if __name__ == "__main__":
    main()
