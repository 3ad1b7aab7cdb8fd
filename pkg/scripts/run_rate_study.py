#!/usr/bin/env python3
"""Convergence-rate study for HCMM-1 on a noisy quadratic saddle.

Runs the theorem schedule over a geometric ladder of horizons and fits the
log-log slope of the time-averaged ||grad P||; the predicted decay is
T^(-1/3). Writes rate_hcmm1.csv under --out.
"""

import argparse

import numpy as np

from hcmm.harness import build_config, rate_study
from hcmm.problems import QuadraticMinimaxProblem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/rate_study")
    ap.add_argument("--T", default="1e3,1e4,1e5",
                    help="comma-separated horizon ladder")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--sigma", type=float, default=1.0)
    args = ap.parse_args()

    nu = 24.0
    q = QuadraticMinimaxProblem.random(10, 10, nu=nu, noise_sigma=args.sigma,
                                       seed=0, a_eigs=(12.0, 24.0),
                                       b_scale=0.1)
    mapping = {
        "problem.kind": "quadratic",
        "problem.d": "10", "problem.m": "10", "problem.nu": repr(nu),
        "problem.noise_sigma": repr(args.sigma), "problem.seed": "0",
        "problem.spectrum": "12.0,24.0", "problem.b_scale": "0.1",
        "optimizer.kind": "hcmm1",
        "optimizer.project_y": "false",
        "schedule.kind": "theorem1",
        "schedule.N1": "50.0",
        "constants.L_f": repr(float(q.lipschitz_L_f)),
        "constants.L_h": "1e-3",
        "constants.nu": repr(nu),
        "constants.sigma": repr(args.sigma),
        "constants.sigma_h": repr(float(args.sigma * np.sqrt(20.0))),
        "run.T": "100000",
        "run.seeds": ",".join(str(s) for s in range(args.seeds)),
        "run.output_dir": args.out,
    }
    T_values = [int(float(t)) for t in args.T.split(",")]
    rep = rate_study(build_config(mapping), T_values)
    for T, avg in zip(rep.T_values, rep.averaged_norms):
        print(f"T={T}: time-avg ||grad P|| = {avg:.6g}")
    print(f"log-log slope: {rep.slope:.4f} (target -1/3)")


if __name__ == "__main__":
    main()
