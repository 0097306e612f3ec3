"""Curvature and dual K0 for the constant-curvature family dx + t e^{Cxy} dy.

    python scripts/constant_curvature_k0.py -C 1 -2 0.5 --grid 5
"""
import argparse
import time
from pathlib import Path

import numpy as np

from veronese.connection import constant_curvature_web, curvature_rho
from veronese.duality import WebDualODE, default_query_grid, k0_grid
from veronese.export import write_csv


def run(C: float, grid_n: int, rho_n: int):
    web = constant_curvature_web(C)
    xs, ys = web.domain.grid(rho_n)
    rho_dev = max(abs(curvature_rho(web, (x, y)).formula - C) for x in xs for y in ys)
    F = WebDualODE(web)
    start = time.perf_counter()
    K = k0_grid(F, default_query_grid(web, F.x_ref, n=grid_n))
    return rho_dev, float(np.max(np.abs(K))), float(np.mean(np.abs(K))), time.perf_counter() - start


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-C", type=float, nargs="+", default=[1.0, -2.0])
    ap.add_argument("--grid", type=int, default=5, help="dual query points per axis")
    ap.add_argument("--rho-grid", type=int, default=32)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args(argv)

    rows = []
    for C in args.C:
        rho_dev, k_max, k_mean, secs = run(C, args.grid, args.rho_grid)
        rows.append((C, rho_dev, k_max, k_mean, secs))
        print(f"C={C:<5g} max|rho-C|={rho_dev:.2e} max|K0|={k_max:.2e} mean|K0|={k_mean:.2e} ({secs:.1f} s)")
    if args.out is not None:
        write_csv(args.out / "constant_curvature_k0.csv",
                  ["C", "rho_dev", "max_abs_K0", "mean_abs_K0", "seconds"], rows, "script")


if __name__ == "__main__":
    main()
