"""Wong normal form and the rectified first-order equation for a 3-web potential.

    python scripts/rectification.py "x + y + x*y" --domain 0 1 0 1
"""
import argparse
from pathlib import Path

import numpy as np

from veronese.connection import web_connection, wong_normal_form
from veronese.errors import DomainExitError
from veronese.export import write_csv
from veronese.jetcalc import Rect
from veronese.ode import derivative_form, geodesic_ode, integrate_geodesic, transformed_residuals
from veronese.web import from_3web


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("potential")
    ap.add_argument("--domain", type=float, nargs=4, default=[0.0, 1.0, 0.0, 1.0],
                    metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    ap.add_argument("--curves", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args(argv)

    web = from_3web(args.potential, domain=Rect(*args.domain))
    conn = web_connection(web)
    rng = np.random.default_rng(args.seed)
    d = web.domain.inner(0.1)

    wong = 0.0
    for x, y in zip(rng.uniform(d.x_min, d.x_max, 20), rng.uniform(d.y_min, d.y_max, 20)):
        nf = wong_normal_form(web, (x, y))
        A, B = conn.diagonal(x, y)
        wong = max(wong, abs(A + nf.f_x), abs(B - nf.f_y))
    print(f"Wong normal form: max |G^x_xx + f_x|, |G^y_yy - f_y| = {wong:.2e}")

    form, ode = derivative_form(web), geodesic_ode(web)
    rows = []
    for i in range(args.curves):
        x0, y0 = rng.uniform(d.x_min, d.x_min + 0.3 * d.width), rng.uniform(d.y_min, d.y_max)
        p0 = rng.uniform(-0.5, 0.5)
        x_end = x0 + 0.4 * d.width
        try:
            curve = integrate_geodesic(ode, x0, y0, p0, x_end, rtol=1e-12, x_eval=np.linspace(x0, x_end, 6))
        except DomainExitError:
            continue
        res = float(np.max(np.abs(transformed_residuals(form, curve))))
        rows.append((i, x0, y0, p0, res))
        print(f"curve {i}: start ({x0:.3f}, {y0:.3f}) p0={p0:+.3f} residual={res:.2e}")
    if args.out is not None:
        write_csv(args.out / "rectification.csv", ["curve", "x0", "y0", "p0", "residual"], rows, "script")


if __name__ == "__main__":
    main()
