"""Loop-transport deviation from a scalar as the loop shrinks.

Compares web connections (skew Ricci, scalar transport) with a connection
whose Ricci form is not skew, where the deviation decays like h^2.

    python scripts/holonomy_order.py --out out/holonomy
"""
import argparse
from pathlib import Path

from veronese.connection import (ExpressionConnection, constant_curvature_web, holonomy,
                                 scalar_deviation, web_connection)
from veronese.export import write_csv
from veronese.jetcalc import Rect
from veronese.web import from_3web


def cases():
    square = Rect(-1.0, 1.0, -1.0, 1.0)
    yield "constant_curvature:1", web_connection(constant_curvature_web(1.0)), (0.1, -0.2)
    yield "constant_curvature:-2", web_connection(constant_curvature_web(-2.0)), (0.1, -0.2)
    web = from_3web("x + y + 0.3*sin(2*x+y) + 0.2*exp(x*y)")
    yield "sin_exp", web_connection(web), web.domain.center
    yield "non_skew_control", ExpressionConnection({"G^x_xy": "0.5*x", "G^y_yy": "y"}, square), (0.1, 0.2)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sides", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args(argv)

    rows = []
    for name, conn, center in cases():
        devs = [scalar_deviation(holonomy(conn, center, h)) for h in args.sides]
        for i, (h, d) in enumerate(zip(args.sides, devs)):
            ratio = devs[i - 1] / d if i and d > 0 else float("nan")
            rows.append((name, h, d, ratio))
            print(f"{name:24s} h={h:<6g} deviation={d:.3e} ratio={ratio:.2f}")
    if args.out is not None:
        write_csv(args.out / "holonomy_order.csv", ["case", "h", "deviation", "ratio"], rows, "script")


if __name__ == "__main__":
    main()
