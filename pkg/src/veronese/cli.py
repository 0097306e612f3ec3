"""Command-line front end: ``veronese {analyze,geodesics,dual,verify} --config FILE``.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 evaluation error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .checks import THRESHOLDS, run_suite
from .config import JobConfig, load_config, parse_config
from .connection import (PerturbedConnection, curvature_rho, ricci_general, web_connection,
                         wong_normal_form)
from .duality import QueryGrid, WebDualODE, default_query_grid, k0
from .errors import ConfigError, VeroneseError
from .export import write_json, write_table
from .ode import ConnectionODE, integrate_geodesic
from .web import leaf_through

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_EVAL = 0, 1, 2, 3

log = logging.getLogger("veronese")


class Job:
    """A config plus the web and (possibly perturbed) connection built from it."""

    def __init__(self, config: JobConfig, perturb: float = 0.0):
        self.config = config
        self.web = config.build_web()
        base = web_connection(self.web)
        self.conn = PerturbedConnection(base, perturb) if perturb else base
        self.perturb = perturb


# worker processes rebuild the job from the config text
_JOB: Job | None = None


def _init_worker(text: str, perturb: float) -> None:
    global _JOB
    _JOB = Job(parse_config(text), perturb)


def _parallel_map(fn, items: list, job: Job, workers: int) -> list:
    global _JOB
    if workers <= 1 or len(items) < 2:
        _JOB = job
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(workers, initializer=_init_worker,
                             initargs=(job.config.text, job.perturb)) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


# analyze -------------------------------------------------------------------------

def _analyze_point(pt):
    job = _JOB
    x, y = pt
    G = job.conn.components(x, y)
    rho = curvature_rho(job.web, (x, y), rtol=math.inf)
    ric = ricci_general(job.conn, (x, y))
    nf = wong_normal_form(job.web, (x, y), tol=math.inf)
    A, B = web_connection(job.web).diagonal(x, y)
    return {
        "connection": (x, y, *G),
        "curvature": (x, y, rho.formula, rho.compact),
        "ricci": (x, y, ric[0, 0], ric[0, 1], ric[1, 0], ric[1, 1],
                  float(np.max(np.abs(ric + ric.T))), ric[0, 1] - rho.formula),
        "wong": (x, y, nf.f, nf.f_x, nf.f_y),
        "checks": (rho.discrepancy, float(np.max(np.abs(ric + ric.T))), abs(ric[0, 1] - rho.formula),
                   max(abs(A + nf.f_x), abs(B - nf.f_y))),
    }


ANALYZE_COLUMNS = {
    "connection": ("x", "y", "G^x_xx", "G^x_xy", "G^x_yy", "G^y_xx", "G^y_xy", "G^y_yy"),
    "curvature": ("x", "y", "rho_formula", "rho_compact"),
    "ricci": ("x", "y", "ric_xx", "ric_xy", "ric_yx", "ric_yy", "skew", "ric_xy_minus_rho"),
    "wong": ("x", "y", "f", "f_x", "f_y"),
}


def cmd_analyze(job: Job, out: Path, fmt: str, workers: int) -> int:
    xs, ys = job.web.domain.grid(job.config.curvature_grid)
    pts = [(float(x), float(y)) for x in xs for y in ys]
    rows = _parallel_map(_analyze_point, pts, job, workers)
    h = job.config.config_hash
    for name, cols in ANALYZE_COLUMNS.items():
        write_table(out, name, cols, [r[name] for r in rows], fmt, h, "analyze")
    worst = np.max(np.array([r["checks"] for r in rows]), axis=0)
    names = ("rho_two_path", "ricci_skew", "ricci_rho", "wong_normal_form")
    records = [{"name": n, "residual": float(v), "threshold": THRESHOLDS[n], "passed": bool(v < THRESHOLDS[n])}
               for n, v in zip(names, worst)]
    write_json(out / "analyze_summary.json", {"web": job.web.name, "grid": job.config.curvature_grid,
                                              "checks": records}, h, "analyze")
    return EXIT_OK if all(r["passed"] for r in records) else EXIT_VERIFY


# geodesics -------------------------------------------------------------------------

def _geodesic(args):
    job = _JOB
    x0, y0, p0, x_end = args
    cfg = job.config
    curve = integrate_geodesic(ConnectionODE(job.conn), x0, y0, p0, x_end, rtol=cfg.rtol)
    a, b = job.web.pair(x0, y0)
    t = job.web.labels(-b / a * p0)
    defects = []
    for x, y, _ in curve:
        try:
            defects.append(abs(y - leaf_through(job.web, t, (x0, y0), x, cfg.rtol)))
        except VeroneseError:
            defects.append(math.nan)
    return [(x, y, p, d) for (x, y, p), d in zip(curve, defects)]


def _geodesic_safe(args):
    try:
        return "ok", _geodesic(args)
    except VeroneseError as exc:
        return "error", f"{type(exc).__name__}: {exc}"


def cmd_geodesics(job: Job, out: Path, fmt: str, workers: int) -> int:
    cfg = job.config
    if not cfg.initial:
        raise ConfigError("[geodesics] initial is empty")
    x_end = job.web.domain.x_max if cfg.x_end is None else cfg.x_end
    results = _parallel_map(_geodesic_safe, [(*ic, x_end) for ic in cfg.initial], job, workers)
    h = cfg.config_hash
    summary = []
    for i, (ic, (status, payload)) in enumerate(zip(cfg.initial, results)):
        rec = {"index": i, "initial": list(ic), "status": status}
        if status == "ok":
            path = write_table(out, f"geodesic_{i:03d}", ("x", "y", "p", "leaf_defect"), payload, fmt, h,
                               "geodesics")
            rec["file"] = path.name
            rec["points"] = len(payload)
            rec["max_leaf_defect"] = max((d for *_, d in payload if not math.isnan(d)), default=math.nan)
        else:
            rec["error"] = payload
            log.warning("geodesic %d failed: %s", i, payload)
        summary.append(rec)
    write_json(out / "geodesics_summary.json", {"x_end": x_end, "curves": summary}, h, "geodesics")
    return EXIT_OK if any(r["status"] == "ok" for r in summary) else EXIT_EVAL


# dual ---------------------------------------------------------------------------

def _dual_point(q):
    job = _JOB
    cfg = job.config
    F = WebDualODE(job.web, cfg.x_ref, cfg.dual_method, cfg.dual_rtol)
    try:
        val = F(*q)
        kval = k0(F, *q, steps=(cfg.fd_step,) * 3)
        return (*q, val, kval, "ok")
    except VeroneseError as exc:
        return (*q, math.nan, math.nan, type(exc).__name__)


def query_grid(job: Job) -> QueryGrid:
    cfg = job.config
    n = cfg.dual_grid
    if cfg.t_range and cfg.z_range and cfg.p_range:
        return QueryGrid(*(np.linspace(*r, n) for r in (cfg.t_range, cfg.z_range, cfg.p_range)))
    return default_query_grid(job.web, cfg.x_ref, n)


def cmd_dual(job: Job, out: Path, fmt: str, workers: int) -> int:
    grid = query_grid(job)
    rows = _parallel_map(_dual_point, grid.points(), job, workers)
    h = job.config.config_hash
    write_table(out, "dual_grid", ("t", "z", "p", "F", "K0", "status"), rows, fmt, h, "dual")
    ok = [r for r in rows if r[5] == "ok"]
    k = np.abs([r[4] for r in ok]) if ok else np.array([math.nan])
    f = np.abs([r[3] for r in ok]) if ok else np.array([math.nan])
    summary = {"points": len(rows), "failures": len(rows) - len(ok), "max_abs_K0": float(np.max(k)),
               "mean_abs_K0": float(np.mean(k)), "max_abs_F": float(np.max(f)),
               "method": job.config.dual_method, "fd_step": job.config.fd_step}
    write_json(out / "dual_summary.json", summary, h, "dual")
    return EXIT_OK if ok else EXIT_EVAL


# verify ---------------------------------------------------------------------------

def cmd_verify(job: Job, out: Path, fmt: str, seed: int) -> int:
    cfg = job.config
    grid = query_grid(job)
    recs = run_suite(job.web, job.conn, seed, grid, cfg.x_ref, (cfg.fd_step,) * 3)
    h = cfg.config_hash
    write_json(out / "verify.json", {"web": job.web.name, "seed": seed, "perturb_gamma": job.perturb,
                                     "records": [r.as_dict() for r in recs]}, h, "verify")
    if fmt == "csv":
        write_table(out, "verify", ("name", "residual", "threshold", "passed"),
                    [(r.name, r.residual, r.threshold, r.passed) for r in recs], fmt, h, "verify")
    for r in recs:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:24s} {r.residual:.3e} < {r.threshold:.0e}")
    return EXIT_OK if all(r.passed for r in recs) else EXIT_VERIFY


# entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI job file")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--format", choices=("csv", "json"), help="table format (overrides [output] format)")
    common.add_argument("--seed", type=int, help="seed for randomized suites (default 42)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for grid jobs")
    common.add_argument("--perturb-gamma", type=float, default=0.0, metavar="EPS",
                        help="add EPS to G^x_xy (fault injection)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="veronese", description="Veronese webs, their connections and dual ODEs.")
    p.add_argument("--version", action="version", version=f"veronese {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="connection, curvature, Ricci and normal-form grids")
    sub.add_parser("geodesics", parents=[common], help="integrate geodesics from [geodesics] initial data")
    sub.add_parser("dual", parents=[common], help="dual F and K0 on the query grid")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.out_dir)
    fmt = args.format or cfg.out_format
    seed = cfg.seed if args.seed is None else args.seed
    try:
        job = Job(cfg, args.perturb_gamma)
        if args.command == "analyze":
            return cmd_analyze(job, out, fmt, args.workers)
        if args.command == "geodesics":
            return cmd_geodesics(job, out, fmt, args.workers)
        if args.command == "dual":
            return cmd_dual(job, out, fmt, args.workers)
        return cmd_verify(job, out, fmt, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VeroneseError as exc:
        print(f"evaluation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
