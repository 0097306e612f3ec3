"""Job configuration: an INI file read with :mod:`configparser`.

Example::

    [web]
    builtin = constant_curvature:1      ; or: potential = x+y+x*y
                                        ; or: coframe_a = 1 / coframe_b = exp(x*y)
    t2 = 1

    [domain]                            ; optional for builtins
    x_min = -1
    x_max = 1
    y_min = -1
    y_max = 1

    [grids]
    transversality = 64
    curvature = 32
    dual = 5

    [tolerances]
    rtol = 1e-10
    dual_rtol = 1e-12
    newton_tol = 1e-9
    fd_step = 0.004

    [dual]
    x_ref = -0.8                        ; default: left edge plus 10% of the width
    method = shooting                   ; or newton
    t_range = -0.3, 0.3                 ; optional, each with z_range / p_range
    z_range = -0.2, 0.2
    p_range = 0.7, 0.9

    [geodesics]
    initial = 0,0,1; 0.1,0.2,-0.5       ; x, y, p triples
    x_end = 0.9

    [output]
    dir = out
    format = csv
    seed = 42
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .jetcalc import Rect
from .web import WebSpec, from_3web, from_coframe

BUILTIN_DOMAINS = {
    "flat": Rect(-1.0, 1.0, -1.0, 1.0),
    "constant_curvature": Rect(-1.0, 1.0, -1.0, 1.0),
    "bilinear": Rect(0.0, 1.0, 0.0, 1.0),
}


@dataclass
class JobConfig:
    builtin: str | None = None
    potential: str | None = None
    coframe: tuple[str, str] | None = None
    t2: float = 1.0
    domain: Rect | None = None
    transversality_grid: int = 64
    curvature_grid: int = 32
    dual_grid: int = 5
    rtol: float = 1e-10
    dual_rtol: float = 1e-12
    newton_tol: float = 1e-9
    fd_step: float = 4e-3
    x_ref: float | None = None
    dual_method: str = "shooting"
    t_range: tuple[float, float] | None = None
    z_range: tuple[float, float] | None = None
    p_range: tuple[float, float] | None = None
    initial: list[tuple[float, float, float]] = field(default_factory=list)
    x_end: float | None = None
    out_dir: str = "out"
    out_format: str = "csv"
    seed: int = 42
    text: str = ""

    def __post_init__(self):
        sources = [s for s in (self.builtin, self.potential, self.coframe) if s is not None]
        if len(sources) != 1:
            raise ConfigError("exactly one web source (builtin, potential or coframe pair) is required")
        for name in ("rtol", "dual_rtol", "newton_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        for name in ("transversality_grid", "curvature_grid", "dual_grid"):
            if getattr(self, name) < 2:
                raise ConfigError(f"grid size {name} must be at least 2")
        if self.dual_method not in ("shooting", "newton"):
            raise ConfigError(f"unknown dual method {self.dual_method!r}")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")
        if self.builtin is not None:
            kind = self.builtin.split(":")[0]
            if kind not in BUILTIN_DOMAINS:
                raise ConfigError(f"unknown builtin web {self.builtin!r}")
            if kind == "constant_curvature":
                try:
                    float(self.builtin.split(":", 1)[1])
                except (IndexError, ValueError):
                    raise ConfigError("constant_curvature needs a value, e.g. constant_curvature:1") from None
        elif self.domain is None:
            raise ConfigError("a [domain] section is required for non-builtin webs")

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:12]

    def resolved_domain(self) -> Rect:
        if self.domain is not None:
            return self.domain
        return BUILTIN_DOMAINS[self.builtin.split(":")[0]]

    def build_web(self) -> WebSpec:
        """Construct and validate the web (may raise :class:`TransversalityError`)."""
        dom = self.resolved_domain()
        grid = self.transversality_grid
        if self.potential is not None:
            return from_3web(self.potential, self.t2, dom, grid, name=self.potential)
        if self.coframe is not None:
            return from_coframe(*self.coframe, dom, self.t2, grid, name="coframe")
        kind, _, arg = self.builtin.partition(":")
        if kind == "flat":
            return from_3web("x+y", self.t2, dom, grid, name="flat")
        if kind == "bilinear":
            return from_3web("x+y+x*y", self.t2, dom, grid, name="bilinear")
        C = float(arg)
        b = f"exp({C!r}*x*y)" if C >= 0 else f"exp(-{-C!r}*x*y)"
        return from_coframe("1", b, dom, self.t2, grid, name=self.builtin)


def _pair(text: str, key: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"{key} must be two comma-separated numbers") from None
    return a, b


def parse_config(text: str) -> JobConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    get = lambda sec, key, default=None: cp.get(sec, key, fallback=default) if cp.has_section(sec) else default
    try:
        kw = {}
        kw["builtin"] = get("web", "builtin")
        kw["potential"] = get("web", "potential")
        a, b = get("web", "coframe_a"), get("web", "coframe_b")
        if (a is None) != (b is None):
            raise ConfigError("coframe_a and coframe_b must be given together")
        kw["coframe"] = None if a is None else (a, b)
        kw["t2"] = float(get("web", "t2", "1"))
        if cp.has_section("domain"):
            kw["domain"] = Rect(*(float(cp.get("domain", k)) for k in ("x_min", "x_max", "y_min", "y_max")))
        for key, attr in (("transversality", "transversality_grid"), ("curvature", "curvature_grid"),
                          ("dual", "dual_grid")):
            v = get("grids", key)
            if v is not None:
                kw[attr] = int(v)
        for key in ("rtol", "dual_rtol", "newton_tol", "fd_step"):
            v = get("tolerances", key)
            if v is not None:
                kw[key] = float(v)
        if get("dual", "x_ref") is not None:
            kw["x_ref"] = float(get("dual", "x_ref"))
        kw["dual_method"] = get("dual", "method", "shooting")
        for key in ("t_range", "z_range", "p_range"):
            if get("dual", key) is not None:
                kw[key] = _pair(get("dual", key), key)
        init = get("geodesics", "initial")
        if init:
            kw["initial"] = [tuple(float(v) for v in item.split(",")) for item in init.split(";") if item.strip()]
            if any(len(ic) != 3 for ic in kw["initial"]):
                raise ConfigError("each initial condition is an x, y, p triple")
        if get("geodesics", "x_end") is not None:
            kw["x_end"] = float(get("geodesics", "x_end"))
        kw["out_dir"] = get("output", "dir", "out")
        kw["out_format"] = get("output", "format", "csv")
        kw["seed"] = int(get("output", "seed", "42"))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad value in config: {exc}") from None
    return JobConfig(text=text, **kw)


def load_config(path: str | Path) -> JobConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
