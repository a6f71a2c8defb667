"""JSON scenario configs: schema validation, unit conversion to SI and
assembly of the simulation objects.

Every dimensioned value is written as ``{"value": x, "unit": "mm"}``; a bare
number where a quantity is expected is a schema error.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .contact import DEFAULT_QUADRATURE, Geometry, QuadratureSpec
from .controller import ComplianceParams
from .errors import ConfigError
from .geometry import FeatureVector
from .sim import DEFAULT_DEADBAND, SIM_QUADRATURE, Scenario, nominal_geometry
from .states import DEFAULT_TOLERANCES, XOZ, BoundaryTolerances

UNITS = {
    "m": 1.0,
    "mm": 1e-3,
    "rad": 1.0,
    "deg": math.pi / 180.0,
    "s": 1.0,
    "ms": 1e-3,
    "m/s": 1.0,
    "mm/s": 1e-3,
    "N": 1.0,
    "N*m": 1.0,
    "Pa": 1.0,
    "MPa": 1e6,
    "GPa": 1e9,
}

DEFAULT_OUT = "pegsim_out"
ENV_OUT = "PEGSIM_OUT"


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("pegsim").joinpath("scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _where(path) -> str:
    return ".".join(str(p) for p in path) or "<root>"


def validate(raw) -> None:
    """Raise ConfigError naming the first offending field."""
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema()).iter_errors(raw))
    if err is None:
        return
    raise ConfigError(f"{_where(err.absolute_path)}: {err.message}")


def si(q: dict) -> float:
    return float(q["value"]) * UNITS[q["unit"]]


@dataclass(frozen=True)
class MapSettings:
    plane: str = XOZ
    depths: tuple = (1e-3, 5e-3, 10e-3)
    d_range: float = 0.03e-3
    theta_range: float = math.radians(2.0)
    n_d: int = 41
    n_theta: int = 41


@dataclass(frozen=True)
class SweepSettings:
    n: int = 20
    lateral: float = 0.1e-3
    tilt: float = math.radians(2.0)


@dataclass(frozen=True)
class RunConfig:
    """Parsed config. ``quadrature`` holds only the keys given in the file so
    each command can apply them over its own default rule."""

    scenario: Scenario
    geometry_given: bool = False
    quadrature: dict = field(default_factory=dict)
    map: MapSettings = MapSettings()
    sweep: SweepSettings = SweepSettings()
    out_dir: str | None = None
    plots: bool = True

    def quadrature_over(self, base: QuadratureSpec) -> QuadratureSpec:
        return replace(base, **self.quadrature)

    def simulation(self) -> Scenario:
        return replace(self.scenario, quadrature=self.quadrature_over(SIM_QUADRATURE))

    def verify_quadrature(self) -> QuadratureSpec:
        return self.quadrature_over(DEFAULT_QUADRATURE)


def build_geometry(raw: dict) -> Geometry:
    if "fit" in raw:
        radius = si(raw["nominal_radius"]) if "nominal_radius" in raw else 5e-3
        g = nominal_geometry(raw["fit"], radius)
    else:
        g = None
    vals = {}
    for name in ("R", "r", "L", "H", "k"):
        if name in raw:
            vals[name] = si(raw[name])
    if "mu" in raw:
        vals["mu"] = float(raw["mu"])
    return replace(g, **vals) if g is not None else Geometry(**vals)


def build(raw: dict) -> RunConfig:
    validate(raw)
    try:
        return _assemble(raw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from None


def _assemble(raw: dict) -> RunConfig:
    g = build_geometry(raw.get("geometry", {"fit": "clearance"}))
    dev = raw.get("initial_deviation", {})
    x0 = FeatureVector(
        d_x=si(dev["d_x"]) if "d_x" in dev else 0.0,
        d_y=si(dev["d_y"]) if "d_y" in dev else 0.0,
        theta_x=si(dev["theta_x"]) if "theta_x" in dev else 0.0,
        theta_y=si(dev["theta_y"]) if "theta_y" in dev else 0.0,
    )
    kw = {}
    for name in ("target_depth", "dt", "duration", "v_feed", "integral_time", "force_limit", "moment_limit", "settle_time"):
        if name in raw:
            kw[name] = si(raw[name])
    for name in ("controller", "hold", "seed"):
        if name in raw:
            kw[name] = raw[name]
    if "yoz_sign" in raw:
        kw["yoz_sign"] = float(raw["yoz_sign"])
    if "params" in raw:
        kw["params"] = ComplianceParams.table(raw["params"])
    if "x_d_limit" in raw:
        a, b = si(raw["x_d_limit"]["length"]), si(raw["x_d_limit"]["angle"])
        kw["x_d_limit"] = (a, a, a, b, b)
    else:
        kw["x_d_limit"] = DEFAULT_DEADBAND
    tol = raw.get("tolerances", {})
    kw["tolerances"] = BoundaryTolerances(
        eps_force=si(tol["eps_force"]) if "eps_force" in tol else DEFAULT_TOLERANCES.eps_force,
        eps_angle=si(tol["eps_angle"]) if "eps_angle" in tol else DEFAULT_TOLERANCES.eps_angle,
    )
    sc = Scenario(g, x0, **kw)

    m = raw.get("map", {})
    mp = MapSettings(
        plane=m.get("plane", XOZ),
        depths=tuple(si(d) for d in m["depths"]) if "depths" in m else MapSettings.depths,
        d_range=si(m["d_range"]) if "d_range" in m else MapSettings.d_range,
        theta_range=si(m["theta_range"]) if "theta_range" in m else MapSettings.theta_range,
        n_d=m.get("n_d", MapSettings.n_d),
        n_theta=m.get("n_theta", MapSettings.n_theta),
    )
    sw = raw.get("sweep", {})
    sp = SweepSettings(
        n=sw.get("n", SweepSettings.n),
        lateral=si(sw["lateral"]) if "lateral" in sw else SweepSettings.lateral,
        tilt=si(sw["tilt"]) if "tilt" in sw else SweepSettings.tilt,
    )
    out = raw.get("output", {})
    return RunConfig(
        scenario=sc,
        geometry_given="geometry" in raw,
        quadrature=dict(raw.get("quadrature", {})),
        map=mp,
        sweep=sp,
        out_dir=out.get("dir"),
        plots=out.get("plots", True),
    )


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return build(raw)


def output_dir(cli_out: str | None, cfg: RunConfig | None) -> Path:
    """``--out`` beats ``$PEGSIM_OUT``, which beats the config's ``output.dir``."""
    for cand in (cli_out, os.environ.get(ENV_OUT), cfg.out_dir if cfg else None):
        if cand:
            return Path(cand)
    return Path(DEFAULT_OUT)
