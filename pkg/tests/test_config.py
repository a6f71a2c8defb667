import math
from pathlib import Path

import pytest

from pegsim import config
from pegsim.contact import DEFAULT_QUADRATURE
from pegsim.errors import ConfigError
from pegsim.sim import SIM_QUADRATURE, nominal_geometry

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("name", ["clearance", "interference", "open_loop", "explicit_geometry"])
def test_shipped_configs_load(name):
    cfg = config.load(CONFIGS / f"{name}.json")
    cfg.simulation().validate()


def test_explicit_geometry_units():
    cfg = config.load(CONFIGS / "explicit_geometry.json")
    g = cfg.scenario.geometry
    assert g.R == pytest.approx(5.05e-3) and g.k == pytest.approx(265258238.49, rel=1e-9)
    assert cfg.scenario.initial_deviation.theta_y == pytest.approx(math.radians(-1.0))
    assert cfg.scenario.tolerances.eps_angle == pytest.approx(math.radians(2.0))
    assert cfg.scenario.x_d_limit == pytest.approx((1e-8, 1e-8, 1e-8, 1e-6, 1e-6))
    assert cfg.map.depths == pytest.approx((1e-3, 5e-3, 10e-3))
    assert cfg.simulation().quadrature == SIM_QUADRATURE
    # an explicit rule overrides both the simulation and the verification default
    assert cfg.verify_quadrature() == SIM_QUADRATURE != DEFAULT_QUADRATURE


def test_defaults():
    cfg = config.build({})
    assert cfg.scenario.geometry == nominal_geometry("clearance")
    assert not cfg.geometry_given and cfg.plots
    cfg = config.build({"quadrature": {"n_s": 8}})
    assert cfg.simulation().quadrature.n_s == 8 and cfg.verify_quadrature().n_alpha == DEFAULT_QUADRATURE.n_alpha


@pytest.mark.parametrize(
    "raw, where",
    [
        ({"dt": {"value": 1, "unit": "kg"}}, "dt.unit"),
        ({"geometry": {"fit": "loose"}}, "geometry"),
        ({"initial_deviation": {"d_z": {"value": 1, "unit": "mm"}}}, "initial_deviation"),
        ({"seed": -1}, "seed"),
    ],
)
def test_schema_errors_name_the_field(raw, where):
    with pytest.raises(ConfigError, match=where):
        config.build(raw)


def test_semantic_errors_are_config_errors():
    with pytest.raises(ConfigError):
        config.build({"geometry": {"fit": "clearance", "mu": -0.1}})
    with pytest.raises(ConfigError):
        config.build({"target_depth": {"value": 20, "unit": "mm"}}).simulation().validate()


def test_output_dir_precedence(monkeypatch):
    cfg = config.build({"output": {"dir": "cfgdir"}})
    monkeypatch.delenv(config.ENV_OUT, raising=False)
    assert config.output_dir(None, None) == Path(config.DEFAULT_OUT)
    assert config.output_dir(None, cfg) == Path("cfgdir")
    monkeypatch.setenv(config.ENV_OUT, "envdir")
    assert config.output_dir(None, cfg) == Path("envdir")
    assert config.output_dir("flagdir", cfg) == Path("flagdir")
