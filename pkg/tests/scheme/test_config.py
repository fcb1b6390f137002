from pathlib import Path

import pytest
from pydantic import ValidationError

from gfswe.scheme.config import RunConfig, build_config, make_config, read_config_file
from gfswe.scheme.dec_time import DecNodes
from gfswe.scheme.solver import Scheme
from gfswe.util.exceptions import ConfigError
from tests.scheme.test_helpers import TmpDirectory


def test_defaults() -> None:
    config = make_config({})
    assert config.case == "lake_at_rest"
    assert config.scheme is Scheme.GF_WB
    assert config.order == 5
    assert config.cells == 100
    assert config.cfl == 0.4
    assert config.tend is None
    assert config.dec_nodes is DecNodes.EQUISPACED
    assert config.steady_tol == 1e-13


@pytest.mark.parametrize(
    "values",
    [
        {"order": 4},
        {"cells": 0},
        {"cfl": 0.0},
        {"cfl": 1.5},
        {"tend": -1.0},
        {"case": "dam_break"},
        {"scheme": "godunov"},
        {"quadrature_nodes": 1},
        {"epsilon": 0.0},
        {"max_steps": 0},
        {"colour": "blue"},
    ],
)
def test_invalid_values(values: dict) -> None:
    with pytest.raises(ConfigError):
        make_config(values)


def test_overrides_build_a_new_config() -> None:
    config = make_config({"case": "subcritical", "order": 3})
    other = config.with_overrides(cells=50, scheme="classical")
    assert (other.case, other.order, other.cells, other.scheme) == ("subcritical", 3, 50, Scheme.CLASSICAL)
    assert config.cells == 100
    with pytest.raises(ConfigError):
        config.with_overrides(order=7)
    with pytest.raises(ValidationError):
        config.cells = 10


def test_config_file_and_overrides() -> None:
    with TmpDirectory(prefix="/tmp") as tmp_path:
        path = tmp_path / "run.toml"
        path.write_text('case = "subcritical"\norder = 3\ncells = 40\nsnapshots = [0.0, 1.5]\ndec_nodes = "lobatto"\n')
        assert read_config_file(path)["cells"] == 40

        config = build_config(path, {"cells": 80, "cfl": None, "out": Path("results")})
        assert config.case == "subcritical"
        assert config.order == 3
        assert config.cells == 80
        assert config.cfl == 0.4
        assert config.snapshots == [0.0, 1.5]
        assert config.dec_nodes is DecNodes.LOBATTO
        assert config.out == Path("results")


def test_bad_config_files() -> None:
    with TmpDirectory(prefix="/tmp") as tmp_path:
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "missing.toml")

        broken = tmp_path / "broken.toml"
        broken.write_text("case = \n")
        with pytest.raises(ConfigError):
            build_config(broken, {})

        unknown = tmp_path / "unknown.toml"
        unknown.write_text("meshes = 3\n")
        with pytest.raises(ConfigError):
            build_config(unknown, {})


def test_no_file() -> None:
    config = build_config(None, {"scheme": "gf_nonwb", "order": None})
    assert isinstance(config, RunConfig)
    assert config.scheme is Scheme.GF_NONWB
    assert config.order == 5
