from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from tomlkit import load
from tomlkit.exceptions import TOMLKitError

from gfswe.scheme.cases import get_case
from gfswe.scheme.dec_time import DEFAULT_CFL, DecNodes
from gfswe.scheme.solver import DEFAULT_STEADY_TOL, Scheme
from gfswe.scheme.weno import DEFAULT_EPSILON, SUPPORTED_ORDERS
from gfswe.util.exceptions import ConfigError


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    case: str = "lake_at_rest"
    scheme: Scheme = Scheme.GF_WB
    order: int = 5
    cells: int = 100
    cfl: float = DEFAULT_CFL
    tend: Optional[float] = None  # case default when unset
    out: Path = Path("out")
    snapshots: Optional[list[float]] = None
    dec_nodes: DecNodes = DecNodes.EQUISPACED
    quadrature_nodes: Optional[int] = None  # r + 1 Gauss-Lobatto nodes when unset
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0)
    steady_tol: float = Field(default=DEFAULT_STEADY_TOL, gt=0)
    max_steps: Optional[int] = Field(default=None, ge=1)

    @field_validator("case")
    @classmethod
    def _known_case(cls, value: str) -> str:
        get_case(value)
        return value

    @field_validator("order")
    @classmethod
    def _supported_order(cls, value: int) -> int:
        if value not in SUPPORTED_ORDERS:
            raise ValueError(f"order must be one of {SUPPORTED_ORDERS}")
        return value

    @field_validator("cells")
    @classmethod
    def _positive_cells(cls, value: int) -> int:
        if value < 1:
            raise ValueError("need at least one cell")
        return value

    @field_validator("cfl")
    @classmethod
    def _cfl_range(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError("CFL number must be in (0, 1]")
        return value

    @field_validator("tend")
    @classmethod
    def _positive_tend(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError("final time must be positive")
        return value

    @field_validator("quadrature_nodes")
    @classmethod
    def _node_count(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 2:
            raise ValueError("the global flux needs at least 2 Gauss-Lobatto nodes")
        return value

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        return make_config({**self.model_dump(), **overrides})


def make_config(values: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e


def read_config_file(path: Path) -> dict[str, Any]:
    """Plain key = value TOML; unknown keys are rejected when the config is built."""
    try:
        with open(path, "r") as f:
            return load(f).unwrap()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except TOMLKitError as e:
        raise ConfigError(f"malformed config file {path}: {e}") from e


def build_config(path: Optional[Path], overrides: dict[str, Any]) -> RunConfig:
    """File values first, then every override that is not None."""
    values = read_config_file(path) if path is not None else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(values)
