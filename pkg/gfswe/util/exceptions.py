from dataclasses import dataclass
from typing import override


class GfsweException(Exception):
    msg: str

    def __init__(self, msg: str = "") -> None:
        super().__init__(msg)
        self.msg = msg

    def __str__(self) -> str:
        return self.msg


class ConfigError(GfsweException, ValueError):
    """invalid grid, rule, case or run configuration"""


class OracleError(GfsweException):
    """reference solution unavailable or inconsistent case data"""


class SolverError(GfsweException):
    """the time integration could not continue"""


@dataclass
class PositivityError(SolverError):
    """Raised when a water depth is not strictly positive.

    Attributes:
        where (str): Which quantity failed, e.g. "cell average", "quadrature node", "interface".
        cell (int): Index of the offending cell or interface, counted from the first interior cell.
        value (float): The offending depth.
        time (float | None): Simulation time, if known.
    """

    where: str
    cell: int
    value: float
    time: float | None = None

    def __post_init__(self) -> None:
        super().__init__(str(self))

    @override
    def __str__(self) -> str:
        when = "" if self.time is None else f" at t={self.time:.6g}"
        return f"non-positive depth {self.value:.6g} ({self.where}) in cell {self.cell}{when}"


@dataclass
class NonFiniteError(SolverError):
    """Raised when NaN or inf shows up in the evolved state."""

    cell: int
    time: float

    def __post_init__(self) -> None:
        super().__init__(str(self))

    @override
    def __str__(self) -> str:
        return f"non-finite value in cell {self.cell} at t={self.time:.6g}"
