from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Callable, Literal, Protocol

import numpy as np

from gfswe.scheme.quadrature import QuadratureRule
from gfswe.util.exceptions import ConfigError, PositivityError

if TYPE_CHECKING:
    from gfswe.scheme.cases import CaseSpec

CellField = np.ndarray


@dataclass(frozen=True)
class Grid:
    """
    Uniform 1D grid with a ghost halo on both sides.

    Arrays defined on the grid have n_cells + 2 * n_ghost entries; the
    interior cells are `grid.interior`.
    """

    x_left: float
    x_right: float
    n_cells: int
    dx: float
    n_ghost: int

    @property
    def n_total(self) -> int:
        return self.n_cells + 2 * self.n_ghost

    @property
    def interior(self) -> slice:
        return slice(self.n_ghost, self.n_ghost + self.n_cells)

    def centers(self) -> np.ndarray:
        """Centers of every cell, ghosts included, x_i = x_left + (i + 1/2) dx."""
        index = np.arange(-self.n_ghost, self.n_cells + self.n_ghost, dtype=float)
        return self.x_left + (index + 0.5) * self.dx

    def interior_centers(self) -> np.ndarray:
        return self.centers()[self.interior]

    def left_edges(self) -> np.ndarray:
        index = np.arange(-self.n_ghost, self.n_cells + self.n_ghost, dtype=float)
        return self.x_left + index * self.dx

    def node_coordinates(self, rule: QuadratureRule) -> np.ndarray:
        """Physical coordinates of the rule nodes, shape (n_total, n_nodes)."""
        return self.left_edges()[:, None] + rule.nodes[None, :] * self.dx


def build_grid(x_left: float, x_right: float, n_cells: int, halo: int) -> Grid:
    if not x_right > x_left:
        raise ConfigError(f"empty domain [{x_left}, {x_right}]")
    if n_cells < 1:
        raise ConfigError(f"need at least one cell, got {n_cells}")
    if halo < 0:
        raise ConfigError(f"halo must be non-negative, got {halo}")
    return Grid(
        x_left=float(x_left),
        x_right=float(x_right),
        n_cells=int(n_cells),
        dx=(x_right - x_left) / n_cells,
        n_ghost=int(halo),
    )


def required_halo(order: int) -> int:
    """Ghost cells needed by the global flux pipeline at WENO order p: two overlapping stencil radii."""
    return order


@dataclass(frozen=True)
class PhysicalParams:
    g: float
    n_manning: float = 0.0

    def __post_init__(self) -> None:
        if not self.g > 0:
            raise ConfigError(f"gravity must be positive, got {self.g}")
        if self.n_manning < 0:
            raise ConfigError(f"Manning coefficient must be non-negative, got {self.n_manning}")


class BathymetryProfile(Protocol):
    """Analytic bed elevation b(x) with one-sided limits at its steps."""

    steps: tuple[Step, ...]

    def __call__(self, x: np.ndarray) -> np.ndarray: ...

    def derivative(self, x: np.ndarray) -> np.ndarray: ...

    def limit(self, x: np.ndarray, side: Literal["left", "right"]) -> np.ndarray: ...


@dataclass(frozen=True)
class Step:
    """Jump of the bed at `x` from `left` to `right`."""

    x: float
    left: float
    right: float

    @property
    def height(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class SmoothProfile:
    fn: Callable[[np.ndarray], np.ndarray]
    fn_prime: Callable[[np.ndarray], np.ndarray]
    steps: tuple[Step, ...] = ()

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))

    def derivative(self, x: np.ndarray) -> np.ndarray:
        return self.fn_prime(np.asarray(x, dtype=float))

    def limit(self, x: np.ndarray, side: Literal["left", "right"]) -> np.ndarray:
        return self(x)


@dataclass(frozen=True)
class PiecewiseConstantProfile:
    """Bed made of flat plateaus: `base` everywhere, `levels[k]` on the open interval `intervals[k]`."""

    base: float
    intervals: tuple[tuple[float, float], ...]
    levels: tuple[float, ...]
    steps: tuple[Step, ...] = field(init=False)

    def __post_init__(self) -> None:
        steps = []
        for (a, b), level in zip(self.intervals, self.levels):
            steps.append(Step(x=a, left=self.base, right=level))
            steps.append(Step(x=b, left=level, right=self.base))
        object.__setattr__(self, "steps", tuple(steps))

    def _evaluate(self, x: np.ndarray, open_left: bool, open_right: bool) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.base)
        for (a, b), level in zip(self.intervals, self.levels):
            inside = (x > a if open_left else x >= a) & (x < b if open_right else x <= b)
            out = np.where(inside, level, out)
        return out

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._evaluate(x, open_left=True, open_right=True)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    def limit(self, x: np.ndarray, side: Literal["left", "right"]) -> np.ndarray:
        # left limit: plateau (a, b] ; right limit: plateau [a, b)
        if side == "left":
            return self._evaluate(x, open_left=True, open_right=False)
        return self._evaluate(x, open_left=False, open_right=True)


@dataclass(frozen=True)
class Bathymetry:
    """
    Bed elevation sampled on a grid.

    Attributes:
        b_fn (BathymetryProfile): Analytic profile.
        cell_averages (CellField): Quadrature averages of b_fn per cell, ghosts included.
        quad_point_values (np.ndarray): b_fn at the rule nodes, shape (n_total, n_nodes).
            Nodes on a cell edge take the limit from inside the cell.
    """

    b_fn: BathymetryProfile
    cell_averages: CellField
    quad_point_values: np.ndarray


def sample_bathymetry(b_fn: BathymetryProfile, grid: Grid, rule: QuadratureRule) -> Bathymetry:
    x = grid.node_coordinates(rule)
    values = b_fn(x)
    if rule.nodes[0] == 0.0:
        values[:, 0] = b_fn.limit(x[:, 0], "right")
    if rule.nodes[-1] == 1.0:
        values[:, -1] = b_fn.limit(x[:, -1], "left")
    values.setflags(write=False)
    averages = values @ rule.weights
    averages.setflags(write=False)
    return Bathymetry(b_fn=b_fn, cell_averages=averages, quad_point_values=values)


@dataclass
class State:
    """Cell averages of depth and discharge on the full grid, ghosts included."""

    h_bar: CellField
    q_bar: CellField

    def copy(self) -> State:
        return State(h_bar=self.h_bar.copy(), q_bar=self.q_bar.copy())

    def eta(self, bathymetry: Bathymetry) -> CellField:
        return self.h_bar + bathymetry.cell_averages

    def interior(self, grid: Grid) -> np.ndarray:
        """Interior unknowns stacked as shape (2, n_cells)."""
        return np.stack([self.h_bar[grid.interior], self.q_bar[grid.interior]])

    @classmethod
    def from_interior(cls, grid: Grid, y: np.ndarray) -> State:
        h = np.zeros(grid.n_total)
        q = np.zeros(grid.n_total)
        h[grid.interior] = y[0]
        q[grid.interior] = y[1]
        return cls(h_bar=h, q_bar=q)

    def check_positivity(self, grid: Grid, time: float | None = None) -> None:
        h = self.h_bar[grid.interior]
        bad = np.flatnonzero(~(h > 0))
        if bad.size:
            cell = int(bad[0])
            raise PositivityError(where="cell average", cell=cell, value=float(h[cell]), time=time)


class BoundaryType(str, Enum):
    INFLOW_Q = "inflow_q"
    OUTFLOW_H = "outflow_h"
    INFLOW_HQ = "inflow_hq"
    EXTRAPOLATE = "extrapolate"
    LAKE = "lake"


@dataclass(frozen=True)
class BoundarySide:
    kind: BoundaryType
    h: float | None = None
    q: float | None = None
    eta: float | None = None


@dataclass(frozen=True)
class BoundaryConditions:
    left: BoundarySide
    right: BoundarySide


def _fill_side(
    side: BoundarySide,
    h: np.ndarray,
    q: np.ndarray,
    ghosts: slice,
    nearest: int,
    b_bar: np.ndarray,
) -> None:
    match side.kind:
        case BoundaryType.INFLOW_Q:
            h[ghosts] = h[nearest]
            q[ghosts] = side.q
        case BoundaryType.OUTFLOW_H:
            h[ghosts] = side.h
            q[ghosts] = q[nearest]
        case BoundaryType.INFLOW_HQ:
            h[ghosts] = side.h
            q[ghosts] = side.q
        case BoundaryType.EXTRAPOLATE:
            h[ghosts] = h[nearest]
            q[ghosts] = q[nearest]
        case BoundaryType.LAKE:
            h[ghosts] = side.eta - b_bar[ghosts]
            q[ghosts] = 0.0
        case _:
            raise ConfigError(f"unknown boundary type {side.kind!r}")


def apply_boundary(
    state: State, case_spec: CaseSpec, t: float, grid: Grid, bathymetry: Bathymetry
) -> State:
    """
    Fill the ghost halo of `state` according to the case's boundary conditions.

    Conditions are time independent, so `t` only documents the call site.
    Only ghost entries are written; interior values are left untouched, which
    makes the fill idempotent.
    """
    filled = replace(state, h_bar=state.h_bar.copy(), q_bar=state.q_bar.copy())
    n_g = grid.n_ghost
    if n_g == 0:
        return filled
    bc = case_spec.boundary
    _fill_side(bc.left, filled.h_bar, filled.q_bar, slice(0, n_g), n_g, bathymetry.cell_averages)
    last = n_g + grid.n_cells - 1
    _fill_side(
        bc.right,
        filled.h_bar,
        filled.q_bar,
        slice(last + 1, grid.n_total),
        last,
        bathymetry.cell_averages,
    )
    return filled
