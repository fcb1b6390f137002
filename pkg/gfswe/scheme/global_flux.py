"""
Global flux G = (q, K) with K = q²/h + g h²/2 + R, R the primitive of minus the source.

The source primitive is reconstructed cell by cell on the quadrature nodes
through the integration tableau, starting from R = 0 at the left physical
boundary and crossing every interface with the jump of the bathymetry terms.
In well-balanced mode the bathymetry source is split so that a lake at rest
gives a K that is constant on every node of every cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from gfswe.scheme.grid_state import Bathymetry, Grid, PhysicalParams, State, required_halo
from gfswe.scheme.quadrature import QuadratureRule
from gfswe.scheme.weno import DEFAULT_EPSILON, reconstruct, stencil_windows, workspace_for
from gfswe.util.exceptions import ConfigError, PositivityError

FRICTION_EXPONENT = 7.0 / 3.0


class FluxMode(str, Enum):
    WELL_BALANCED = "wb"
    NON_WELL_BALANCED = "nonwb"


def physical_flux(h: np.ndarray, q: np.ndarray, g: float) -> tuple[np.ndarray, np.ndarray]:
    return q, q * q / h + 0.5 * g * h * h


def friction_integrand(h: np.ndarray, q: np.ndarray, n_manning: float) -> np.ndarray:
    """n² q|q| / h^{7/3}; multiplied by g at the call site."""
    return n_manning**2 * q * np.abs(q) / h**FRICTION_EXPONENT


def check_depth(h: np.ndarray, where: str, offset: int = 0, time: float | None = None) -> None:
    """
    Raise PositivityError for the first row of `h` holding a non-positive entry.

    Rows are cells; `offset` is the row of the first interior cell.
    """
    bad = ~(h > 0)
    if bad.any():
        row = int(np.flatnonzero(bad.reshape(h.shape[0], -1).any(axis=-1))[0])
        value = float(np.ravel(h[row])[np.flatnonzero(np.ravel(bad[row]))[0]])
        raise PositivityError(where=where, cell=row - offset, value=value, time=time)


def hyperbolic_flux_average(
    h_nodes: np.ndarray, q_nodes: np.ndarray, rule: QuadratureRule, params: PhysicalParams
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature of F(ũ) over each cell; node arrays have shape (..., n_nodes)."""
    check_depth(np.atleast_2d(h_nodes), "quadrature node")
    f1, f2 = physical_flux(h_nodes, q_nodes, params.g)
    return f1 @ rule.weights, f2 @ rule.weights


def interface_jump(eta_l, eta_r, b_l, b_r, g: float):
    """Jump of R across an interface along the segment path in (η, b)."""
    return g * 0.5 * (eta_r + eta_l) * (b_r - b_l) - g * 0.5 * (b_r * b_r - b_l * b_l)


@dataclass(frozen=True, eq=False)
class SourceIncrements:
    """R measured from the cell's left edge: at each node, and at the right edge."""

    nodes: np.ndarray
    right: np.ndarray


def _add_friction(
    increments: SourceIncrements,
    h_nodes: np.ndarray,
    q_nodes: np.ndarray,
    params: PhysicalParams,
    rule: QuadratureRule,
    dx: float,
) -> SourceIncrements:
    if params.n_manning == 0:
        return increments
    check_depth(np.atleast_2d(h_nodes), "quadrature node")
    friction = params.g * dx * friction_integrand(h_nodes, q_nodes, params.n_manning)
    return SourceIncrements(
        nodes=increments.nodes + friction @ rule.tableau.T,
        right=increments.right + friction @ rule.weights,
    )


def well_balanced_increments(
    eta_nodes: np.ndarray,
    b_nodes: np.ndarray,
    q_nodes: np.ndarray,
    h_nodes: np.ndarray,
    b_left: np.ndarray,
    b_right: np.ndarray,
    params: PhysicalParams,
    rule: QuadratureRule,
    dx: float,
) -> SourceIncrements:
    """
    Split-source increments: g ∫ η̃ ∂ₓb̃ - g (b̃² - b_left²)/2, plus friction.

    ∂ₓb̃ is the derivative of the nodal interpolant of b̃, so the 1/dx of the
    derivative cancels the dx of the integral.
    """
    g = params.g
    integrand = eta_nodes * (b_nodes @ rule.differentiation_matrix.T)
    increments = SourceIncrements(
        nodes=g * (integrand @ rule.tableau.T) - 0.5 * g * (b_nodes * b_nodes - (b_left * b_left)[..., None]),
        right=g * (integrand @ rule.weights) - 0.5 * g * (b_right * b_right - b_left * b_left),
    )
    return _add_friction(increments, h_nodes, q_nodes, params, rule, dx)


def nodal_increments(
    h_nodes: np.ndarray,
    b_prime_nodes: np.ndarray,
    q_nodes: np.ndarray,
    params: PhysicalParams,
    rule: QuadratureRule,
    dx: float,
) -> SourceIncrements:
    """Increments of g ∫ h̃ b'(x) with the analytic bed slope, plus friction."""
    integrand = params.g * dx * h_nodes * b_prime_nodes
    increments = SourceIncrements(nodes=integrand @ rule.tableau.T, right=integrand @ rule.weights)
    return _add_friction(increments, h_nodes, q_nodes, params, rule, dx)


@dataclass(frozen=True, eq=False)
class CellSourceIntegral:
    nodes: np.ndarray
    left: float
    right: float


def source_integral_reconstruct(
    eta_nodes: np.ndarray,
    b_nodes: np.ndarray,
    q_nodes: np.ndarray,
    h_nodes: np.ndarray,
    b_edge_traces: tuple[float, float],
    params: PhysicalParams,
    rule: QuadratureRule,
    prev_R: float,
    dx: float = 1.0,
) -> CellSourceIntegral:
    """
    R on the nodes of one cell, continuing from R at its left edge.

    Args:
        eta_nodes, b_nodes, q_nodes, h_nodes (np.ndarray): Reconstructed node values of the cell.
        b_edge_traces (tuple[float, float]): b̃ at the cell's left and right edges.
        params (PhysicalParams): Gravity and Manning coefficient.
        rule (QuadratureRule): Node set with its tableau.
        prev_R (float): R^R at the cell's left edge.
        dx (float): Cell width.
    """
    b_left, b_right = b_edge_traces
    increments = well_balanced_increments(
        np.asarray(eta_nodes, dtype=float)[None, :],
        np.asarray(b_nodes, dtype=float)[None, :],
        np.asarray(q_nodes, dtype=float)[None, :],
        np.asarray(h_nodes, dtype=float)[None, :],
        np.array([b_left], dtype=float),
        np.array([b_right], dtype=float),
        params,
        rule,
        dx,
    )
    return CellSourceIntegral(
        nodes=prev_R + increments.nodes[0],
        left=float(prev_R),
        right=float(prev_R + increments.right[0]),
    )


@dataclass(frozen=True, eq=False)
class SourceIntegralField:
    """
    R over a contiguous block of cells.

    Attributes:
        nodes (np.ndarray): R at the quadrature nodes, shape (n, n_nodes).
        left (np.ndarray): R^R at each cell's left edge.
        right (np.ndarray): R^L at each cell's right edge.
        jumps (np.ndarray): Jump between cell m and m + 1, shape (n - 1,).
        seed (int): Row whose left edge is the left physical boundary, where R = 0.
    """

    nodes: np.ndarray
    left: np.ndarray
    right: np.ndarray
    jumps: np.ndarray
    seed: int

    def averages(self, rule: QuadratureRule) -> np.ndarray:
        return self.nodes @ rule.weights


def sweep_source_integral(increments: SourceIncrements, jumps: np.ndarray, seed: int) -> SourceIntegralField:
    """
    Accumulate R left to right from R = 0 at the left edge of row `seed`.

    Rows left of the seed are filled by running the same recurrence backwards.
    Accumulation is a sequential cumulative sum, so every interface satisfies
    right[m] + jumps[m] == left[m + 1] bitwise.
    """
    n = increments.right.shape[0]
    if not 0 <= seed < n or jumps.shape[0] != n - 1:
        raise ConfigError(f"inconsistent sweep: {n} cells, {jumps.shape[0]} jumps, seed {seed}")
    left = np.empty(n)
    right = np.empty(n)

    forward = np.empty(2 * (n - seed) - 1)
    forward[0::2] = increments.right[seed:]
    forward[1::2] = jumps[seed:]
    acc = np.cumsum(forward)
    left[seed] = 0.0
    right[seed:] = acc[0::2]
    left[seed + 1 :] = acc[1::2]

    if seed > 0:
        backward = np.empty(2 * seed)
        backward[0::2] = -jumps[:seed][::-1]
        backward[1::2] = -increments.right[:seed][::-1]
        acc = np.cumsum(backward)
        right[:seed] = acc[0::2][::-1]
        left[:seed] = acc[1::2][::-1]

    return SourceIntegralField(
        nodes=left[:, None] + increments.nodes,
        left=left,
        right=right,
        jumps=jumps,
        seed=seed,
    )


@dataclass(frozen=True, eq=False)
class GlobalFluxField:
    """
    Reconstructions, source primitive and global-flux averages for one stage.

    Rows of the per-cell arrays are the reconstructed cells `first_cell`,
    `first_cell + 1`, ... of the full grid. Interface arrays have
    n_cells + 1 entries, interface k sitting at x_left + k dx.
    """

    first_cell: int
    h_nodes: np.ndarray
    q_nodes: np.ndarray
    eta_nodes: np.ndarray
    b_nodes: np.ndarray
    source: SourceIntegralField
    k_nodes: np.ndarray
    q_avg: np.ndarray
    k_avg: np.ndarray
    q_left: np.ndarray
    q_right: np.ndarray
    k_left: np.ndarray
    k_right: np.ndarray
    r_left: np.ndarray
    r_right: np.ndarray
    eta_left: np.ndarray
    eta_right: np.ndarray
    b_left: np.ndarray
    b_right: np.ndarray

    def interior_rows(self, grid: Grid) -> slice:
        start = grid.n_ghost - self.first_cell
        return slice(start, start + grid.n_cells)


def _interior_step_increments(
    bathymetry: Bathymetry,
    grid: Grid,
    rule: QuadratureRule,
    h_bar: np.ndarray,
    first_cell: int,
    n_rows: int,
    g: float,
) -> SourceIncrements:
    """Dirac source of steps strictly inside a cell, g h̄ Δb added right of the step."""
    nodes = np.zeros((n_rows, rule.n_nodes))
    right = np.zeros(n_rows)
    edges = grid.left_edges()
    for step in bathymetry.b_fn.steps:
        position = (step.x - grid.x_left) / grid.dx
        index = int(np.floor(position))
        fraction = position - index
        if np.isclose(fraction, 0.0, atol=1e-12) or np.isclose(fraction, 1.0, atol=1e-12):
            continue
        cell = index + grid.n_ghost
        row = cell - first_cell
        if not 0 <= row < n_rows:
            continue
        local = (step.x - edges[cell]) / grid.dx
        amount = g * h_bar[cell] * step.height
        nodes[row, rule.nodes > local] += amount
        right[row] += amount
    return SourceIncrements(nodes=nodes, right=right)


def assemble_global_flux_averages(
    state: State,
    bathymetry: Bathymetry,
    params: PhysicalParams,
    rule: QuadratureRule,
    mode: FluxMode,
    grid: Grid,
    order: int,
    epsilon: float = DEFAULT_EPSILON,
    time: float | None = None,
) -> GlobalFluxField:
    """
    Reconstruct, sweep R and build Ḡ plus its interface traces.

    `state` must have its ghost cells filled. Reconstruction covers every cell
    with a full stencil; Ḡ is then reconstructed at the edges of the cells on
    both sides of every physical interface.
    """
    if grid.n_ghost < required_halo(order):
        raise ConfigError(f"order {order} needs {required_halo(order)} ghost cells, grid has {grid.n_ghost}")
    if not rule.includes_edges:
        raise ConfigError("the global flux needs a node set containing both cell edges")

    r = (order + 1) // 2
    first = r - 1
    g = params.g
    nodes_ws = workspace_for(order, rule.nodes, epsilon)

    if mode is FluxMode.WELL_BALANCED:
        eta_nodes, eta_weights = reconstruct(stencil_windows(state.eta(bathymetry), order), nodes_ws)
        b_nodes, _ = reconstruct(stencil_windows(bathymetry.cell_averages, order), nodes_ws, eta_weights)
        h_nodes = eta_nodes - b_nodes
    elif mode is FluxMode.NON_WELL_BALANCED:
        h_nodes, _ = reconstruct(stencil_windows(state.h_bar, order), nodes_ws)
        b_nodes = np.asarray(bathymetry.quad_point_values[first : first + h_nodes.shape[0]])
        eta_nodes = h_nodes + b_nodes
    else:
        raise ConfigError(f"unknown flux mode {mode!r}")
    q_nodes, _ = reconstruct(stencil_windows(state.q_bar, order), nodes_ws)

    offset = grid.n_ghost - first
    check_depth(h_nodes, "quadrature node", offset=offset, time=time)

    if mode is FluxMode.WELL_BALANCED:
        increments = well_balanced_increments(
            eta_nodes, b_nodes, q_nodes, h_nodes, b_nodes[:, 0], b_nodes[:, -1], params, rule, grid.dx
        )
    else:
        n_rows = h_nodes.shape[0]
        x_nodes = grid.node_coordinates(rule)[first : first + n_rows]
        increments = nodal_increments(
            h_nodes, bathymetry.b_fn.derivative(x_nodes), q_nodes, params, rule, grid.dx
        )
        steps = _interior_step_increments(bathymetry, grid, rule, state.h_bar, first, n_rows, g)
        increments = SourceIncrements(nodes=increments.nodes + steps.nodes, right=increments.right + steps.right)

    jumps = interface_jump(eta_nodes[:-1, -1], eta_nodes[1:, 0], b_nodes[:-1, -1], b_nodes[1:, 0], g)
    source = sweep_source_integral(increments, jumps, seed=offset)

    _, f2 = physical_flux(h_nodes, q_nodes, g)
    k_nodes = f2 + source.nodes
    q_avg = q_nodes @ rule.weights
    k_avg = k_nodes @ rule.weights

    edge_ws = workspace_for(order, (0.0, 1.0), epsilon)
    start = grid.n_ghost - 1 - first - (r - 1)
    count = grid.n_cells + 2
    q_edges, _ = reconstruct(stencil_windows(q_avg, order)[start : start + count], edge_ws)
    k_edges, _ = reconstruct(stencil_windows(k_avg, order)[start : start + count], edge_ws)

    left_rows = slice(offset - 1, offset + grid.n_cells)
    right_rows = slice(offset, offset + grid.n_cells + 1)
    return GlobalFluxField(
        first_cell=first,
        h_nodes=h_nodes,
        q_nodes=q_nodes,
        eta_nodes=eta_nodes,
        b_nodes=b_nodes,
        source=source,
        k_nodes=k_nodes,
        q_avg=q_avg,
        k_avg=k_avg,
        q_left=q_edges[:-1, 1],
        q_right=q_edges[1:, 0],
        k_left=k_edges[:-1, 1],
        k_right=k_edges[1:, 0],
        r_left=source.right[left_rows],
        r_right=source.left[right_rows],
        eta_left=eta_nodes[left_rows, -1],
        eta_right=eta_nodes[right_rows, 0],
        b_left=b_nodes[left_rows, -1],
        b_right=b_nodes[right_rows, 0],
    )
