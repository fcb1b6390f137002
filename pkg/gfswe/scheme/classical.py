"""
Classical WENO finite volume baseline: component-wise reconstruction of
(h, q), Rusanov flux, and the source integrated over each cell with
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import numpy as np

from gfswe.scheme.global_flux import check_depth, friction_integrand
from gfswe.scheme.grid_state import Bathymetry, Grid, PhysicalParams, State
from gfswe.scheme.numerical_flux import InterfaceFluxes, rusanov_flux
from gfswe.scheme.quadrature import gauss_legendre
from gfswe.scheme.weno import DEFAULT_EPSILON, reconstruct, stencil_windows, workspace_for
from gfswe.util.exceptions import ConfigError

SOURCE_NODES = 5


def _windows(field: np.ndarray, grid: Grid, order: int, first_cell: int, count: int) -> np.ndarray:
    r = (order + 1) // 2
    start = first_cell - (r - 1)
    if start < 0:
        raise ConfigError(f"order {order} needs {r} ghost cells, grid has {grid.n_ghost}")
    return stencil_windows(field, order)[start : start + count]


def edge_traces(
    state: State, grid: Grid, order: int, epsilon: float = DEFAULT_EPSILON
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(h^L, q^L, h^R, q^R) at the n_cells + 1 interfaces."""
    ws = workspace_for(order, (0.0, 1.0), epsilon)
    first, count = grid.n_ghost - 1, grid.n_cells + 2
    h_edges, _ = reconstruct(_windows(state.h_bar, grid, order, first, count), ws)
    q_edges, _ = reconstruct(_windows(state.q_bar, grid, order, first, count), ws)
    return h_edges[:-1, 1], q_edges[:-1, 1], h_edges[1:, 0], q_edges[1:, 0]


def classical_fluxes(
    state: State, grid: Grid, params: PhysicalParams, order: int, epsilon: float = DEFAULT_EPSILON
) -> tuple[InterfaceFluxes, np.ndarray]:
    """Rusanov fluxes and the mean interface depth h* used by step sources."""
    h_l, q_l, h_r, q_r = edge_traces(state, grid, order, epsilon)
    mass, momentum = rusanov_flux(h_l, q_l, h_r, q_r, params.g)
    return InterfaceFluxes(mass=mass, momentum=momentum), 0.5 * (h_l + h_r)


def classical_source(
    state: State,
    bathymetry: Bathymetry,
    grid: Grid,
    params: PhysicalParams,
    order: int,
    interface_depth: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    time: float | None = None,
) -> np.ndarray:
    """
    Cell averages of the source (0, -g h b' - g n² q|q|/h^{7/3}), shape (2, n_cells).

    A bed step contributes -g h* Δb / dx: split between both neighbours when
    it sits on an interface, otherwise given to the cell that contains it.
    """
    rule = gauss_legendre(SOURCE_NODES)
    ws = workspace_for(order, rule.nodes, epsilon)
    g = params.g
    h_nodes, _ = reconstruct(_windows(state.h_bar, grid, order, grid.n_ghost, grid.n_cells), ws)
    q_nodes, _ = reconstruct(_windows(state.q_bar, grid, order, grid.n_ghost, grid.n_cells), ws)
    check_depth(h_nodes, "quadrature node", time=time)

    x_nodes = grid.node_coordinates(rule)[grid.interior]
    integrand = -g * h_nodes * bathymetry.b_fn.derivative(x_nodes)
    if params.n_manning > 0:
        integrand = integrand - g * friction_integrand(h_nodes, q_nodes, params.n_manning)
    source = np.zeros((2, grid.n_cells))
    source[1] = integrand @ rule.weights

    for step in bathymetry.b_fn.steps:
        position = (step.x - grid.x_left) / grid.dx
        nearest = int(round(position))
        if np.isclose(position, nearest, atol=1e-12):
            if not 0 <= nearest <= grid.n_cells:
                continue
            kick = -0.5 * g * interface_depth[nearest] * step.height / grid.dx
            if nearest > 0:
                source[1, nearest - 1] += kick
            if nearest < grid.n_cells:
                source[1, nearest] += kick
        else:
            cell = int(np.floor(position))
            if 0 <= cell < grid.n_cells:
                h_bar = state.h_bar[grid.n_ghost + cell]
                source[1, cell] += -g * h_bar * step.height / grid.dx
    return source
