"""
Explicit Deferred Correction (DeC) time integration.

One step of size dt places M + 1 sub-time nodes in [t, t + dt], starts every
stage from y_n and performs K corrections

    y^{m,(k)} = y_n + dt Σ_r θ[m, r] f(y^{r,(k-1)}),

which is what remains of L¹(y^(k)) = L¹(y^(k-1)) - L²(y^(k-1)) once the
explicit Euler terms cancel. The result is the last stage of the last
correction, accurate to order min(K, M + 1) on equispaced nodes and
min(K, 2M) on Gauss-Lobatto nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from gfswe.scheme.grid_state import Grid, PhysicalParams, State
from gfswe.scheme.quadrature import equispaced, gauss_lobatto
from gfswe.util.exceptions import ConfigError, SolverError

DEFAULT_CFL = 0.4

Rhs = Callable[[np.ndarray], np.ndarray]


class DecNodes(str, Enum):
    EQUISPACED = "equispaced"
    LOBATTO = "lobatto"


@dataclass(frozen=True, eq=False)
class DecScheme:
    """
    Attributes:
        n_subintervals (int): M.
        nodes (DecNodes): Sub-time node family.
        theta (np.ndarray): θ[m, r], integral of the r-th sub-node Lagrange basis over [0, β^m].
        beta (np.ndarray): β^m, sub-time nodes as fractions of dt.
        iterations (int): Number of corrections K.
    """

    n_subintervals: int
    nodes: DecNodes
    theta: np.ndarray
    beta: np.ndarray
    iterations: int

    @property
    def collocation_order(self) -> int:
        if self.nodes is DecNodes.LOBATTO:
            return 2 * self.n_subintervals
        return self.n_subintervals + 1

    @property
    def order(self) -> int:
        return min(self.iterations, self.collocation_order)

    @property
    def rhs_evaluations(self) -> int:
        return 1 + (self.iterations - 1) * self.n_subintervals


def theta_coefficients(n_subintervals: int, node_type: DecNodes) -> tuple[np.ndarray, np.ndarray]:
    if n_subintervals < 1:
        raise ConfigError(f"DeC needs at least one sub-interval, got {n_subintervals}")
    match DecNodes(node_type):
        case DecNodes.EQUISPACED:
            rule = equispaced(n_subintervals)
        case DecNodes.LOBATTO:
            rule = gauss_lobatto(n_subintervals + 1)
    return rule.tableau, rule.nodes


def build_dec(n_subintervals: int, node_type: DecNodes, iterations: int) -> DecScheme:
    if iterations < 1:
        raise ConfigError(f"DeC needs at least one correction, got {iterations}")
    theta, beta = theta_coefficients(n_subintervals, node_type)
    return DecScheme(
        n_subintervals=n_subintervals,
        nodes=DecNodes(node_type),
        theta=theta,
        beta=beta,
        iterations=iterations,
    )


def default_dec(order: int, node_type: DecNodes = DecNodes.EQUISPACED) -> DecScheme:
    """K = order corrections on the fewest sub-nodes that reach that order."""
    if order < 1:
        raise ConfigError(f"order must be positive, got {order}")
    if DecNodes(node_type) is DecNodes.LOBATTO:
        subintervals = max(1, math.ceil(order / 2))
    else:
        subintervals = max(1, order - 1)
    return build_dec(subintervals, node_type, order)


def dec_step(
    y_n: np.ndarray,
    rhs: Rhs,
    dt: float,
    scheme: DecScheme,
    f_n: np.ndarray | None = None,
) -> np.ndarray:
    """
    Advance y_n by one DeC step.

    Args:
        y_n (np.ndarray): Current solution.
        rhs (Rhs): Right-hand side f(y).
        dt (float): Step size.
        scheme (DecScheme): Sub-nodes, θ and number of corrections.
        f_n (np.ndarray | None): f(y_n) if the caller already has it.

    Returns:
        np.ndarray: y_{n+1}. If f(y_n) is zero, this is y_n bitwise.
    """
    f0 = rhs(y_n) if f_n is None else f_n
    m = scheme.n_subintervals
    slopes = np.stack([f0] * (m + 1))
    stages = None
    for k in range(scheme.iterations):
        stages = y_n + dt * np.tensordot(scheme.theta[1:], slopes, axes=1)
        if k < scheme.iterations - 1:
            slopes = np.concatenate([f0[None, ...], np.stack([rhs(s) for s in stages])])
    return stages[-1]


def cfl_timestep(state: State, grid: Grid, params: PhysicalParams, cfl: float = DEFAULT_CFL) -> float:
    """dt = cfl dx / max(|u| + √(g h)) over the interior cells."""
    if not 0 < cfl <= 1:
        raise ConfigError(f"CFL number must be in (0, 1], got {cfl}")
    state.check_positivity(grid)
    h = state.h_bar[grid.interior]
    q = state.q_bar[grid.interior]
    speed = float(np.max(np.abs(q / h) + np.sqrt(params.g * h)))
    if not np.isfinite(speed) or speed <= 0:
        raise SolverError(f"cannot derive a time step from wave speed {speed}")
    return cfl * grid.dx / speed


def clamp_timestep(t: float, dt: float, t_end: float) -> float:
    """Shorten `dt` so the step ends exactly at `t_end`."""
    if t + dt > t_end:
        return t_end - t
    return dt


def estimate_order(errors: Sequence[float], resolutions: Sequence[float]) -> list[float | None]:
    """
    Observed order between consecutive entries, log(e_c / e_f) / log(n_f / n_c).

    `resolutions` grow with refinement (cell counts, or 1/dt). Entry 0 and
    pairs with equal resolution or a zero error get None.
    """
    if len(errors) != len(resolutions):
        raise ConfigError(f"{len(errors)} errors for {len(resolutions)} resolutions")
    orders: list[float | None] = [None]
    for (e_c, n_c), (e_f, n_f) in zip(zip(errors, resolutions), zip(errors[1:], resolutions[1:])):
        if n_c == n_f or e_c <= 0 or e_f <= 0:
            orders.append(None)
        else:
            orders.append(math.log(e_c / e_f) / math.log(n_f / n_c))
    return orders


def solve_ode(rhs: Rhs, y0: np.ndarray, t_end: float, dt: float, scheme: DecScheme) -> np.ndarray:
    """Integrate a small ODE system with fixed steps, the last one clamped to t_end."""
    y = np.asarray(y0, dtype=float)
    t = 0.0
    while t_end - t > 1e-14 * max(1.0, t_end):
        step = clamp_timestep(t, dt, t_end)
        y = dec_step(y, rhs, step, scheme)
        t += step
    return y
