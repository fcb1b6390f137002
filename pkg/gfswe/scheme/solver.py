from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from gfswe.scheme.cases import CaseSpec
from gfswe.scheme.classical import classical_fluxes, classical_source
from gfswe.scheme.dec_time import DEFAULT_CFL, DecScheme, cfl_timestep, clamp_timestep, dec_step
from gfswe.scheme.global_flux import FluxMode, GlobalFluxField, assemble_global_flux_averages
from gfswe.scheme.grid_state import (
    Bathymetry,
    Grid,
    State,
    apply_boundary,
    build_grid,
    required_halo,
    sample_bathymetry,
)
from gfswe.scheme.numerical_flux import global_flux_interfaces, residual
from gfswe.scheme.quadrature import QuadratureRule, gauss_lobatto
from gfswe.scheme.weno import DEFAULT_EPSILON, SUPPORTED_ORDERS
from gfswe.util.exceptions import ConfigError, NonFiniteError
from gfswe.util.log import LOG

DEFAULT_STEADY_TOL = 1e-13
PROGRESS_EVERY = 500


class Scheme(str, Enum):
    GF_WB = "gf_wb"
    GF_NONWB = "gf_nonwb"
    CLASSICAL = "classical"

    @property
    def flux_mode(self) -> FluxMode | None:
        match self:
            case Scheme.GF_WB:
                return FluxMode.WELL_BALANCED
            case Scheme.GF_NONWB:
                return FluxMode.NON_WELL_BALANCED
        return None

    @property
    def global_flux(self) -> bool:
        return self is not Scheme.CLASSICAL


@dataclass
class SpatialOperator:
    """
    Semi-discrete right-hand side f(y) for the interior unknowns y of shape (2, n_cells).

    Ghost cells are refilled from the case's boundary conditions on every call.
    `time` is only used to label errors.
    """

    case: CaseSpec
    scheme: Scheme
    order: int
    grid: Grid
    rule: QuadratureRule
    bathymetry: Bathymetry
    epsilon: float = DEFAULT_EPSILON
    time: float | None = None

    @property
    def params(self):
        return self.case.params

    def fill(self, y: np.ndarray) -> State:
        return apply_boundary(State.from_interior(self.grid, y), self.case, self.time, self.grid, self.bathymetry)

    def fields(self, state: State) -> GlobalFluxField:
        if not self.scheme.global_flux:
            raise ConfigError(f"scheme {self.scheme.value} has no global flux")
        return assemble_global_flux_averages(
            state,
            self.bathymetry,
            self.params,
            self.rule,
            self.scheme.flux_mode,
            self.grid,
            self.order,
            self.epsilon,
            time=self.time,
        )

    def __call__(self, y: np.ndarray) -> np.ndarray:
        state = self.fill(y)
        if self.scheme.global_flux:
            return residual(self.grid, global_flux_interfaces(self.fields(state), self.params))
        fluxes, interface_depth = classical_fluxes(state, self.grid, self.params, self.order, self.epsilon)
        source = classical_source(
            state, self.bathymetry, self.grid, self.params, self.order, interface_depth, self.epsilon, self.time
        )
        return residual(self.grid, fluxes, source)

    def k_averages(self, y: np.ndarray) -> np.ndarray | None:
        """K̄ of the interior cells, None for the classical scheme."""
        if not self.scheme.global_flux:
            return None
        field = self.fields(self.fill(y))
        return field.k_avg[field.interior_rows(self.grid)]

    def residual_norm(self, rhs: np.ndarray) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(rhs * rhs)))


def build_operator(
    case: CaseSpec,
    scheme: Scheme,
    order: int,
    n_cells: int,
    quadrature_nodes: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> SpatialOperator:
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(f"order must be one of {SUPPORTED_ORDERS}, got {order}")
    grid = build_grid(case.x_left, case.x_right, n_cells, required_halo(order))
    rule = gauss_lobatto(quadrature_nodes or (order + 1) // 2 + 1)
    return SpatialOperator(
        case=case,
        scheme=Scheme(scheme),
        order=order,
        grid=grid,
        rule=rule,
        bathymetry=sample_bathymetry(case.bathymetry, grid, rule),
        epsilon=epsilon,
    )


@dataclass
class IntegrationResult:
    y: np.ndarray
    time: float
    steps: int
    steady_reached: bool
    residual_norm: float | None
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)


def _reached(t: float, target: float) -> bool:
    return abs(t - target) <= 1e-12 * max(1.0, abs(target))


def check_finite(y: np.ndarray, time: float) -> None:
    bad = ~np.isfinite(y)
    if bad.any():
        raise NonFiniteError(cell=int(np.flatnonzero(bad.any(axis=0))[0]), time=time)


def integrate(
    operator: SpatialOperator,
    y0: np.ndarray,
    t_end: float,
    dec: DecScheme,
    cfl: float = DEFAULT_CFL,
    snapshot_times: tuple[float, ...] = (),
    steady: bool = False,
    steady_tol: float = DEFAULT_STEADY_TOL,
    max_steps: int | None = None,
) -> IntegrationResult:
    """
    Advance y0 to t_end with DeC steps under a CFL restriction.

    Steps are shortened to land exactly on every snapshot time and on t_end.
    With `steady` set the run stops as soon as the L² norm of dU/dt drops
    below `steady_tol`; snapshot times not reached yet then get the
    stationary state.

    Raises:
        PositivityError: A depth became non-positive.
        NonFiniteError: NaN or inf appeared in the solution.
    """
    y = np.array(y0, dtype=float)
    t = 0.0
    steps = 0
    pending = sorted(s for s in snapshot_times if 0.0 <= s <= t_end)
    snapshots: dict[float, np.ndarray] = {}
    while pending and _reached(t, pending[0]):
        snapshots[pending.pop(0)] = y.copy()

    grid, params = operator.grid, operator.params
    steady_reached = False
    norm = None
    while not _reached(t, t_end) and t < t_end:
        if max_steps is not None and steps >= max_steps:
            LOG.warning("stopping after %d steps at t=%.6g", steps, t)
            break
        operator.time = t
        dt = cfl_timestep(operator.fill(y), grid, params, cfl)
        if pending:
            dt = clamp_timestep(t, dt, pending[0])
        dt = clamp_timestep(t, dt, t_end)

        f_n = operator(y)
        check_finite(f_n, t)
        norm = operator.residual_norm(f_n)
        if steady and norm < steady_tol:
            LOG.info("steady state reached at t=%.6g after %d steps (|dU/dt| = %.3e)", t, steps, norm)
            steady_reached = True
            break

        y = dec_step(y, operator, dt, dec, f_n)
        t += dt
        steps += 1
        check_finite(y, t)
        if steps % PROGRESS_EVERY == 0:
            LOG.debug("step %d: t=%.6g dt=%.3e |dU/dt|=%.3e", steps, t, dt, norm)

        while pending and (_reached(t, pending[0]) or t > pending[0]):
            snapshots[pending.pop(0)] = y.copy()
        if _reached(t, t_end):
            t = t_end

    if pending and steady_reached:
        LOG.info("stationary at t=%.6g, using it for the snapshots at %s", t, pending)
        snapshots.update((s, y.copy()) for s in pending)
    elif pending:
        LOG.warning("stopped at t=%.6g, skipping the snapshots at %s", t, pending)
    operator.time = t
    return IntegrationResult(
        y=y,
        time=t,
        steps=steps,
        steady_reached=steady_reached,
        residual_norm=norm,
        snapshots=snapshots,
    )
