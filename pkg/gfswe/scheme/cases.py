"""
Benchmark catalog, reference solutions and error measures.

Every case lives on [0, 25]. Cases with a smooth frictionless steady state
carry an oracle built from the conserved discharge and Bernoulli head; the
lake at rest is its own oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from gfswe.scheme.dec_time import estimate_order
from gfswe.scheme.grid_state import (
    Bathymetry,
    BathymetryProfile,
    BoundaryConditions,
    BoundarySide,
    BoundaryType,
    Grid,
    PhysicalParams,
    PiecewiseConstantProfile,
    SmoothProfile,
    State,
)
from gfswe.scheme.quadrature import QuadratureRule, gauss_legendre
from gfswe.util.exceptions import ConfigError, OracleError

DOMAIN = (0.0, 25.0)
BUMP_CENTER = 12.5
PERTURBATION_CENTER = 9.5
INITIAL_QUADRATURE_NODES = 5


class Oracle(str, Enum):
    EXACT = "exact"
    STEADY_INVARIANT = "steady_invariant"
    NONE = "none"


class FlowRegime(str, Enum):
    LAKE = "lake"
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    TRANSCRITICAL = "transcritical"


def damped_sine(x: np.ndarray, amplitude: float) -> np.ndarray:
    s = x - BUMP_CENTER
    return amplitude * np.sin(s) * np.exp(1.0 - s * s)


def damped_sine_prime(x: np.ndarray, amplitude: float) -> np.ndarray:
    s = x - BUMP_CENTER
    return amplitude * np.exp(1.0 - s * s) * (np.cos(s) - 2.0 * s * np.sin(s))


def compact_bump(x: np.ndarray, height: float = 0.2, center: float = 10.0, radius: float = 5.0) -> np.ndarray:
    z = ((x - center) / radius) ** 2
    inside = z < 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        value = height * np.exp(1.0 - 1.0 / (1.0 - z))
    return np.where(inside, value, 0.0)


def compact_bump_prime(x: np.ndarray, height: float = 0.2, center: float = 10.0, radius: float = 5.0) -> np.ndarray:
    d = x - center
    z = (d / radius) ** 2
    inside = z < 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        slope = -compact_bump(x, height, center, radius) * (2.0 * d / radius**2) / (1.0 - z) ** 2
    return np.where(inside, slope, 0.0)


def perturbation(x: np.ndarray) -> np.ndarray:
    """ψ(x) = exp(1 - 1/(1 - r)²), r = 4 (x - 9.5)², and zero where r ≥ 1."""
    x = np.asarray(x, dtype=float)
    r = 4.0 * (x - PERTURBATION_CENTER) ** 2
    inside = r < 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        value = np.exp(1.0 - 1.0 / (1.0 - r) ** 2)
    return np.where(inside, value, 0.0)


def _flat(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


SMOOTH_BUMP = SmoothProfile(
    fn=partial(damped_sine, amplitude=0.05), fn_prime=partial(damped_sine_prime, amplitude=0.05)
)
TALL_BUMP = SmoothProfile(fn=partial(damped_sine, amplitude=0.5), fn_prime=partial(damped_sine_prime, amplitude=0.5))
TRANSCRITICAL_BUMP = SmoothProfile(fn=compact_bump, fn_prime=compact_bump_prime)
STEP = PiecewiseConstantProfile(base=0.0, intervals=((8.0, 12.0),), levels=(0.2,))
FLAT = SmoothProfile(fn=_flat, fn_prime=_flat)

SUBCRITICAL_BC = BoundaryConditions(
    left=BoundarySide(BoundaryType.INFLOW_Q, q=4.42),
    right=BoundarySide(BoundaryType.OUTFLOW_H, h=2.0),
)
SUPERCRITICAL_BC = BoundaryConditions(
    left=BoundarySide(BoundaryType.INFLOW_HQ, h=2.0, q=24.0),
    right=BoundarySide(BoundaryType.EXTRAPOLATE),
)
TRANSCRITICAL_BC = BoundaryConditions(
    left=BoundarySide(BoundaryType.INFLOW_Q, q=0.18),
    right=BoundarySide(BoundaryType.OUTFLOW_H, h=0.33),
)


def lake_bc(eta0: float) -> BoundaryConditions:
    side = BoundarySide(BoundaryType.LAKE, eta=eta0)
    return BoundaryConditions(left=side, right=side)


@dataclass(frozen=True)
class CaseSpec:
    """
    One benchmark.

    The initial depth is `initial_level - b(x)`, or the exact steady state when
    `start_from_steady` is set, plus `alpha * ψ(x)`; the initial discharge is
    `initial_discharge`, or q₀ when starting from the steady state.

    Attributes:
        q0, boundary_depth: Conserved discharge and the flat-bottom boundary depth
            fixing the steady invariants; None when the case has no moving equilibrium.
        equilibrium (str | None): Where h_eq for the `pert` column comes from:
            "exact" for the lake at rest, otherwise the name of the unperturbed case.
        steady (bool): Stop early once the solution is stationary.
    """

    name: str
    description: str
    bathymetry: BathymetryProfile
    boundary: BoundaryConditions
    params: PhysicalParams
    t_end: float
    oracle: Oracle
    regime: FlowRegime
    initial_level: float = 0.0
    initial_discharge: float = 0.0
    start_from_steady: bool = False
    alpha: float = 0.0
    q0: float | None = None
    boundary_depth: float | None = None
    equilibrium: str | None = None
    steady: bool = False
    snapshot_times: tuple[float, ...] = ()
    x_left: float = DOMAIN[0]
    x_right: float = DOMAIN[1]

    @property
    def g(self) -> float:
        return self.params.g

    @property
    def k0(self) -> float | None:
        """K forced by the boundary data on the flat bottom at the boundary, R = 0 there."""
        if self.q0 is None or self.boundary_depth is None:
            return None
        h = self.boundary_depth
        return self.q0 * self.q0 / h + 0.5 * self.g * h * h

    @property
    def upsilon0(self) -> float | None:
        if self.q0 is None or self.boundary_depth is None:
            return None
        h = self.boundary_depth
        x_bc = self.x_right if self.regime is FlowRegime.SUBCRITICAL else self.x_left
        b_bc = float(self.bathymetry(np.array([x_bc]))[0])
        return self.q0 * self.q0 / (2.0 * h * h) + self.g * (h + b_bc)


def _catalog() -> dict[str, CaseSpec]:
    g_steady = PhysicalParams(g=9.812)
    g_friction = PhysicalParams(g=9.812, n_manning=0.05)
    sub = dict(
        boundary=SUBCRITICAL_BC,
        regime=FlowRegime.SUBCRITICAL,
        initial_level=2.0,
        q0=4.42,
        boundary_depth=2.0,
        steady=True,
    )
    sup = dict(
        boundary=SUPERCRITICAL_BC,
        regime=FlowRegime.SUPERCRITICAL,
        initial_level=2.0,
        q0=24.0,
        boundary_depth=2.0,
        steady=True,
    )
    cases = [
        CaseSpec(
            name="lake_at_rest",
            description="lake at rest over a smooth damped sine bump",
            bathymetry=SMOOTH_BUMP,
            boundary=lake_bc(1.0),
            params=PhysicalParams(g=1.0),
            t_end=1.0,
            oracle=Oracle.EXACT,
            regime=FlowRegime.LAKE,
            initial_level=1.0,
        ),
        CaseSpec(
            name="lar_perturbed",
            description="small bump of water on a lake at rest over a tall bump",
            bathymetry=TALL_BUMP,
            boundary=lake_bc(1.0),
            params=PhysicalParams(g=9.8),
            t_end=1.5,
            oracle=Oracle.NONE,
            regime=FlowRegime.LAKE,
            initial_level=1.0,
            alpha=1e-4,
            equilibrium="exact",
            snapshot_times=(0.0, 0.5, 1.0, 1.5),
        ),
        CaseSpec(
            name="supercritical",
            description="supercritical moving equilibrium over the smooth bump",
            bathymetry=SMOOTH_BUMP,
            params=g_steady,
            t_end=50.0,
            oracle=Oracle.STEADY_INVARIANT,
            **sup,
        ),
        CaseSpec(
            name="subcritical",
            description="subcritical moving equilibrium over the smooth bump",
            bathymetry=SMOOTH_BUMP,
            params=g_steady,
            t_end=200.0,
            oracle=Oracle.STEADY_INVARIANT,
            **sub,
        ),
        CaseSpec(
            name="transcritical",
            description="transcritical flow with a shock over a compact bump",
            bathymetry=TRANSCRITICAL_BUMP,
            boundary=TRANSCRITICAL_BC,
            params=g_steady,
            t_end=200.0,
            oracle=Oracle.NONE,
            regime=FlowRegime.TRANSCRITICAL,
            initial_level=0.33,
            q0=0.18,
            steady=True,
        ),
        CaseSpec(
            name="sub_perturbed",
            description="subcritical equilibrium with a small bump of water",
            bathymetry=SMOOTH_BUMP,
            params=g_steady,
            t_end=2.0,
            oracle=Oracle.NONE,
            start_from_steady=True,
            alpha=1e-3,
            equilibrium="subcritical",
            snapshot_times=(0.0, 0.66, 1.33, 2.0),
            **{**sub, "steady": False},
        ),
        CaseSpec(
            name="super_perturbed",
            description="supercritical equilibrium with a small bump of water",
            bathymetry=SMOOTH_BUMP,
            params=g_steady,
            t_end=1.0,
            oracle=Oracle.NONE,
            start_from_steady=True,
            alpha=1e-4,
            equilibrium="supercritical",
            snapshot_times=(0.0, 0.33, 0.66, 1.0),
            **{**sup, "steady": False},
        ),
        CaseSpec(
            name="step_subcritical",
            description="subcritical flow over a bed step on (8, 12)",
            bathymetry=STEP,
            params=g_steady,
            t_end=500.0,
            oracle=Oracle.NONE,
            **{**sub, "boundary_depth": None},
        ),
        CaseSpec(
            name="step_supercritical",
            description="supercritical flow over a bed step on (8, 12)",
            bathymetry=STEP,
            params=g_steady,
            t_end=50.0,
            oracle=Oracle.NONE,
            **sup,
        ),
        CaseSpec(
            name="friction_subcritical",
            description="subcritical flow over the smooth bump with Manning friction",
            bathymetry=SMOOTH_BUMP,
            params=g_friction,
            t_end=200.0,
            oracle=Oracle.NONE,
            **{**sub, "boundary_depth": None},
        ),
        CaseSpec(
            name="friction_supercritical",
            description="supercritical flow over the smooth bump with Manning friction",
            bathymetry=SMOOTH_BUMP,
            params=g_friction,
            t_end=50.0,
            oracle=Oracle.NONE,
            **sup,
        ),
        CaseSpec(
            name="uniform_flow",
            description="uniform subcritical flow on a flat bed",
            bathymetry=FLAT,
            boundary=SUBCRITICAL_BC,
            params=g_steady,
            t_end=1.0,
            oracle=Oracle.STEADY_INVARIANT,
            regime=FlowRegime.SUBCRITICAL,
            initial_level=2.0,
            initial_discharge=4.42,
            q0=4.42,
            boundary_depth=2.0,
        ),
    ]
    return {case.name: case for case in cases}


_CATALOG = _catalog()


def catalog() -> list[CaseSpec]:
    return list(_CATALOG.values())


def get_case(name: str) -> CaseSpec:
    try:
        return _CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown case {name!r}, expected one of {sorted(_CATALOG)}") from None


def _steady_depth(b: float, q0: float, upsilon0: float, g: float, regime: FlowRegime) -> float:
    def cubic(h: float) -> float:
        return g * h**3 + (g * b - upsilon0) * h * h + 0.5 * q0 * q0

    h_crit = (q0 * q0 / g) ** (1.0 / 3.0)
    if not cubic(h_crit) < 0:
        raise OracleError(f"no smooth {regime.value} depth over b = {b:.6g}")
    if regime is FlowRegime.SUBCRITICAL:
        upper = max((upsilon0 - g * b) / g, h_crit) + 1.0
        return brentq(cubic, h_crit, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return brentq(cubic, 0.0, h_crit, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def steady_reference(case: CaseSpec, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact smooth frictionless steady state (h, q) at the points `x`.

    h solves g h³ + (g b(x) - Υ₀) h² + q₀²/2 = 0 on the branch of the flow regime.

    Raises:
        OracleError: If the case has no such steady state or no root exists.
    """
    smooth_regimes = (FlowRegime.SUBCRITICAL, FlowRegime.SUPERCRITICAL)
    if case.oracle is not Oracle.STEADY_INVARIANT or case.regime not in smooth_regimes:
        raise OracleError(f"case {case.name!r} has no smooth steady reference")
    if case.params.n_manning > 0:
        raise OracleError(f"case {case.name!r} has friction")
    x = np.asarray(x, dtype=float)
    b = case.bathymetry(x)
    upsilon0 = case.upsilon0
    h = np.array([_steady_depth(float(bb), case.q0, upsilon0, case.g, case.regime) for bb in np.ravel(b)])
    return h.reshape(x.shape), np.full(x.shape, case.q0)


def _cell_average(fn: Callable[[np.ndarray], np.ndarray], grid: Grid, rule: QuadratureRule) -> np.ndarray:
    return fn(grid.node_coordinates(rule)) @ rule.weights


def initial_state(case: CaseSpec, grid: Grid, bathymetry: Bathymetry) -> State:
    """Cell averages of the initial data on every cell, ghosts included."""
    smooth = gauss_legendre(INITIAL_QUADRATURE_NODES)
    if case.start_from_steady:
        h = _cell_average(lambda x: steady_reference(case, x)[0], grid, smooth)
        q = np.full(grid.n_total, case.q0)
    else:
        h = case.initial_level - bathymetry.cell_averages
        q = np.full(grid.n_total, case.initial_discharge)
    if case.alpha:
        h = h + case.alpha * _cell_average(perturbation, grid, smooth)
    return State(h_bar=np.array(h, dtype=float), q_bar=q)


def reference_solution(
    case: CaseSpec, grid: Grid, bathymetry: Bathymetry, rule: QuadratureRule
) -> tuple[np.ndarray, np.ndarray]:
    """
    Reference cell averages (h, q) of the interior cells.

    Averages use `rule`, the quadrature the scheme itself uses.
    """
    match case.oracle:
        case Oracle.EXACT:
            h = case.initial_level - bathymetry.cell_averages[grid.interior]
            return h, np.zeros(grid.n_cells)
        case Oracle.STEADY_INVARIANT:
            h = _cell_average(lambda x: steady_reference(case, x)[0], grid, rule)[grid.interior]
            return h, np.full(grid.n_cells, case.q0)
    raise OracleError(f"case {case.name!r} has no reference solution")


def upsilon(h: np.ndarray, q: np.ndarray, b: np.ndarray, g: float) -> np.ndarray:
    """Bernoulli head q²/(2h²) + g (h + b)."""
    return q * q / (2.0 * h * h) + g * (h + b)


@dataclass(frozen=True)
class ErrorReport:
    n_cells: int
    l2_h: float
    l2_q: float
    q_drift: float | None = None
    k_drift: float | None = None
    k_spread: float | None = None
    upsilon_drift: float | None = None


def l2_norm(values: np.ndarray, dx: float) -> float:
    return float(np.sqrt(dx * np.sum(values * values)))


def compute_errors(
    numerical: tuple[np.ndarray, np.ndarray],
    reference: tuple[np.ndarray, np.ndarray],
    grid: Grid,
) -> ErrorReport:
    h, q = (np.asarray(a, dtype=float) for a in numerical)
    h_ref, q_ref = (np.asarray(a, dtype=float) for a in reference)
    if h.shape != (grid.n_cells,) or h.shape != h_ref.shape or q.shape != q_ref.shape or q.shape != h.shape:
        raise ConfigError(
            f"size mismatch: {h.shape}, {q.shape} against {h_ref.shape}, {q_ref.shape} on {grid.n_cells} cells"
        )
    return ErrorReport(n_cells=grid.n_cells, l2_h=l2_norm(h - h_ref, grid.dx), l2_q=l2_norm(q - q_ref, grid.dx))


def invariant_drift(
    report: ErrorReport,
    q_bar: np.ndarray,
    k_bar: np.ndarray | None,
    case: CaseSpec,
    h_bar: np.ndarray | None = None,
    b_bar: np.ndarray | None = None,
) -> ErrorReport:
    """
    Attach max|q̄ - q₀|, max|K̄ - K₀| and the spread of K̄ to `report`.

    With `h_bar` and `b_bar` given, max|Υ - Υ₀| of the cell averages is attached too.
    """
    q_drift = None if case.q0 is None else float(np.max(np.abs(q_bar - case.q0)))
    k_drift = k_spread = None
    if k_bar is not None:
        k_spread = float(np.max(k_bar) - np.min(k_bar))
        if case.k0 is not None:
            k_drift = float(np.max(np.abs(k_bar - case.k0)))
    upsilon_drift = None
    if h_bar is not None and b_bar is not None and case.upsilon0 is not None:
        upsilon_drift = float(np.max(np.abs(upsilon(h_bar, q_bar, b_bar, case.g) - case.upsilon0)))
    return ErrorReport(
        n_cells=report.n_cells,
        l2_h=report.l2_h,
        l2_q=report.l2_q,
        q_drift=q_drift,
        k_drift=k_drift,
        k_spread=k_spread,
        upsilon_drift=upsilon_drift,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    n_cells: int
    l2_h: float
    eoa_h: float | None
    l2_q: float
    eoa_q: float | None


def convergence_rows(reports: list[ErrorReport]) -> list[ConvergenceRow]:
    """Rows in input order; EOA is None on the first row and between equal meshes."""
    n = [r.n_cells for r in reports]
    eoa_h = estimate_order([r.l2_h for r in reports], n)
    eoa_q = estimate_order([r.l2_q for r in reports], n)
    return [
        ConvergenceRow(n_cells=r.n_cells, l2_h=r.l2_h, eoa_h=eh, l2_q=r.l2_q, eoa_q=eq)
        for r, eh, eq in zip(reports, eoa_h, eoa_q)
    ]
