"""Run drivers: one configured run, and a convergence study over several meshes."""

import multiprocessing as mp
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from gfswe.scheme.cases import (
    CaseSpec,
    ConvergenceRow,
    ErrorReport,
    Oracle,
    compute_errors,
    convergence_rows,
    get_case,
    initial_state,
    invariant_drift,
    reference_solution,
)
from gfswe.scheme.config import RunConfig
from gfswe.scheme.dec_time import default_dec
from gfswe.scheme.outputs import (
    RunSummary,
    convergence_text,
    equilibrium_cache_path,
    load_equilibrium,
    save_equilibrium,
    snapshot_path,
    snapshot_text,
    write_summary,
    write_text,
)
from gfswe.scheme.solver import IntegrationResult, SpatialOperator, build_operator, integrate
from gfswe.util.exceptions import OracleError
from gfswe.util.fs import safe_name
from gfswe.util.log import LOG, run_context


@dataclass
class Solution:
    case: CaseSpec
    operator: SpatialOperator
    result: IntegrationResult


def build_run_operator(config: RunConfig, case: CaseSpec) -> SpatialOperator:
    return build_operator(case, config.scheme, config.order, config.cells, config.quadrature_nodes, config.epsilon)


def solve(
    config: RunConfig,
    case: Optional[CaseSpec] = None,
    snapshots: bool = True,
    operator: Optional[SpatialOperator] = None,
) -> Solution:
    case = case or get_case(config.case)
    if operator is None:
        operator = build_run_operator(config, case)
    y0 = initial_state(case, operator.grid, operator.bathymetry).interior(operator.grid)
    t_end = config.tend if config.tend is not None else case.t_end
    times = tuple(config.snapshots if config.snapshots is not None else case.snapshot_times) if snapshots else ()
    with run_context(case.name, config.scheme.value, config.order, config.cells):
        LOG.info(f"running up to t={t_end}")
        result = integrate(
            operator,
            y0,
            t_end,
            default_dec(config.order, config.dec_nodes),
            cfl=config.cfl,
            snapshot_times=times,
            steady=case.steady,
            steady_tol=config.steady_tol,
            max_steps=config.max_steps,
        )
        LOG.info(f"finished at t={result.time:.6g} after {result.steps} steps")
    return Solution(case=case, operator=operator, result=result)


def equilibrium_depth(config: RunConfig, case: CaseSpec, y0: np.ndarray, operator: SpatialOperator) -> np.ndarray:
    """
    h_eq for the `pert` column.

    The lake at rest uses its exact depth; perturbed moving equilibria use the
    converged unperturbed run on the same mesh and scheme, cached as msgpack in
    the output directory. Cases without an equilibrium use the initial depth.
    """
    grid = operator.grid
    if case.equilibrium is None:
        return y0[0]
    if case.equilibrium == "exact":
        return case.initial_level - operator.bathymetry.cell_averages[grid.interior]

    base = get_case(case.equilibrium)
    meta = {"case": base.name, "scheme": config.scheme.value, "order": config.order, "n_cells": config.cells}
    path = equilibrium_cache_path(config.out, base.name, config.scheme.value, config.order, config.cells)
    cached = load_equilibrium(path, meta)
    if cached is not None:
        LOG.info(f"using cached equilibrium {path}")
        return cached[0]
    LOG.info(f"computing equilibrium {base.name} for {case.name}")
    base_config = config.with_overrides(case=base.name, tend=None, snapshots=None)
    equilibrium = solve(base_config, base, snapshots=False).result.y
    if not save_equilibrium(path, meta, equilibrium[0], equilibrium[1]):
        LOG.warning(f"could not cache equilibrium at {path}")
    return equilibrium[0]


def _write_state(
    config: RunConfig, operator: SpatialOperator, y: np.ndarray, h_eq: np.ndarray, time: float, label: str
) -> Path:
    grid = operator.grid
    text = snapshot_text(
        x=grid.interior_centers(),
        h=y[0],
        q=y[1],
        b=operator.bathymetry.cell_averages[grid.interior],
        k=operator.k_averages(y),
        pert=y[0] - h_eq,
        time=time,
    )
    path = snapshot_path(config.out, config.case, config.scheme.value, config.order, config.cells, label)
    return write_text(path, text)


def report_errors(solution: Solution) -> ErrorReport:
    """L² errors against the oracle (NaN without one) plus the invariant drifts."""
    operator, y = solution.operator, solution.result.y
    grid = operator.grid
    try:
        reference = reference_solution(solution.case, grid, operator.bathymetry, operator.rule)
        report = compute_errors((y[0], y[1]), reference, grid)
    except OracleError:
        report = ErrorReport(n_cells=grid.n_cells, l2_h=float("nan"), l2_q=float("nan"))
    b = operator.bathymetry.cell_averages[grid.interior]
    return invariant_drift(report, y[1], operator.k_averages(y), solution.case, h_bar=y[0], b_bar=b)


def _optional(value: float) -> Optional[float]:
    return None if value is None or not np.isfinite(value) else value


def run(config: RunConfig) -> RunSummary:
    """Solve, write snapshots, final state and the JSON summary; return the summary."""
    case = get_case(config.case)
    operator = build_run_operator(config, case)
    y0 = initial_state(case, operator.grid, operator.bathymetry).interior(operator.grid)
    h_eq = equilibrium_depth(config, case, y0, operator)

    solution = solve(config, case, operator=operator)
    result = solution.result
    files = [
        _write_state(config, solution.operator, y, h_eq, t, f"t{t:.4f}") for t, y in sorted(result.snapshots.items())
    ]
    files.append(_write_state(config, solution.operator, result.y, h_eq, result.time, "final"))

    report = report_errors(solution)
    if case.oracle is not Oracle.NONE:
        LOG.info(f"L2(h) = {report.l2_h:.4e}, L2(q) = {report.l2_q:.4e}")
    if report.q_drift is not None:
        LOG.info(f"max|q - q0| = {report.q_drift:.3e}")
    if report.k_spread is not None:
        LOG.info(f"K spread = {report.k_spread:.3e}")
    if report.upsilon_drift is not None:
        LOG.info(f"max|Upsilon - Upsilon0| = {report.upsilon_drift:.3e}")

    summary = RunSummary(
        case=case.name,
        scheme=config.scheme.value,
        order=config.order,
        cells=config.cells,
        final_time=result.time,
        steps=result.steps,
        steady_reached=result.steady_reached,
        residual_norm=result.residual_norm,
        l2_h=_optional(report.l2_h),
        l2_q=_optional(report.l2_q),
        q_drift=report.q_drift,
        k_drift=report.k_drift,
        k_spread=report.k_spread,
        upsilon_drift=report.upsilon_drift,
        files=[str(f) for f in files],
    )
    name = safe_name(case.name, config.scheme.value, f"p{config.order}", f"N{config.cells}", "summary")
    summary_path = Path(config.out) / f"{name}.json"
    write_summary(summary_path, summary)
    return summary


def _mesh_report(config: RunConfig) -> ErrorReport:
    return report_errors(solve(config, snapshots=False))


def convergence(config: RunConfig, meshes: Sequence[int], jobs: int = 1) -> tuple[list[ConvergenceRow], Path]:
    """
    Errors and EOA over `meshes`, in the given order, written as a table.

    Raises:
        OracleError: If the case has no reference solution.
    """
    case = get_case(config.case)
    if case.oracle is Oracle.NONE:
        raise OracleError(f"case {case.name!r} has no reference solution for a convergence study")
    configs = [config.with_overrides(cells=n, snapshots=[]) for n in meshes]
    if jobs > 1:
        with mp.Pool(processes=min(jobs, len(configs))) as pool:
            reports = pool.map(_mesh_report, configs)
    else:
        reports = [_mesh_report(c) for c in configs]
    rows = convergence_rows(reports)
    path = Path(config.out) / f"{safe_name('convergence', case.name, config.scheme.value, f'p{config.order}')}.dat"
    write_text(path, convergence_text(rows))
    return rows, path
