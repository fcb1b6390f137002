from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfswe.scheme.cases import STEP, get_case, initial_state, lake_bc
from gfswe.scheme.global_flux import (
    FluxMode,
    SourceIncrements,
    _interior_step_increments,
    assemble_global_flux_averages,
    hyperbolic_flux_average,
    interface_jump,
    physical_flux,
    source_integral_reconstruct,
    sweep_source_integral,
    well_balanced_increments,
)
from gfswe.scheme.grid_state import PhysicalParams, State, build_grid, sample_bathymetry
from gfswe.scheme.quadrature import gauss_legendre, gauss_lobatto
from gfswe.scheme.solver import Scheme, build_operator
from gfswe.util.exceptions import ConfigError, PositivityError
from tests.scheme.test_helpers import G_STEADY, operator_for, params


def test_physical_flux_at_rest() -> None:
    assert physical_flux(1.0, 0.0, 1.0) == (0.0, 0.5)


@pytest.mark.parametrize("q,k", [(4.42, 29.3922), (24.0, 307.624)])
def test_hyperbolic_flux_average_of_boundary_states(q: float, k: float) -> None:
    rule = gauss_lobatto(4)
    f1, f2 = hyperbolic_flux_average(np.full((1, 4), 2.0), np.full((1, 4), q), rule, params(G_STEADY))
    assert f1[0] == pytest.approx(q, rel=1e-14)
    assert f2[0] == pytest.approx(k, rel=1e-14)


def test_hyperbolic_flux_average_rejects_dry_nodes() -> None:
    with pytest.raises(PositivityError):
        hyperbolic_flux_average(np.array([[1.0, 0.0, 1.0]]), np.zeros((1, 3)), gauss_lobatto(3), params())


def test_interface_jump() -> None:
    assert interface_jump(1.3, 1.1, 0.4, 0.4, G_STEADY) == 0.0
    assert interface_jump(2.0, 2.0, 0.0, 0.2, G_STEADY) == pytest.approx(3.72856, rel=1e-14)


def test_flat_bed_keeps_source_primitive() -> None:
    rule = gauss_lobatto(3)
    cell = source_integral_reconstruct(
        np.full(3, 1.7), np.zeros(3), np.full(3, 0.3), np.full(3, 1.7), (0.0, 0.0), params(), rule, prev_R=2.5
    )
    np.testing.assert_array_equal(cell.nodes, 2.5)
    assert cell.left == cell.right == 2.5


def test_linear_bed_source_primitive() -> None:
    rule = gauss_lobatto(3)
    b = rule.nodes.copy()
    cell = source_integral_reconstruct(np.full(3, 2.0), b, np.zeros(3), 2.0 - b, (0.0, 1.0), params(), rule, prev_R=0.0)
    np.testing.assert_allclose(cell.nodes, [0.0, 0.875, 1.5], atol=1e-14)
    assert cell.right == pytest.approx(1.5, abs=1e-14)


@settings(deadline=None)
@given(
    b=st.lists(st.floats(min_value=-0.5, max_value=0.5), min_size=4, max_size=4),
    eta0=st.floats(min_value=1.0, max_value=3.0),
    prev=st.floats(min_value=-10.0, max_value=10.0),
)
def test_lake_at_rest_flux_constant_in_cell(b: list[float], eta0: float, prev: float) -> None:
    rule = gauss_lobatto(4)
    b = np.array(b)
    g = G_STEADY
    h = eta0 - b
    cell = source_integral_reconstruct(np.full(4, eta0), b, np.zeros(4), h, (b[0], b[-1]), params(g), rule, prev)
    k = 0.5 * g * h * h + cell.nodes
    expected = prev + 0.5 * g * eta0**2 - g * eta0 * b[0] + 0.5 * g * b[0] ** 2
    np.testing.assert_allclose(k, expected, rtol=1e-12, atol=1e-12)


def test_friction_makes_primitive_increase() -> None:
    rule = gauss_lobatto(4)
    n = 3
    h = np.full((n, 4), 1.5)
    q = np.full((n, 4), 2.0)
    zeros = np.zeros((n, 4))
    increments = well_balanced_increments(
        h, zeros, q, h, np.zeros(n), np.zeros(n), params(G_STEADY, 0.05), rule, dx=0.5
    )
    field = sweep_source_integral(increments, np.zeros(n - 1), seed=0)
    flat = field.nodes.ravel()
    # node 0 of each cell repeats the previous cell's right edge
    assert np.all(np.diff(flat) >= 0)
    assert np.all(np.diff(field.left) > 0)


def test_sweep_seed_and_interfaces() -> None:
    rng = np.random.default_rng(3)
    n, seed = 9, 4
    increments = SourceIncrements(nodes=rng.standard_normal((n, 3)), right=rng.standard_normal(n))
    jumps = rng.standard_normal(n - 1)
    field = sweep_source_integral(increments, jumps, seed)
    assert field.left[seed] == 0.0
    for m in range(seed, n - 1):
        assert field.right[m] + jumps[m] == field.left[m + 1]
    np.testing.assert_allclose(field.right[:-1] + jumps, field.left[1:], atol=1e-14)
    np.testing.assert_allclose(field.right - field.left, increments.right, atol=1e-14)
    np.testing.assert_allclose(field.nodes - field.left[:, None], increments.nodes, atol=1e-14)


def test_sweep_rejects_inconsistent_sizes() -> None:
    increments = SourceIncrements(nodes=np.zeros((3, 2)), right=np.zeros(3))
    with pytest.raises(ConfigError):
        sweep_source_integral(increments, np.zeros(3), seed=0)
    with pytest.raises(ConfigError):
        sweep_source_integral(increments, np.zeros(2), seed=3)


@pytest.mark.parametrize("order", [3, 5])
@pytest.mark.parametrize("n_cells", [25, 100])
def test_lake_at_rest_global_flux_is_constant(order: int, n_cells: int) -> None:
    operator = operator_for("lake_at_rest", Scheme.GF_WB, order, n_cells)
    y0 = initial_state(operator.case, operator.grid, operator.bathymetry).interior(operator.grid)
    field = operator.fields(operator.fill(y0))
    k = field.k_avg
    np.testing.assert_allclose(k, k[0], rtol=1e-12)
    np.testing.assert_allclose(field.k_nodes, k[0], rtol=1e-12)
    np.testing.assert_allclose(field.q_avg, 0.0, atol=1e-15)
    assert field.k_left.shape == (n_cells + 1,)


@pytest.mark.parametrize("n_cells", [25, 30])
def test_lake_at_rest_over_step(n_cells: int) -> None:
    case = replace(
        get_case("lake_at_rest"),
        bathymetry=STEP,
        boundary=lake_bc(2.0),
        initial_level=2.0,
        params=PhysicalParams(g=G_STEADY),
    )
    operator = build_operator(case, Scheme.GF_WB, 5, n_cells)
    y0 = initial_state(case, operator.grid, operator.bathymetry).interior(operator.grid)
    field = operator.fields(operator.fill(y0))
    np.testing.assert_allclose(field.k_avg, field.k_avg[0], rtol=1e-12)
    np.testing.assert_allclose(field.k_left, field.k_right, rtol=1e-12)


@pytest.mark.parametrize("scheme", [Scheme.GF_WB, Scheme.GF_NONWB])
def test_uniform_flow_global_flux(scheme: Scheme) -> None:
    operator = operator_for("uniform_flow", scheme, 5, 20)
    y0 = initial_state(operator.case, operator.grid, operator.bathymetry).interior(operator.grid)
    field = operator.fields(operator.fill(y0))
    _, k_exact = physical_flux(2.0, 4.42, G_STEADY)
    np.testing.assert_array_equal(field.k_nodes, k_exact)
    np.testing.assert_array_equal(field.source.nodes, 0.0)
    np.testing.assert_allclose(field.k_avg, k_exact, rtol=1e-14)
    np.testing.assert_array_equal(field.q_left, field.q_right)
    np.testing.assert_array_equal(field.k_left, field.k_right)
    rows = field.interior_rows(operator.grid)
    assert field.k_avg[rows].shape == (20,)


def test_assembly_needs_halo_and_edges() -> None:
    case = get_case("lake_at_rest")
    rule = gauss_lobatto(4)
    grid = build_grid(case.x_left, case.x_right, 10, 2)
    bathymetry = sample_bathymetry(case.bathymetry, grid, rule)
    state = State(h_bar=np.ones(grid.n_total), q_bar=np.zeros(grid.n_total))
    with pytest.raises(ConfigError):
        assemble_global_flux_averages(state, bathymetry, case.params, rule, FluxMode.WELL_BALANCED, grid, 5)

    rule = gauss_legendre(3)
    grid = build_grid(case.x_left, case.x_right, 10, 5)
    bathymetry = sample_bathymetry(case.bathymetry, grid, rule)
    state = State(h_bar=np.ones(grid.n_total), q_bar=np.zeros(grid.n_total))
    with pytest.raises(ConfigError):
        assemble_global_flux_averages(state, bathymetry, case.params, rule, FluxMode.WELL_BALANCED, grid, 5)


def test_dry_node_reports_interior_cell() -> None:
    operator = operator_for("lake_at_rest", Scheme.GF_WB, 3, 10)
    y = np.stack([np.ones(10), np.zeros(10)])
    y[0, 4] = -0.5
    with pytest.raises(PositivityError) as e:
        operator.fields(operator.fill(y))
    assert e.value.where == "quadrature node"
    assert 3 <= e.value.cell <= 5


def test_step_inside_cell_source() -> None:
    grid = build_grid(0.0, 25.0, 30, 5)
    rule = gauss_lobatto(3)
    bathymetry = sample_bathymetry(STEP, grid, rule)
    h_bar = np.full(grid.n_total, 1.5)
    first = 2
    n_rows = grid.n_total - 4
    steps = _interior_step_increments(bathymetry, grid, rule, h_bar, first, n_rows, G_STEADY)
    amount = G_STEADY * 1.5 * 0.2
    # x = 8 is 60% into interior cell 9, x = 12 is 40% into interior cell 14
    up = grid.n_ghost + 9 - first
    down = grid.n_ghost + 14 - first
    np.testing.assert_allclose(steps.nodes[up], [0.0, 0.0, amount])
    np.testing.assert_allclose(steps.nodes[down], [0.0, -amount, -amount])
    assert steps.right[up] == pytest.approx(amount)
    assert steps.right[down] == pytest.approx(-amount)
    assert np.count_nonzero(steps.right) == 2
