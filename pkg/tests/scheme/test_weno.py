import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfswe.scheme.quadrature import gauss_lobatto
from gfswe.scheme.weno import (
    LinearWeightsUndefined,
    PointWeights,
    WenoConfig,
    WenoWeights,
    linear_weights,
    reconstruct,
    reconstruct_field,
    smoothness_indicators,
    stencil_coefficients,
    stencil_windows,
    workspace_for,
)
from gfswe.util.exceptions import ConfigError
from tests.scheme.test_helpers import unit_windows

LOBATTO_POINTS = {3: tuple(gauss_lobatto(3).nodes), 5: tuple(gauss_lobatto(4).nodes)}


def _linear(workspace, n_windows: int) -> WenoWeights:
    """Nonlinear weights frozen at the optimal linear weights."""
    points = []
    for stencil in workspace.stencils:
        plus = np.tile(stencil.gamma_plus, (n_windows, 1))
        minus = np.tile(stencil.gamma_minus, (n_windows, 1)) if stencil.split else None
        points.append(PointWeights(omega_plus=plus, omega_minus=minus))
    return WenoWeights(points=tuple(points), betas=np.zeros((n_windows, workspace.r)))


@pytest.mark.parametrize(
    "order,point,expected",
    [
        (5, 1.0, [0.1, 0.6, 0.3]),
        (5, 0.0, [0.3, 0.6, 0.1]),
        (3, 1.0, [1 / 3, 2 / 3]),
        (3, 0.0, [2 / 3, 1 / 3]),
    ],
)
def test_interface_linear_weights(order: int, point: float, expected: list[float]) -> None:
    np.testing.assert_allclose(linear_weights(order, point), expected, rtol=1e-14)


def test_center_linear_weights() -> None:
    d = linear_weights(5, 0.5)
    np.testing.assert_allclose(d, [-9 / 80, 49 / 40, -9 / 80], rtol=1e-13)
    with pytest.raises(LinearWeightsUndefined):
        linear_weights(3, 0.5)


def test_third_order_edge_stencils() -> None:
    np.testing.assert_allclose(stencil_coefficients(3, 1.0), [[-0.5, 1.5, 0.0], [0.0, 0.5, 0.5]], atol=1e-15)


def test_workspace_structure() -> None:
    ws = workspace_for(5, LOBATTO_POINTS[5])
    np.testing.assert_allclose(ws.stencils[0].linear_weights, [0.3, 0.6, 0.1], rtol=1e-14)
    assert not ws.stencils[0].split
    for s in ws.stencils:
        assert s.linear_weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert s.sigma_plus - s.sigma_minus == pytest.approx(1.0, abs=1e-14)
    ws3 = workspace_for(3, LOBATTO_POINTS[3])
    assert [s.central for s in ws3.stencils] == [False, True, False]
    assert ws3.needs_high_order_indicator


@pytest.mark.parametrize(
    "kwargs",
    [
        {"order": 4, "points": (0.0,)},
        {"order": 5, "points": ()},
        {"order": 5, "points": (1.5,)},
        {"order": 5, "points": (0.0,), "epsilon": 0.0},
    ],
)
def test_config_validation(kwargs) -> None:
    with pytest.raises(ConfigError):
        WenoConfig(**kwargs)


@pytest.mark.parametrize("order", [3, 5])
def test_smoothness_of_constant_and_linear_data(order: int) -> None:
    np.testing.assert_array_equal(smoothness_indicators(np.full((1, order), 3.7), order), 0.0)
    linear = np.arange(order, dtype=float)[None, :]
    np.testing.assert_allclose(smoothness_indicators(linear, order), 1.0, rtol=1e-13)


def test_smoothness_of_step() -> None:
    np.testing.assert_allclose(smoothness_indicators(np.array([[0.0, 0.0, 1.0]]), 3), [[0.0, 1.0]], atol=1e-15)


@pytest.mark.parametrize("order", [3, 5])
def test_constant_reproduced_exactly(order: int) -> None:
    ws = workspace_for(order, LOBATTO_POINTS[order] + (0.25,))
    values, weights = reconstruct(np.full((4, order), 1.234), ws)
    np.testing.assert_array_equal(values, 1.234)
    np.testing.assert_array_equal(weights.betas, 0.0)


@settings(deadline=None)
@given(
    order=st.sampled_from([3, 5]),
    coefficients=st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=3),
)
def test_low_degree_polynomials_reproduced(order: int, coefficients: list[float]) -> None:
    r = (order + 1) // 2
    coefficients = coefficients[:r]
    points = LOBATTO_POINTS[order] + (0.3,)
    values, _ = reconstruct(unit_windows(coefficients, order), workspace_for(order, points))
    np.testing.assert_allclose(values[0], np.polynomial.polynomial.polyval(points, coefficients), atol=1e-12)


@settings(deadline=None)
@given(
    order=st.sampled_from([3, 5]),
    coefficients=st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=5),
)
def test_linear_weights_reach_full_order(order: int, coefficients: list[float]) -> None:
    coefficients = coefficients[:order]
    points = LOBATTO_POINTS[order] + (0.3,)
    ws = workspace_for(order, points)
    windows = unit_windows(coefficients, order)
    values, _ = reconstruct(windows, ws, _linear(ws, 1))
    np.testing.assert_allclose(values[0], np.polynomial.polynomial.polyval(points, coefficients), atol=1e-11)


@settings(deadline=None)
@given(window=st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=5, max_size=5))
def test_nonlinear_weights_are_convex(window: list[float]) -> None:
    ws = workspace_for(5, LOBATTO_POINTS[5])
    _, weights = reconstruct(np.array([window]), ws)
    for point in weights.points:
        for omega in (point.omega_plus, point.omega_minus):
            if omega is None:
                continue
            assert np.all(omega >= 0)
            np.testing.assert_allclose(omega.sum(axis=-1), 1.0, atol=1e-14)


def test_no_oscillation_next_to_jump() -> None:
    ws = workspace_for(5, (1.0,))
    values, _ = reconstruct(np.array([[0.0, 0.0, 0.0, 1.0, 1.0]]), ws)
    assert abs(values[0, 0]) < 1e-9


def test_fifth_order_convergence_on_sine() -> None:
    ws = workspace_for(5, (1.0,))
    x0 = 0.3
    errors = []
    for dx in (0.04, 0.02):
        left = x0 + dx * np.arange(-2, 3)
        averages = (np.cos(left) - np.cos(left + dx)) / dx
        values, _ = reconstruct(averages[None, :], ws)
        errors.append(abs(values[0, 0] - np.sin(x0 + dx)))
    observed = np.log2(errors[0] / errors[1])
    assert 4.5 < observed < 5.5


def test_imposed_weights_are_used_unchanged() -> None:
    ws = workspace_for(5, LOBATTO_POINTS[5])
    rng = np.random.default_rng(7)
    eta = 2.0 + 0.01 * rng.standard_normal((6, 5))
    b = rng.standard_normal((6, 5))
    _, eta_weights = reconstruct(eta, ws)
    _, used = reconstruct(b, ws, eta_weights)
    assert used is eta_weights
    _, own = reconstruct(b, ws)
    assert not np.array_equal(own.points[0].omega_plus, eta_weights.points[0].omega_plus)


def test_imposed_weights_must_match() -> None:
    ws = workspace_for(5, (0.0, 1.0))
    _, weights = reconstruct(np.ones((3, 5)), ws)
    with pytest.raises(ConfigError):
        reconstruct(np.ones((4, 5)), ws, weights)
    with pytest.raises(ConfigError):
        reconstruct(np.ones((3, 5)), workspace_for(5, (1.0,)), weights)


def test_field_windows() -> None:
    field = np.arange(10, dtype=float)
    windows = stencil_windows(field, 5)
    assert windows.shape == (6, 5)
    np.testing.assert_array_equal(windows[0], [0, 1, 2, 3, 4])
    values, _ = reconstruct_field(field, workspace_for(5, (0.0, 1.0)))
    # averages of x - 1/2 on cells [j, j + 1]
    np.testing.assert_allclose(values[:, 0], np.arange(2, 8) - 0.5, atol=1e-13)
    np.testing.assert_allclose(values[:, 1], np.arange(2, 8) + 0.5, atol=1e-13)
    with pytest.raises(ConfigError):
        stencil_windows(np.ones(3), 5)



def test_third_order_centre_falls_back_to_central_candidate() -> None:
    workspace = workspace_for(3, (0.5,))
    (stencil,) = workspace.stencils
    assert stencil.central
    np.testing.assert_allclose(stencil.linear_weights, [0.25, 0.25, 0.5], rtol=1e-15)
    np.testing.assert_allclose(stencil.candidates.sum(axis=1), 1.0, rtol=1e-14)

    # x² has cell average 1/3 on [0, 1] and value 1/4 at the centre
    window = unit_windows([0.0, 0.0, 1.0], 3)
    values, _ = reconstruct(window, workspace, _linear(workspace, 1))
    assert values[0, 0] == pytest.approx(0.25, abs=1e-14)
    values, weights = reconstruct(unit_windows([2.0, -1.0], 3), workspace)
    assert values[0, 0] == pytest.approx(1.5, abs=1e-14)
    np.testing.assert_allclose(weights.points[0].omega_plus.sum(axis=-1), 1.0, rtol=1e-14)
