"""
WENO reconstruction from cell averages to point values anywhere in a cell.

A reconstruction of odd order p = 2r - 1 blends r stencil polynomials of
degree r - 1. Optimal linear weights are computed per evaluation point; when
some are negative the positive and negative groups are weighted separately
and recombined, and where no linear weights reproduce the order-p polynomial
the order-p polynomial itself joins the candidates (central WENO).

Values are assembled relative to the cell's own average, so constant data is
reproduced exactly and smoothness indicators vanish exactly on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gfswe.util.exceptions import ConfigError
from gfswe.util.log import LOG

SUPPORTED_ORDERS = (3, 5)
DEFAULT_EPSILON = 1e-6
SPLIT_THETA = 3
_DPS = 50


class LinearWeightsUndefined(ConfigError):
    """no convex-combination weights reproduce the order-p polynomial at this point"""


@dataclass(frozen=True)
class WenoConfig:
    order: int
    points: tuple[float, ...]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if self.order not in SUPPORTED_ORDERS:
            raise ConfigError(f"WENO order must be one of {SUPPORTED_ORDERS}, got {self.order}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not self.points:
            raise ConfigError("no evaluation points")
        for x in self.points:
            if not 0.0 <= x <= 1.0:
                raise ConfigError(f"evaluation point {x} outside the reference cell")

    @property
    def r(self) -> int:
        return (self.order + 1) // 2


@dataclass(frozen=True, eq=False)
class PointStencil:
    """
    Everything needed to reconstruct at one evaluation point.

    Attributes:
        point (float): Reference coordinate.
        candidates (np.ndarray): Shape (m, p); row k maps a p-cell window to candidate k at `point`.
        linear_weights (np.ndarray): Shape (m,), summing to 1, possibly with negative entries.
        central (bool): Whether the order-p polynomial is a candidate (m = r + 1).
        gamma_plus, gamma_minus (np.ndarray): Normalized weights of the split groups.
        sigma_plus, sigma_minus (float): Group scales, sigma_plus - sigma_minus = 1.
            sigma_minus is 0 when no weight is negative.
    """

    point: float
    candidates: np.ndarray
    linear_weights: np.ndarray
    central: bool
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    sigma_plus: float
    sigma_minus: float

    @property
    def split(self) -> bool:
        return self.sigma_minus > 0


@dataclass(frozen=True, eq=False)
class WenoWorkspace:
    config: WenoConfig
    smoothness_forms: np.ndarray
    high_order_form: np.ndarray
    stencils: tuple[PointStencil, ...]

    @property
    def order(self) -> int:
        return self.config.order

    @property
    def r(self) -> int:
        return self.config.r

    @property
    def needs_high_order_indicator(self) -> bool:
        return any(s.central for s in self.stencils)


@dataclass(frozen=True, eq=False)
class PointWeights:
    """Nonlinear weights at one evaluation point; each group is convex on its own."""

    omega_plus: np.ndarray
    omega_minus: np.ndarray | None


@dataclass(frozen=True, eq=False)
class WenoWeights:
    """
    Weights used by one reconstruction pass.

    Attributes:
        points (tuple[PointWeights, ...]): One entry per evaluation point, arrays of shape (n_cells, m).
        betas (np.ndarray): Smoothness indicators, shape (n_cells, r), or (n_cells, r + 1) when the
            order-p polynomial's indicator was needed.
    """

    points: tuple[PointWeights, ...]
    betas: np.ndarray


def _mp(values) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in values])


def _average_matrix_inverse(offsets: Sequence[int]) -> mpmath.matrix:
    """Inverse of the map from monomial coefficients to averages over [o, o + 1]."""
    s = len(offsets)
    m = mpmath.matrix(s, s)
    for j, o in enumerate(offsets):
        for n in range(s):
            m[j, n] = (mpmath.mpf(o + 1) ** (n + 1) - mpmath.mpf(o) ** (n + 1)) / (n + 1)
    return mpmath.inverse(m)


def _point_row(offsets: Sequence[int], point) -> list:
    inverse = _average_matrix_inverse(offsets)
    s = len(offsets)
    return [sum(mpmath.mpf(point) ** n * inverse[n, j] for n in range(s)) for j in range(s)]


def _smoothness_form(offsets: Sequence[int]) -> mpmath.matrix:
    """Quadratic form β(u) = uᵀ B u over the stencil's own averages."""
    s = len(offsets)
    inverse = _average_matrix_inverse(offsets)
    q = mpmath.matrix(s, s)
    for l in range(1, s):
        for n in range(l, s):
            cn = mpmath.mpf(math.factorial(n)) / math.factorial(n - l)
            for m in range(l, s):
                cm = mpmath.mpf(math.factorial(m)) / math.factorial(m - l)
                q[n, m] += cn * cm / (n + m - 2 * l + 1)
    return inverse.T * q * inverse


def _stencil_offsets(order: int, k: int) -> list[int]:
    r = (order + 1) // 2
    return [k - (r - 1) + j for j in range(r)]


def _mp_stencil_rows(order: int, point) -> list[list]:
    r = (order + 1) // 2
    rows = []
    for k in range(r):
        row = [mpmath.mpf(0)] * order
        for j, c in enumerate(_point_row(_stencil_offsets(order, k), point)):
            row[k + j] = c
        rows.append(row)
    return rows


def _mp_high_order_row(order: int, point) -> list:
    r = (order + 1) // 2
    return _point_row(list(range(-(r - 1), r)), point)


def stencil_coefficients(order: int, point: float) -> np.ndarray:
    """Shape (r, p): row k gives p_k(point) as a combination of the p-cell window."""
    with mpmath.workdps(_DPS):
        return _mp(_mp_stencil_rows(order, point))


def high_order_coefficients(order: int, point: float) -> np.ndarray:
    with mpmath.workdps(_DPS):
        return _mp([_mp_high_order_row(order, point)])[0]


def _mp_linear_weights(order: int, point) -> list:
    rows = _mp_stencil_rows(order, point)
    target = _mp_high_order_row(order, point)
    r = len(rows)
    a = mpmath.matrix(order, r)
    for k in range(r):
        for w in range(order):
            a[w, k] = rows[k][w]
    b = mpmath.matrix(target)
    try:
        d, residual = mpmath.qr_solve(a, b)
    except (ValueError, ZeroDivisionError) as e:
        # coinciding stencil values at the point, e.g. the WENO3 cell centre
        raise LinearWeightsUndefined(f"no linear weights for order {order} at point {point}") from e
    if residual > mpmath.mpf(10) ** (-_DPS // 2):
        raise LinearWeightsUndefined(f"no linear weights for order {order} at point {point}")
    return [d[k] for k in range(r)]


def linear_weights(order: int, eval_point: float) -> np.ndarray:
    """
    Optimal linear weights d_m at `eval_point`.

    Raises:
        LinearWeightsUndefined: If no weights make the stencil polynomials reproduce the order-p one.
    """
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(f"WENO order must be one of {SUPPORTED_ORDERS}, got {order}")
    with mpmath.workdps(_DPS):
        return np.array([float(d) for d in _mp_linear_weights(order, eval_point)])


@lru_cache(maxsize=None)
def smoothness_forms(order: int) -> np.ndarray:
    """Shape (r, p, p): β_k = wᵀ B_k w for a p-cell window w."""
    r = (order + 1) // 2
    forms = np.zeros((r, order, order))
    with mpmath.workdps(_DPS):
        for k in range(r):
            local = _smoothness_form(_stencil_offsets(order, k))
            for i in range(r):
                for j in range(r):
                    forms[k, k + i, k + j] = float(local[i, j])
    forms.setflags(write=False)
    return forms


@lru_cache(maxsize=None)
def high_order_form(order: int) -> np.ndarray:
    r = (order + 1) // 2
    with mpmath.workdps(_DPS):
        local = _smoothness_form(list(range(-(r - 1), r)))
        form = np.array([[float(local[i, j]) for j in range(order)] for i in range(order)])
    form.setflags(write=False)
    return form


def _split(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
    if np.all(weights >= 0):
        return weights, np.zeros_like(weights), 1.0, 0.0
    plus = 0.5 * (weights + SPLIT_THETA * np.abs(weights))
    minus = plus - weights
    sigma_plus, sigma_minus = float(plus.sum()), float(minus.sum())
    return plus / sigma_plus, minus / sigma_minus, sigma_plus, sigma_minus


def _point_stencil(order: int, point: float) -> PointStencil:
    r = (order + 1) // 2
    with mpmath.workdps(_DPS):
        rows = _mp_stencil_rows(order, point)
        try:
            weights = _mp_linear_weights(order, point)
            central = False
        except LinearWeightsUndefined:
            LOG.debug("order %d: no linear weights at %.6f, using central candidate", order, point)
            high = _mp_high_order_row(order, point)
            gamma_c = mpmath.mpf(1) / 2
            weights = [gamma_c / r] * r + [gamma_c]
            central_row = [
                (high[w] - sum(weights[k] * rows[k][w] for k in range(r))) / gamma_c
                for w in range(order)
            ]
            rows = rows + [central_row]
            central = True
        candidates = _mp(rows)
        linear = np.array([float(d) for d in weights])
    gamma_plus, gamma_minus, sigma_plus, sigma_minus = _split(linear)
    if sigma_minus > 0:
        LOG.debug("order %d: negative linear weights at %.6f, splitting", order, point)
    for array in (candidates, linear, gamma_plus, gamma_minus):
        array.setflags(write=False)
    return PointStencil(
        point=float(point),
        candidates=candidates,
        linear_weights=linear,
        central=central,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        sigma_plus=sigma_plus,
        sigma_minus=sigma_minus,
    )


@lru_cache(maxsize=None)
def build_workspace(config: WenoConfig) -> WenoWorkspace:
    return WenoWorkspace(
        config=config,
        smoothness_forms=smoothness_forms(config.order),
        high_order_form=high_order_form(config.order),
        stencils=tuple(_point_stencil(config.order, x) for x in config.points),
    )


def stencil_windows(field: np.ndarray, order: int) -> np.ndarray:
    """
    All full p-cell windows of `field`, shape (n - p + 1, p).

    Window j is centered on cell j + r - 1.
    """
    if field.shape[-1] < order:
        raise ConfigError(f"need at least {order} cells, got {field.shape[-1]}")
    return sliding_window_view(field, order, axis=-1)


def _differences(windows: np.ndarray, r: int) -> np.ndarray:
    return windows - windows[..., r - 1 : r]


def smoothness_indicators(cell_averages_window: np.ndarray, order: int) -> np.ndarray:
    """
    Smoothness indicators β_k of the r stencil polynomials.

    Args:
        cell_averages_window (np.ndarray): Shape (..., p).
        order (int): Reconstruction order p.

    Returns:
        np.ndarray: Shape (..., r), non-negative, exactly zero for a constant stencil.
    """
    r = (order + 1) // 2
    diff = _differences(np.asarray(cell_averages_window, dtype=float), r)
    betas = np.einsum("...i,kij,...j->...k", diff, smoothness_forms(order), diff)
    return np.maximum(betas, 0.0)


def _betas(diff: np.ndarray, workspace: WenoWorkspace) -> np.ndarray:
    betas = np.einsum("...i,kij,...j->...k", diff, workspace.smoothness_forms, diff)
    if workspace.needs_high_order_indicator:
        high = np.einsum("...i,ij,...j->...", diff, workspace.high_order_form, diff)
        betas = np.concatenate([betas, high[..., None]], axis=-1)
    return np.maximum(betas, 0.0)


def _nonlinear(gamma: np.ndarray, betas: np.ndarray, epsilon: float) -> np.ndarray:
    alpha = gamma / (betas + epsilon) ** 2
    return alpha / alpha.sum(axis=-1, keepdims=True)


def compute_weights(windows: np.ndarray, workspace: WenoWorkspace) -> WenoWeights:
    diff = _differences(windows, workspace.r)
    betas = _betas(diff, workspace)
    eps = workspace.config.epsilon
    points = []
    for stencil in workspace.stencils:
        m = len(stencil.linear_weights)
        local = betas[..., :m]
        plus = _nonlinear(stencil.gamma_plus, local, eps)
        minus = _nonlinear(stencil.gamma_minus, local, eps) if stencil.split else None
        points.append(PointWeights(omega_plus=plus, omega_minus=minus))
    return WenoWeights(points=tuple(points), betas=betas)


def _check_imposed(weights: WenoWeights, workspace: WenoWorkspace, n_cells: int) -> None:
    if len(weights.points) != len(workspace.stencils):
        raise ConfigError("imposed weights do not match the evaluation points")
    for point, stencil in zip(weights.points, workspace.stencils):
        if point.omega_plus.shape != (n_cells, len(stencil.linear_weights)):
            raise ConfigError("imposed weights do not match the window count")
        if stencil.split != (point.omega_minus is not None):
            raise ConfigError("imposed weights do not match the split structure")


def reconstruct(
    cell_averages_window: np.ndarray,
    workspace: WenoWorkspace,
    imposed_weights: WenoWeights | None = None,
) -> tuple[np.ndarray, WenoWeights]:
    """
    Reconstruct point values at the workspace's evaluation points.

    Args:
        cell_averages_window (np.ndarray): Windows of shape (n_cells, p), e.g. from `stencil_windows`.
        workspace (WenoWorkspace): Precomputed coefficients for order and points.
        imposed_weights (WenoWeights | None): Nonlinear weights computed for another field
            (e.g. the free surface) to be used unchanged for this one.

    Returns:
        tuple[np.ndarray, WenoWeights]: Values of shape (n_cells, n_points) and the weights used.
    """
    windows = np.atleast_2d(np.asarray(cell_averages_window, dtype=float))
    if windows.shape[-1] != workspace.order:
        raise ConfigError(f"windows must have {workspace.order} cells, got {windows.shape[-1]}")
    if imposed_weights is None:
        weights = compute_weights(windows, workspace)
    else:
        _check_imposed(imposed_weights, workspace, windows.shape[0])
        weights = imposed_weights

    center = windows[:, workspace.r - 1]
    diff = _differences(windows, workspace.r)
    values = np.empty((windows.shape[0], len(workspace.stencils)))
    for j, (stencil, point) in enumerate(zip(workspace.stencils, weights.points)):
        deltas = diff @ stencil.candidates.T
        increment = np.sum(point.omega_plus * deltas, axis=-1)
        if stencil.split:
            increment = stencil.sigma_plus * increment - stencil.sigma_minus * np.sum(
                point.omega_minus * deltas, axis=-1
            )
        values[:, j] = center + increment
    return values, weights


def reconstruct_field(
    field: np.ndarray,
    workspace: WenoWorkspace,
    imposed_weights: WenoWeights | None = None,
) -> tuple[np.ndarray, WenoWeights]:
    """Reconstruct every cell of `field` that has a full stencil (cells r-1 .. n-r)."""
    return reconstruct(stencil_windows(field, workspace.order), workspace, imposed_weights)


def workspace_for(order: int, points: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> WenoWorkspace:
    return build_workspace(WenoConfig(order=order, points=tuple(float(x) for x in points), epsilon=epsilon))
