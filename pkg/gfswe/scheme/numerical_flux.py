"""
Interface fluxes: upwinding of the global flux on the Roe-averaged
eigenstructure of the homogeneous system, and the Rusanov flux used by the
classical scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gfswe.scheme.global_flux import GlobalFluxField, physical_flux
from gfswe.scheme.grid_state import Grid, PhysicalParams
from gfswe.util.exceptions import ConfigError, PositivityError


def recover_depth(q_side, K_side, R_side, eta_side, b_side, g: float) -> np.ndarray:
    """
    Invert K = q²/h + g h²/2 + R for h at an interface.

    The cubic g h³/2 - (K - R) h + q² = 0 has one negative and two positive
    roots when q⁴ < 8 (K - R)³ / (27 g); the positive root closer to η - b is
    taken. Outside that region the depth falls back to η - b.

    Raises:
        PositivityError: If the selected depth is not positive.
    """
    arrays = (np.asarray(a, dtype=float) for a in (q_side, K_side, R_side, eta_side, b_side))
    q, k, rr, eta, b = np.broadcast_arrays(*arrays)
    fallback = eta - b
    d = k - rr
    q2 = q * q
    solvable = (d > 0) & (q2 * q2 < 8.0 * d**3 / (27.0 * g))

    with np.errstate(invalid="ignore", divide="ignore"):
        still = np.sqrt(2.0 * d / g)
        p = 2.0 * d / (3.0 * g)
        arg = np.clip(-q2 / (g * p**1.5), -1.0, 1.0)
        theta = np.arccos(arg)
        k_index = np.arange(3).reshape((3,) + (1,) * q.ndim)
        roots = 2.0 * np.sqrt(p) * np.cos((theta + 2.0 * np.pi * k_index) / 3.0)
    distance = np.where(roots > 0, np.abs(roots - fallback), np.inf)
    closest = np.take_along_axis(roots, np.argmin(distance, axis=0)[None, ...], axis=0)[0]

    h = np.where(solvable, np.where(q == 0, still, closest), fallback)
    bad = np.flatnonzero(~(np.ravel(h) > 0))
    if bad.size:
        raise PositivityError(where="interface", cell=int(bad[0]), value=float(np.ravel(h)[bad[0]]))
    return h


@dataclass(frozen=True, eq=False)
class InterfaceTrace:
    """Left/right data at every interface, with recovered depths."""

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
    h_left: np.ndarray
    h_right: np.ndarray


def interface_traces(field: GlobalFluxField, params: PhysicalParams) -> InterfaceTrace:
    g = params.g
    return InterfaceTrace(
        q_left=field.q_left,
        q_right=field.q_right,
        k_left=field.k_left,
        k_right=field.k_right,
        r_left=field.r_left,
        r_right=field.r_right,
        eta_left=field.eta_left,
        eta_right=field.eta_right,
        b_left=field.b_left,
        b_right=field.b_right,
        h_left=recover_depth(field.q_left, field.k_left, field.r_left, field.eta_left, field.b_left, g),
        h_right=recover_depth(field.q_right, field.k_right, field.r_right, field.eta_right, field.b_right, g),
    )


@dataclass(frozen=True, eq=False)
class RoeState:
    h_star: np.ndarray
    u_star: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray

    def left_eigenvectors(self) -> np.ndarray:
        """L with rows l₁, l₂, shape (..., 2, 2); the right eigenvectors are (1, λₖ)."""
        scale = 1.0 / (self.lambda2 - self.lambda1)
        out = np.empty(self.h_star.shape + (2, 2))
        out[..., 0, 0] = self.lambda2 * scale
        out[..., 0, 1] = -scale
        out[..., 1, 0] = -self.lambda1 * scale
        out[..., 1, 1] = scale
        return out

    def positive_mask(self) -> np.ndarray:
        """Diagonal of Λ⁺, shape (..., 2); a zero eigenvalue counts as positive."""
        return np.stack([self.lambda1 >= 0, self.lambda2 >= 0], axis=-1).astype(float)

    def negative_mask(self) -> np.ndarray:
        return 1.0 - self.positive_mask()


def roe_state(h_left, h_right, q_left, q_right, g: float) -> RoeState:
    h_left = np.asarray(h_left, dtype=float)
    h_right = np.asarray(h_right, dtype=float)
    bad = np.flatnonzero(~(np.ravel(h_left) > 0) | ~(np.ravel(h_right) > 0))
    if bad.size:
        i = int(bad[0])
        value = min(float(np.ravel(h_left)[i]), float(np.ravel(h_right)[i]))
        raise PositivityError(where="Roe average", cell=i, value=value)
    sl, sr = np.sqrt(h_left), np.sqrt(h_right)
    h_star = 0.5 * (h_left + h_right)
    u_star = (sl * (q_left / h_left) + sr * (q_right / h_right)) / (sl + sr)
    c = np.sqrt(g * h_star)
    return RoeState(h_star=h_star, u_star=u_star, lambda1=u_star - c, lambda2=u_star + c)


def upwind_global_flux(trace: InterfaceTrace, g: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Ĥ = L⁻¹Λ⁺L G^L + L⁻¹Λ⁻L G^R.

    Written as G^L plus the projection of G^R - G^L onto the characteristic
    fields moving left, so equal traces return G^L bitwise.
    """
    roe = roe_state(trace.h_left, trace.h_right, trace.q_left, trace.q_right, g)
    dq = trace.q_right - trace.q_left
    dk = trace.k_right - trace.k_left

    # one left-moving field: projection onto r₁ = (1, λ₁) along l₁
    amplitude = (roe.lambda2 * dq - dk) / (roe.lambda2 - roe.lambda1)
    mixed_q = trace.q_left + amplitude
    mixed_k = trace.k_left + roe.lambda1 * amplitude

    right_moving = roe.lambda1 >= 0
    left_moving = roe.lambda2 < 0
    h_q = np.where(right_moving, trace.q_left, np.where(left_moving, trace.q_right, mixed_q))
    h_k = np.where(right_moving, trace.k_left, np.where(left_moving, trace.k_right, mixed_k))
    return h_q, h_k


def rusanov_flux(h_left, q_left, h_right, q_right, g: float) -> tuple[np.ndarray, np.ndarray]:
    h_left = np.asarray(h_left, dtype=float)
    h_right = np.asarray(h_right, dtype=float)
    bad = np.flatnonzero(~(np.ravel(h_left) > 0) | ~(np.ravel(h_right) > 0))
    if bad.size:
        i = int(bad[0])
        value = min(float(np.ravel(h_left)[i]), float(np.ravel(h_right)[i]))
        raise PositivityError(where="interface", cell=i, value=value)
    fl1, fl2 = physical_flux(h_left, q_left, g)
    fr1, fr2 = physical_flux(h_right, q_right, g)
    speed = np.maximum(
        np.abs(q_left / h_left) + np.sqrt(g * h_left),
        np.abs(q_right / h_right) + np.sqrt(g * h_right),
    )
    return (
        0.5 * (fl1 + fr1) - 0.5 * speed * (h_right - h_left),
        0.5 * (fl2 + fr2) - 0.5 * speed * (q_right - q_left),
    )


@dataclass(frozen=True, eq=False)
class InterfaceFluxes:
    """Numerical flux at the n_cells + 1 interfaces, one array per equation."""

    mass: np.ndarray
    momentum: np.ndarray


def global_flux_interfaces(field: GlobalFluxField, params: PhysicalParams) -> InterfaceFluxes:
    mass, momentum = upwind_global_flux(interface_traces(field, params), params.g)
    return InterfaceFluxes(mass=mass, momentum=momentum)


def residual(grid: Grid, fluxes: InterfaceFluxes, source: np.ndarray | None = None) -> np.ndarray:
    """
    Semi-discrete right-hand side dU/dt of the interior cells, shape (2, n_cells).

    `source` holds cell-average source terms for schemes that do not fold
    the source into the flux.
    """
    if fluxes.mass.shape[0] != grid.n_cells + 1:
        raise ConfigError(f"expected {grid.n_cells + 1} interface fluxes, got {fluxes.mass.shape[0]}")
    out = np.stack(
        [
            -(fluxes.mass[1:] - fluxes.mass[:-1]) / grid.dx,
            -(fluxes.momentum[1:] - fluxes.momentum[:-1]) / grid.dx,
        ]
    )
    if source is not None:
        out += source
    return out
