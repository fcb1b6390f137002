"""
In-cell quadrature rules on the reference cell [0, 1].

Every rule carries, besides nodes and weights, the Lagrange machinery the
scheme needs: the differentiation matrix of the nodal basis, the integration
tableau (partial integrals of each basis function from the left edge up to
each node) and the basis values at both cell edges.

Coefficients are generated once with mpmath at high precision and frozen as
float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from gfswe.util.exceptions import ConfigError

_DPS = 50


class RuleFamily(str, Enum):
    GAUSS_LOBATTO = "gauss_lobatto"
    GAUSS_LEGENDRE = "gauss_legendre"
    EQUISPACED = "equispaced"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Quadrature rule on the reference cell together with its nodal Lagrange basis.

    Attributes:
        family (RuleFamily): Node family the rule was built from.
        nodes (np.ndarray): Reference coordinates in [0, 1], increasing.
        weights (np.ndarray): Quadrature weights, summing to 1.
        differentiation_matrix (np.ndarray): Entry [θ, s] is ℓ'_s at node θ on the reference cell.
            Divide by dx for physical derivatives.
        tableau (np.ndarray): Entry [q, θ] is the integral of ℓ_θ from 0 to node q.
        partial_to_right_edge (np.ndarray): Integral of ℓ_θ over the whole cell (equals `weights`).
        left_edge (np.ndarray): ℓ_θ(0), interpolation row for the left edge.
        right_edge (np.ndarray): ℓ_θ(1), interpolation row for the right edge.
    """

    family: RuleFamily
    nodes: np.ndarray
    weights: np.ndarray
    differentiation_matrix: np.ndarray
    tableau: np.ndarray
    partial_to_right_edge: np.ndarray
    left_edge: np.ndarray
    right_edge: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def includes_edges(self) -> bool:
        return self.nodes[0] == 0.0 and self.nodes[-1] == 1.0

    @property
    def exactness(self) -> int:
        """Highest polynomial degree integrated exactly."""
        n = self.n_nodes
        if self.family is RuleFamily.GAUSS_LOBATTO:
            return 2 * n - 3
        if self.family is RuleFamily.GAUSS_LEGENDRE:
            return 2 * n - 1
        return n - 1 if n % 2 == 0 else n

    def basis(self) -> LagrangeBasis:
        return lagrange_basis(tuple(self.nodes))


class LagrangeBasis:
    """Nodal Lagrange basis ℓ_θ on a fixed set of nodes."""

    nodes: np.ndarray
    _coefficients: np.ndarray

    def __init__(self, nodes: Sequence[float]) -> None:
        self.nodes = np.asarray(nodes, dtype=float)
        with mpmath.workdps(_DPS):
            mp_nodes = [mpmath.mpf(x) for x in nodes]
            self._coefficients = np.array(
                [[float(c) for c in poly] for poly in _basis_polynomials(mp_nodes)]
            )

    def evaluate(self, x: float | np.ndarray) -> np.ndarray:
        """
        Evaluate every basis function at `x`.

        Returns:
            np.ndarray: Shape (n_nodes, *x.shape); row θ holds ℓ_θ(x).
        """
        return np.polynomial.polynomial.polyval(
            np.asarray(x, dtype=float), self._coefficients.T
        )

    def derivative(self, x: float | np.ndarray) -> np.ndarray:
        """Same layout as `evaluate`, for ℓ'_θ(x)."""
        derived = np.polynomial.polynomial.polyder(self._coefficients.T, axis=0)
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), derived)


@lru_cache(maxsize=None)
def lagrange_basis(nodes: tuple[float, ...]) -> LagrangeBasis:
    return LagrangeBasis(nodes)


def _poly_mul(a: list, b: list) -> list:
    out = [mpmath.mpf(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_eval(coefficients: list, x) -> mpmath.mpf:
    acc = mpmath.mpf(0)
    for c in reversed(coefficients):
        acc = acc * x + c
    return acc


def _poly_derivative(coefficients: list) -> list:
    return [k * c for k, c in enumerate(coefficients)][1:] or [mpmath.mpf(0)]


def _poly_primitive(coefficients: list) -> list:
    return [mpmath.mpf(0)] + [c / (k + 1) for k, c in enumerate(coefficients)]


def _basis_polynomials(nodes: list) -> list[list]:
    """Ascending monomial coefficients of each ℓ_θ."""
    polys = []
    for theta, x_theta in enumerate(nodes):
        poly = [mpmath.mpf(1)]
        for k, x_k in enumerate(nodes):
            if k == theta:
                continue
            poly = _poly_mul(poly, [-x_k / (x_theta - x_k), 1 / (x_theta - x_k)])
        polys.append(poly)
    return polys


def _legendre_coefficients(n: int) -> list[Fraction]:
    """Exact ascending coefficients of P_n via Bonnet's recursion."""
    p_prev, p_curr = [Fraction(1)], [Fraction(0), Fraction(1)]
    if n == 0:
        return p_prev
    for k in range(1, n):
        shifted = [Fraction(0)] + p_curr
        nxt = [Fraction(0)] * (k + 2)
        for i, c in enumerate(shifted):
            nxt[i] += Fraction(2 * k + 1, k + 1) * c
        for i, c in enumerate(p_prev):
            nxt[i] -= Fraction(k, k + 1) * c
        p_prev, p_curr = p_curr, nxt
    return p_curr


def _real_roots(coefficients: list[Fraction]) -> list:
    descending = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(coefficients)]
    roots = mpmath.polyroots(descending, maxsteps=200, extraprec=4 * _DPS)
    return sorted(mpmath.re(r) for r in roots)


def _build_rule(family: RuleFamily, mp_nodes: list) -> QuadratureRule:
    polys = _basis_polynomials(mp_nodes)
    primitives = [_poly_primitive(p) for p in polys]
    derivatives = [_poly_derivative(p) for p in polys]

    n = len(mp_nodes)
    weights = [_poly_eval(primitives[t], 1) for t in range(n)]
    tableau = [[_poly_eval(primitives[t], mp_nodes[q]) for t in range(n)] for q in range(n)]
    diff = [[_poly_eval(derivatives[s], mp_nodes[t]) for s in range(n)] for t in range(n)]
    left = [_poly_eval(polys[t], 0) for t in range(n)]
    right = [_poly_eval(polys[t], 1) for t in range(n)]

    def freeze(values) -> np.ndarray:
        array = np.array(values, dtype=object).astype(float)
        array.setflags(write=False)
        return array

    return QuadratureRule(
        family=family,
        nodes=freeze(mp_nodes),
        weights=freeze(weights),
        differentiation_matrix=freeze(diff),
        tableau=freeze(tableau),
        partial_to_right_edge=freeze(weights),
        left_edge=freeze(left),
        right_edge=freeze(right),
    )


@lru_cache(maxsize=None)
def gauss_lobatto(n_nodes: int) -> QuadratureRule:
    """
    Gauss-Lobatto rule with `n_nodes` points, both cell edges included.

    Exact for polynomials of degree 2 * n_nodes - 3; the tableau equals the
    Butcher matrix of the LobattoIIIA method with the same number of stages.
    """
    if n_nodes < 2:
        raise ConfigError(f"Gauss-Lobatto needs at least 2 nodes, got {n_nodes}")
    with mpmath.workdps(_DPS):
        legendre = _legendre_coefficients(n_nodes - 1)
        derivative = [k * c for k, c in enumerate(legendre)][1:]
        interior = _real_roots(derivative) if len(derivative) > 1 else []
        ref = [mpmath.mpf(-1)] + list(interior) + [mpmath.mpf(1)]
        mp_nodes = [(x + 1) / 2 for x in ref]
        mp_nodes[0], mp_nodes[-1] = mpmath.mpf(0), mpmath.mpf(1)
        return _build_rule(RuleFamily.GAUSS_LOBATTO, mp_nodes)


@lru_cache(maxsize=None)
def gauss_legendre(n_nodes: int) -> QuadratureRule:
    """Gauss-Legendre rule with `n_nodes` interior points, exact to degree 2 * n_nodes - 1."""
    if n_nodes < 1:
        raise ConfigError(f"Gauss-Legendre needs at least 1 node, got {n_nodes}")
    with mpmath.workdps(_DPS):
        roots = _real_roots(_legendre_coefficients(n_nodes))
        mp_nodes = [(x + 1) / 2 for x in roots]
        return _build_rule(RuleFamily.GAUSS_LEGENDRE, mp_nodes)


@lru_cache(maxsize=None)
def equispaced(n_intervals: int) -> QuadratureRule:
    """Closed Newton-Cotes rule on n_intervals + 1 equispaced nodes."""
    if n_intervals < 1:
        raise ConfigError(f"need at least 1 interval, got {n_intervals}")
    with mpmath.workdps(_DPS):
        mp_nodes = [mpmath.mpf(m) / n_intervals for m in range(n_intervals + 1)]
        return _build_rule(RuleFamily.EQUISPACED, mp_nodes)


def default_rule(order: int) -> QuadratureRule:
    """Gauss-Lobatto rule with r + 1 nodes for WENO order p = 2r - 1."""
    if order < 1 or order % 2 == 0:
        raise ConfigError(f"reconstruction order must be odd and positive, got {order}")
    return gauss_lobatto((order + 1) // 2 + 1)


def integrate_partial(rule: QuadratureRule, values: np.ndarray, target_node: int) -> float:
    """
    Integral over [0, node_q] of the nodal interpolant of `values`.

    The result lives on the reference cell; callers scale by dx.

    Args:
        rule (QuadratureRule): Rule whose tableau is used.
        values (np.ndarray): One sample per node.
        target_node (int): Index q of the upper integration limit.

    Returns:
        float: Σ_θ I[q, θ] * values[θ].
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != rule.n_nodes:
        raise ConfigError(f"expected {rule.n_nodes} nodal values, got {values.shape[-1]}")
    if not -rule.n_nodes <= target_node < rule.n_nodes:
        raise ConfigError(f"node index {target_node} out of range for {rule.n_nodes} nodes")
    return float(rule.tableau[target_node] @ values)
