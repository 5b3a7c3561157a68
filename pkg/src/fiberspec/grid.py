"""Grids, quadratures, and fields on the product of the parameter interval
and the integration interval (both [0, 1]).

The parameter grid carries the midpoint rule, so its weights model a
probability measure.  The inner-product helpers implement the fiberwise
pairing <x, y>(omega) = sum_j w_j x(omega, t_j) y(omega, t_j) and the norm
built by integrating it over the parameter grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import (
    DomainError,
    GridMismatch,
    InvalidCount,
    InvalidQuadratureRule,
)

_WEIGHT_SUM_TOL = 1e-9


def _require_1d_float(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one dimensional")
    return arr


@dataclass(frozen=True)
class OmegaGrid:
    """Nodes and weights over the parameter interval; weights sum to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = _require_1d_float(self.nodes, "nodes")
        weights = _require_1d_float(self.weights, "weights")
        if nodes.size == 0 or nodes.size != weights.size:
            raise ValueError("nodes and weights must be non-empty and equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < 0.0 or nodes[-1] > 1.0:
            raise ValueError("nodes must lie in [0, 1]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to one")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size


@dataclass(frozen=True)
class SQuadrature:
    """Quadrature over the integration interval; weights sum to one."""

    rule: str
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = _require_1d_float(self.nodes, "nodes")
        weights = _require_1d_float(self.weights, "weights")
        if nodes.size == 0 or nodes.size != weights.size:
            raise ValueError("nodes and weights must be non-empty and equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < 0.0 or nodes[-1] > 1.0:
            raise ValueError("nodes must lie in [0, 1]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to one")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size


def build_omega_grid(n: int) -> OmegaGrid:
    """Midpoint rule with n cells: nodes (i + 1/2)/n, weights 1/n."""
    if n < 1:
        raise InvalidCount(f"parameter grid needs at least 1 node, got {n}")
    nodes = (np.arange(n) + 0.5) / n
    weights = np.full(n, 1.0 / n)
    return OmegaGrid(nodes, weights)


def build_s_quadrature(rule: str, n: int) -> SQuadrature:
    """Construct a quadrature over [0, 1].

    trapezoid: n >= 2 uniform nodes including both endpoints, endpoint
    weights halved.  gauss_legendre: n >= 1 Legendre roots and weights
    affinely mapped from [-1, 1] to [0, 1].
    """
    if rule == "trapezoid":
        if n < 2:
            raise InvalidCount(f"trapezoid rule needs at least 2 nodes, got {n}")
        nodes = np.linspace(0.0, 1.0, n)
        h = 1.0 / (n - 1)
        weights = np.full(n, h)
        weights[0] = h / 2
        weights[-1] = h / 2
        return SQuadrature(rule, nodes, weights)
    if rule == "gauss_legendre":
        if n < 1:
            raise InvalidCount(f"gauss_legendre rule needs at least 1 node, got {n}")
        x, w = np.polynomial.legendre.leggauss(n)
        return SQuadrature(rule, (x + 1.0) / 2.0, w / 2.0)
    raise InvalidQuadratureRule(f"unknown quadrature rule {rule!r}")


@dataclass(frozen=True)
class ScalarField:
    """Real values attached to the parameter grid nodes."""

    grid: OmegaGrid
    values: np.ndarray

    def __post_init__(self):
        values = _require_1d_float(self.values, "values")
        if values.size != len(self.grid):
            raise ValueError("field length must match the grid")
        if not np.all(np.isfinite(values)):
            raise DomainError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    @staticmethod
    def constant(grid: OmegaGrid, value: float) -> "ScalarField":
        return ScalarField(grid, np.full(len(grid), float(value)))


@dataclass(frozen=True)
class Section:
    """Node values of a function on the product grid, one row per fiber."""

    ogrid: OmegaGrid
    squad: SQuadrature
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.ogrid), len(self.squad)):
            raise ValueError(
                f"section shape {values.shape} does not match grids "
                f"({len(self.ogrid)}, {len(self.squad)})"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("section contains non-finite values")
        object.__setattr__(self, "values", values)


def same_omega_grid(a: OmegaGrid, b: OmegaGrid) -> bool:
    return a is b or (
        np.array_equal(a.nodes, b.nodes) and np.array_equal(a.weights, b.weights)
    )


def same_quadrature(a: SQuadrature, b: SQuadrature) -> bool:
    return a is b or (
        np.array_equal(a.nodes, b.nodes) and np.array_equal(a.weights, b.weights)
    )


def require_matching_sections(x: Section, y: Section):
    if not (same_omega_grid(x.ogrid, y.ogrid) and same_quadrature(x.squad, y.squad)):
        raise GridMismatch("sections live on different grids")


def sample_field(e: expr.Expression, grid: OmegaGrid) -> ScalarField:
    """Evaluate an expression of omega at every parameter node."""
    values = np.array(
        [expr.evaluate(e, {"omega": node}) for node in grid.nodes], dtype=float
    )
    return ScalarField(grid, values)


def sample_section(
    e: expr.Expression, ogrid: OmegaGrid, squad: SQuadrature
) -> Section:
    """Evaluate an expression of omega and t at every product node."""
    values = np.empty((len(ogrid), len(squad)))
    for i, omega in enumerate(ogrid.nodes):
        for j, t in enumerate(squad.nodes):
            values[i, j] = expr.evaluate(e, {"omega": omega, "t": t})
    return Section(ogrid, squad, values)


def fiber_inner_product(x: Section, y: Section) -> ScalarField:
    """Pointwise-in-omega quadrature pairing of two sections."""
    require_matching_sections(x, y)
    values = (x.values * y.values) @ x.squad.weights
    return ScalarField(x.ogrid, values)


def fiber_norm_field(x: Section) -> ScalarField:
    """Square root of the fiberwise pairing of a section with itself."""
    ip = fiber_inner_product(x, x)
    return ScalarField(x.ogrid, np.sqrt(np.maximum(ip.values, 0.0)))


def l22_norm(x: Section) -> float:
    """Norm that integrates the squared fiber norms over the parameter grid."""
    ip = (x.values * x.values) @ x.squad.weights
    return float(np.sqrt(max(float(ip @ x.ogrid.weights), 0.0)))
