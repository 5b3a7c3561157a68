"""Operator actions built on a fiber decomposition.

The operator acts fiberwise: (Tf)(omega, t) = integral of
k(omega, t, s) f(omega, s) ds.  Two equivalent routes are kept side by
side, direct quadrature against the kernel and the spectral series
sum_n lambda_n(omega) <f, x_n>(omega) x_n(omega, t).  Thresholded
projectors, the functional calculus, and the Riemann-Stieltjes sums all
ride on the spectral route; every formula carries the complement term
that accounts for the kernel (null space) of each fiber, where the
operator acts as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import GridMismatch, InvalidMesh
from .fiber import FiberDecomposition
from .grid import (
    OmegaGrid,
    ScalarField,
    Section,
    same_omega_grid,
    same_quadrature,
)
from .kernel import KernelSpec, SampledKernel, SeparableKernel

DEFAULT_TIE_TOL = 1e-12
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class ThresholdField:
    """Measurable threshold lambda(omega) with its tie tolerance.

    An eigenvalue lambda_n(omega) counts as below the threshold when
    lambda_n(omega) <= lambda(omega) + tie_tol, and the null component is
    included when 0 <= lambda(omega) + tie_tol.
    """

    field: ScalarField
    tie_tol: float = DEFAULT_TIE_TOL

    @staticmethod
    def constant(grid: OmegaGrid, value: float, tie_tol: float = DEFAULT_TIE_TOL):
        return ThresholdField(ScalarField.constant(grid, value), tie_tol)


def _require_section_on(d: FiberDecomposition, f: Section):
    if not (same_omega_grid(d.ogrid, f.ogrid) and same_quadrature(d.squad, f.squad)):
        raise GridMismatch("section does not live on the decomposition grids")


def _require_field_on(grid: OmegaGrid, field: ScalarField):
    if not same_omega_grid(grid, field.grid):
        raise GridMismatch("threshold field lives on a different parameter grid")


def apply_quadrature(k: KernelSpec, f: Section) -> Section:
    """Apply the operator by direct quadrature against the kernel."""
    w = f.squad.weights
    if isinstance(k, SeparableKernel):
        basis = k.basis_matrix(f.squad)
        curves = k.curve_matrix(f.ogrid)
        coeff = (f.values * w) @ basis.T
        out = (curves * coeff) @ basis
        return Section(f.ogrid, f.squad, out)
    if not (same_omega_grid(k.ogrid, f.ogrid) and same_quadrature(k.squad, f.squad)):
        raise GridMismatch("section does not live on the sampled kernel grids")
    out = np.einsum("ijl,il->ij", k.values, f.values * w)
    return Section(f.ogrid, f.squad, out)


def apply_spectral(d: FiberDecomposition, f: Section) -> Section:
    """Apply the operator through its retained eigenpairs."""
    _require_section_on(d, f)
    w = d.squad.weights
    out = np.zeros_like(f.values)
    for i in range(d.n_fibers):
        funcs = d.functions[i]
        if funcs.shape[0]:
            coeff = funcs @ (w * f.values[i])
            out[i] = (d.eigenvalues[i] * coeff) @ funcs
    return Section(d.ogrid, d.squad, out)


def projector_apply(d: FiberDecomposition, lam: ThresholdField, f: Section) -> Section:
    """Apply the spectral projector for the threshold field lam.

    Fiberwise it keeps the eigencomponents with lambda_n(omega) <=
    lam(omega) + tie_tol and, whenever 0 <= lam(omega) + tie_tol, also the
    component orthogonal to every retained eigenfunction (the operator's
    null direction, eigenvalue 0).  Thresholds below every eigenvalue and
    0 therefore give the zero section, and thresholds above all of them
    give f back unchanged.
    """
    _require_section_on(d, f)
    _require_field_on(d.ogrid, lam.field)
    w = d.squad.weights
    tie = lam.tie_tol
    out = np.zeros_like(f.values)
    for i in range(d.n_fibers):
        cut = lam.field.values[i] + tie
        include_null = 0.0 <= cut
        funcs = d.functions[i]
        if funcs.shape[0] == 0:
            if include_null:
                out[i] = f.values[i]
            continue
        coeff = funcs @ (w * f.values[i])
        below = d.eigenvalues[i] <= cut
        if include_null:
            drop = ~below
            out[i] = f.values[i]
            if np.any(drop):
                out[i] -= (coeff[drop]) @ funcs[drop]
        else:
            if np.any(below):
                out[i] = (coeff[below]) @ funcs[below]
    return Section(d.ogrid, d.squad, out)


def functional_calculus(
    d: FiberDecomposition,
    g: expr.Expression,
    f: Section,
    epsilon: float = DEFAULT_EPSILON,
) -> Section:
    """Apply g(T) fiberwise: g at the retained eigenvalues plus g(0) on the
    null component.

    g is an expression of lambda and must be evaluable on the spectral
    interval [min m, max M + epsilon]; that is probed at the interval ends
    before any fiber work so domain violations surface early.
    """
    _require_section_on(d, f)
    lo = float(np.min(d.m.values))
    hi = float(np.max(d.M.values)) + epsilon
    expr.evaluate(g, {"lambda": lo})
    expr.evaluate(g, {"lambda": hi})
    g0 = expr.evaluate(g, {"lambda": 0.0})
    w = d.squad.weights
    out = np.zeros_like(f.values)
    for i in range(d.n_fibers):
        funcs = d.functions[i]
        if funcs.shape[0]:
            gvals = np.array(
                [expr.evaluate(g, {"lambda": v}) for v in d.eigenvalues[i]]
            )
            coeff = funcs @ (w * f.values[i])
            out[i] = ((gvals - g0) * coeff) @ funcs
        if g0 != 0.0:
            out[i] += g0 * f.values[i]
    return Section(d.ogrid, d.squad, out)


def riemann_stieltjes_apply(
    d: FiberDecomposition,
    g: expr.Expression,
    f: Section,
    mesh: float,
    epsilon: float = DEFAULT_EPSILON,
) -> Section:
    """Riemann-Stieltjes sum over a uniform partition of thresholds.

    The partition runs c_0 = m* < ... < c_K = M* + epsilon with step at
    most mesh, where m* and M* are the extreme spectral bounds over the
    parameter grid.  The result is

        sum_k g(c_k) (E_{c_k} - E_{c_{k-1}}) f  +  g(m*) E_{m*} f

    with every c_k taken as a constant threshold field.
    """
    _require_section_on(d, f)
    if not (mesh > 0.0) or not math.isfinite(mesh):
        raise InvalidMesh(f"mesh must be a positive real, got {mesh!r}")
    m_star = float(np.min(d.m.values))
    top = float(np.max(d.M.values)) + epsilon
    steps = max(1, int(math.ceil((top - m_star) / mesh)))
    cuts = np.linspace(m_star, top, steps + 1)
    prev = projector_apply(d, ThresholdField.constant(d.ogrid, m_star), f)
    acc = expr.evaluate(g, {"lambda": m_star}) * prev.values
    for c in cuts[1:]:
        cur = projector_apply(d, ThresholdField.constant(d.ogrid, float(c)), f)
        acc = acc + expr.evaluate(g, {"lambda": float(c)}) * (
            cur.values - prev.values
        )
        prev = cur
    return Section(d.ogrid, d.squad, acc)


@dataclass(frozen=True)
class Eigenspace:
    """Per-fiber bases of an eigenvalue field's eigenspace.

    bases[i] holds the quadrature-orthonormal eigenfunction rows whose
    eigenvalue is within tol of lam(omega_i); multiplicity counts them.
    """

    bases: tuple
    multiplicity: ScalarField


def eigenspace(
    d: FiberDecomposition, lam: ThresholdField, tol: float
) -> Eigenspace:
    """Collect the retained eigenfunctions with eigenvalue near lam(omega)."""
    _require_field_on(d.ogrid, lam.field)
    bases = []
    counts = np.zeros(d.n_fibers)
    for i in range(d.n_fibers):
        close = np.abs(d.eigenvalues[i] - lam.field.values[i]) <= tol
        bases.append(d.functions[i][close])
        counts[i] = int(np.count_nonzero(close))
    return Eigenspace(tuple(bases), ScalarField(d.ogrid, counts))
