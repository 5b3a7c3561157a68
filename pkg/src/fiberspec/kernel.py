"""Kernel declarations and kernel-level checks.

A kernel is either separable, a finite sum of curve(omega) * basis(t) *
basis(s) terms declared through expressions, or sampled, a dense tensor of
node values with one symmetric matrix per parameter node.  Basis terms do
not have to be orthonormal; the per-fiber eigensolver is the ground truth
downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import expr
from .errors import (
    GridMismatch,
    IndexOutOfRange,
    InvalidKernel,
    NotSymmetric,
    RankTooLarge,
)
from .grid import OmegaGrid, SQuadrature, same_omega_grid, same_quadrature

# Sampled tensors may be asymmetric up to this much and still be usable
# after symmetrization; anything worse is rejected.
SYMMETRIZE_TOL = 1e-9
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SeparableKernel:
    """Finite sum of separable terms (curve in omega, basis in t)."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((curve, basis) for curve, basis in self.terms)
        if not terms:
            raise InvalidKernel("a separable kernel needs at least one term")
        for idx, (curve, basis) in enumerate(terms):
            extra = expr.free_variables(curve) - {"omega"}
            if extra:
                raise InvalidKernel(
                    f"term {idx}: curve may only depend on omega, found {sorted(extra)}"
                )
            extra = expr.free_variables(basis) - {"t"}
            if extra:
                raise InvalidKernel(
                    f"term {idx}: basis may only depend on t, found {sorted(extra)}"
                )
        object.__setattr__(self, "terms", terms)

    def curve_matrix(self, ogrid: OmegaGrid) -> np.ndarray:
        """Curve samples, shape (n_omega, n_terms)."""
        out = np.empty((len(ogrid), len(self.terms)))
        for n, (curve, _) in enumerate(self.terms):
            out[:, n] = [
                expr.evaluate(curve, {"omega": node}) for node in ogrid.nodes
            ]
        return out

    def basis_matrix(self, squad: SQuadrature) -> np.ndarray:
        """Basis samples, shape (n_terms, n_s)."""
        out = np.empty((len(self.terms), len(squad)))
        for n, (_, basis) in enumerate(self.terms):
            out[n] = [expr.evaluate(basis, {"t": node}) for node in squad.nodes]
        return out


@dataclass(frozen=True)
class SampledKernel:
    """Dense kernel samples, shape (n_omega, n_s, n_s)."""

    ogrid: OmegaGrid
    squad: SQuadrature
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n_s = len(self.squad)
        if values.shape != (len(self.ogrid), n_s, n_s):
            raise ValueError(
                f"sampled kernel shape {values.shape} does not match grids"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled kernel contains non-finite values")
        object.__setattr__(self, "values", values)


KernelSpec = Union[SeparableKernel, SampledKernel]


def sample_kernel(
    e: expr.Expression,
    ogrid: OmegaGrid,
    squad: SQuadrature,
    symmetrize: bool = True,
) -> SampledKernel:
    """Sample an expression of omega, t, s on the product grid.

    With symmetrize=True the tensor is averaged with its fiberwise
    transpose when the asymmetry is at most SYMMETRIZE_TOL and rejected
    with NotSymmetric otherwise.
    """
    n_omega, n_s = len(ogrid), len(squad)
    values = np.empty((n_omega, n_s, n_s))
    for i, omega in enumerate(ogrid.nodes):
        for j, t in enumerate(squad.nodes):
            for k, s in enumerate(squad.nodes):
                values[i, j, k] = expr.evaluate(
                    e, {"omega": omega, "t": t, "s": s}
                )
    if symmetrize:
        swapped = values.transpose(0, 2, 1)
        asymmetry = float(np.max(np.abs(values - swapped))) if values.size else 0.0
        if asymmetry > SYMMETRIZE_TOL:
            raise NotSymmetric(
                f"sampled kernel asymmetry {asymmetry:.3e} exceeds {SYMMETRIZE_TOL:.0e}"
            )
        values = 0.5 * (values + swapped)
    return SampledKernel(ogrid, squad, values)


def _check_index(i, n, what):
    if not 0 <= i < n:
        raise IndexOutOfRange(f"{what} index {i} outside range [0, {n})")


def fiber_kernel_matrix(
    k: KernelSpec, ogrid: OmegaGrid, squad: SQuadrature, i: int
) -> np.ndarray:
    """Kernel matrix K[j][l] = k(omega_i, t_j, t_l) for one fiber."""
    _check_index(i, len(ogrid), "omega")
    if isinstance(k, SampledKernel):
        if not (same_omega_grid(k.ogrid, ogrid) and same_quadrature(k.squad, squad)):
            raise GridMismatch("sampled kernel was sampled on different grids")
        return k.values[i]
    basis = k.basis_matrix(squad)
    curves = k.curve_matrix(ogrid)[i]
    return (basis.T * curves) @ basis


def kernel_value(
    k: KernelSpec, ogrid: OmegaGrid, squad: SQuadrature, i: int, j: int, l: int
) -> float:
    """Kernel value at the node triple (omega_i, t_j, s_l)."""
    _check_index(i, len(ogrid), "omega")
    _check_index(j, len(squad), "t")
    _check_index(l, len(squad), "s")
    if isinstance(k, SampledKernel):
        if not (same_omega_grid(k.ogrid, ogrid) and same_quadrature(k.squad, squad)):
            raise GridMismatch("sampled kernel was sampled on different grids")
        return float(k.values[i, j, l])
    omega = ogrid.nodes[i]
    t = squad.nodes[j]
    s = squad.nodes[l]
    total = 0.0
    for curve, basis in k.terms:
        total += (
            expr.evaluate(curve, {"omega": omega})
            * expr.evaluate(basis, {"t": t})
            * expr.evaluate(basis, {"t": s})
        )
    return total


def hermitian_check(k: KernelSpec) -> float:
    """Worst asymmetry |k(omega,t,s) - k(omega,s,t)| over grid triples.

    Separable kernels are symmetric by construction, so the result is
    exactly zero without iterating.
    """
    if isinstance(k, SeparableKernel):
        return 0.0
    swapped = k.values.transpose(0, 2, 1)
    if k.values.size == 0:
        return 0.0
    return float(np.max(np.abs(k.values - swapped)))


def psd_check(k: KernelSpec, decomposition, tol: float) -> tuple:
    """Positivity check from the fiber eigenvalues of a decomposition.

    Returns (ok, worst) where worst is the minimum over fibers of the
    lower spectral bound m(omega) and ok means worst >= -tol.
    """
    worst = float(np.min(decomposition.m.values))
    return worst >= -tol, worst


def mercer_reconstruct(decomposition, rank: int) -> SampledKernel:
    """Rebuild kernel samples from the top eigenpairs of every fiber.

    values[i] = sum_{n < rank} lambda_n(omega_i) x_n(omega_i) x_n(omega_i)^T
    in the descending eigenvalue order.  rank must not exceed the retained
    rank of any fiber; rank 0 gives the zero kernel.
    """
    d = decomposition
    if rank < 0:
        raise RankTooLarge(f"rank must be non-negative, got {rank}")
    min_rank = int(min(len(vals) for vals in d.eigenvalues))
    if rank > min_rank:
        raise RankTooLarge(
            f"rank {rank} exceeds the minimum retained rank {min_rank}"
        )
    n_omega, n_s = len(d.ogrid), len(d.squad)
    values = np.zeros((n_omega, n_s, n_s))
    for i in range(n_omega):
        funcs = d.functions[i][:rank]
        vals = d.eigenvalues[i][:rank]
        block = (funcs.T * vals) @ funcs
        values[i] = 0.5 * (block + block.T)
    return SampledKernel(d.ogrid, d.squad, values)
