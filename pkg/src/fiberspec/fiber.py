"""Per-fiber eigenanalysis of a kernel on the product grid.

Every parameter node gets the symmetrized collocation matrix

    A[j][l] = sqrt(w_j) * k(omega_i, t_j, t_l) * sqrt(w_l)

whose eigenvectors v recover quadrature-orthonormal eigenfunction values
x_n(t_j) = v_n[j] / sqrt(w_j).  Eigenpairs come from a cyclic Jacobi
solver implemented here; the matrices are small and dense, and rotations
converge quadratically once the off-diagonal mass is small.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotSymmetric
from .grid import OmegaGrid, ScalarField, SQuadrature
from .kernel import KernelSpec, fiber_kernel_matrix

DEFAULT_EIG_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-10
MAX_SWEEPS = 64
# Eigenvalues closer than this are treated as one degenerate block when
# aligning curves across the parameter grid.
DEGENERACY_TOL = 1e-10


def _sweep_loops(A, V, skip_below):
    """One cyclic-by-row pass of Jacobi rotations over all p < q pairs."""
    n = A.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = A[p, q]
            if abs(apq) <= skip_below:
                continue
            app = A[p, p]
            aqq = A[q, q]
            diff = aqq - app
            if abs(apq) < 1e-36 * abs(diff):
                t = apq / diff
            else:
                theta = diff / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for i in range(n):
                aip = A[i, p]
                aiq = A[i, q]
                A[i, p] = c * aip - s * aiq
                A[i, q] = s * aip + c * aiq
            for i in range(n):
                api = A[p, i]
                aqi = A[q, i]
                A[p, i] = c * api - s * aqi
                A[q, i] = s * api + c * aqi
            A[p, q] = 0.0
            A[q, p] = 0.0
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            for i in range(n):
                vip = V[i, p]
                viq = V[i, q]
                V[i, p] = c * vip - s * viq
                V[i, q] = s * vip + c * viq


def _sweep_numpy(A, V, skip_below):
    """Same pass with vectorized row and column updates."""
    n = A.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = A[p, q]
            if abs(apq) <= skip_below:
                continue
            app = A[p, p]
            aqq = A[q, q]
            diff = aqq - app
            if abs(apq) < 1e-36 * abs(diff):
                t = apq / diff
            else:
                theta = diff / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            col_p = c * A[:, p] - s * A[:, q]
            col_q = s * A[:, p] + c * A[:, q]
            A[:, p] = col_p
            A[:, q] = col_q
            row_p = c * A[p, :] - s * A[q, :]
            row_q = s * A[p, :] + c * A[q, :]
            A[p, :] = row_p
            A[q, :] = row_q
            A[p, q] = 0.0
            A[q, p] = 0.0
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            vcol_p = c * V[:, p] - s * V[:, q]
            vcol_q = s * V[:, p] + c * V[:, q]
            V[:, p] = vcol_p
            V[:, q] = vcol_q


try:
    from numba import njit
except ImportError:
    njit = None

if njit is not None:
    _sweep = njit(cache=True, nogil=True)(_sweep_loops)
else:
    _sweep = _sweep_numpy


def _off_norm(A):
    # summed directly over the off-diagonal entries; subtracting the
    # diagonal mass from the total would cancel catastrophically once the
    # remainder is near machine precision
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return math.sqrt(float(np.sum(off * off)))


def jacobi_eigh(a, tol: float = DEFAULT_EIG_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the Frobenius norm of the off-diagonal part drops to
    tol times the Frobenius norm of the input.  Returns (eigenvalues,
    eigenvectors) with eigenvalues sorted descending and eigenvectors as
    the matching orthonormal columns.  Raises NotSymmetric when the input
    is asymmetric beyond 1e-12 and NoConvergence when the sweep budget
    runs out.
    """
    A = np.array(a, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("input must be a square matrix")
    n = A.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    asymmetry = float(np.max(np.abs(A - A.T)))
    if asymmetry > 1e-12:
        raise NotSymmetric(f"matrix asymmetry {asymmetry:.3e} exceeds 1e-12")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    anorm = float(np.sqrt(np.sum(A * A)))
    if anorm == 0.0 or n == 1:
        vals = np.diag(A).copy()
    else:
        skip_below = tol * anorm * 1e-2 / (n * n)
        converged = False
        for _ in range(max_sweeps):
            if _off_norm(A) <= tol * anorm:
                converged = True
                break
            _sweep(A, V, skip_below)
        else:
            converged = _off_norm(A) <= tol * anorm
        if not converged:
            raise NoConvergence(
                f"Jacobi sweeps exhausted ({max_sweeps}) before reaching "
                f"relative off-diagonal mass {tol:.0e}"
            )
        vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order]


def assemble_fiber_matrix(
    k: KernelSpec, ogrid: OmegaGrid, squad: SQuadrature, i: int
) -> np.ndarray:
    """Symmetrized collocation matrix of one fiber."""
    K = fiber_kernel_matrix(k, ogrid, squad, i)
    sw = np.sqrt(squad.weights)
    A = sw[:, None] * K * sw[None, :]
    return 0.5 * (A + A.T)


def extract_eigenfunctions(vectors: np.ndarray, squad: SQuadrature) -> np.ndarray:
    """Eigenfunction node values from eigenvector columns.

    Returns one row per mode: x_n(t_j) = v_n[j] / sqrt(w_j), which keeps
    the family orthonormal in the quadrature inner product.
    """
    sw = np.sqrt(squad.weights)
    return (vectors / sw[:, None]).T


@dataclass(frozen=True)
class FiberDecomposition:
    """Retained eigenpairs of every fiber plus alignment and bounds.

    eigenvalues[i] is descending; functions[i] holds the matching
    quadrature-orthonormal eigenfunction rows; labels[i] maps each sorted
    position to its aligned curve id.  traces and eigensums keep the trace
    of the assembled matrix and the sum of all its eigenvalues before
    truncation.  m and M are the fiberwise spectral bounds min(0, lambda_min)
    and max(0, lambda_max).
    """

    ogrid: OmegaGrid
    squad: SQuadrature
    eigenvalues: tuple
    functions: tuple
    labels: tuple
    traces: np.ndarray
    eigensums: np.ndarray
    m: ScalarField
    M: ScalarField
    rank_tol: float

    @property
    def n_fibers(self) -> int:
        return len(self.ogrid)

    @property
    def ranks(self) -> np.ndarray:
        return np.array([len(vals) for vals in self.eigenvalues], dtype=int)

    @property
    def num_curves(self) -> int:
        top = [int(lab.max()) for lab in self.labels if lab.size]
        return max(top) + 1 if top else 0

    def aligned_curve(self, curve_id: int) -> np.ndarray:
        """Eigenvalues of one aligned curve over the parameter grid.

        Fibers where the curve is absent get nan.
        """
        out = np.full(self.n_fibers, np.nan)
        for i, lab in enumerate(self.labels):
            hit = np.nonzero(lab == curve_id)[0]
            if hit.size:
                out[i] = self.eigenvalues[i][hit[0]]
        return out


def _sign_fix(functions: np.ndarray) -> np.ndarray:
    for row in functions:
        if row.size:
            peak = int(np.argmax(np.abs(row)))
            if row[peak] < 0:
                row *= -1.0
    return functions


def _align_labels(eigenvalues, functions, weights, degeneracy_tol=DEGENERACY_TOL):
    """Greedy eigenvector matching between consecutive fibers.

    Pairs are taken in order of decreasing overlap magnitude with ties
    broken by lower index; curves absent at a fiber keep their ids free,
    and curves that appear get fresh ids.  Near-degenerate eigenvalues are
    relabeled as a block, in descending order, because their individual
    eigenvectors are arbitrary within the eigenspace.
    """
    n_fibers = len(eigenvalues)
    labels = []
    if n_fibers == 0:
        return labels
    r0 = len(eigenvalues[0])
    labels.append(np.arange(r0, dtype=int))
    next_id = r0
    for i in range(1, n_fibers):
        prev_funcs = functions[i - 1]
        cur_funcs = functions[i]
        r_prev, r_cur = prev_funcs.shape[0], cur_funcs.shape[0]
        assigned = np.full(r_cur, -1, dtype=int)
        if r_prev and r_cur:
            overlap = np.abs(prev_funcs @ (weights * cur_funcs).T)
            pairs = sorted(
                ((n, m) for n in range(r_prev) for m in range(r_cur)),
                key=lambda nm: (-overlap[nm[0], nm[1]], nm[0], nm[1]),
            )
            used_prev = np.zeros(r_prev, dtype=bool)
            for n, m in pairs:
                if used_prev[n] or assigned[m] >= 0:
                    continue
                used_prev[n] = True
                assigned[m] = labels[i - 1][n]
        for m in range(r_cur):
            if assigned[m] < 0:
                assigned[m] = next_id
                next_id += 1
        vals = eigenvalues[i]
        start = 0
        for stop in range(1, r_cur + 1):
            if stop == r_cur or vals[stop - 1] - vals[stop] >= degeneracy_tol:
                if stop - start > 1:
                    block_ids = np.sort(assigned[start:stop])
                    assigned[start:stop] = block_ids
                start = stop
        labels.append(assigned)
    return labels


def _decompose_one(k, ogrid, squad, i, rank_tol, eig_tol):
    A = assemble_fiber_matrix(k, ogrid, squad, i)
    trace = float(np.trace(A))
    vals, vecs = jacobi_eigh(A, tol=eig_tol)
    eigensum = float(vals.sum())
    scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 0.0)
    keep = np.abs(vals) > rank_tol * scale
    vals = vals[keep]
    funcs = _sign_fix(extract_eigenfunctions(vecs[:, keep], squad))
    return vals, funcs, trace, eigensum


def decompose_all_fibers(
    k: KernelSpec,
    ogrid: OmegaGrid,
    squad: SQuadrature,
    rank_tol: float = DEFAULT_RANK_TOL,
    eig_tol: float = DEFAULT_EIG_TOL,
    threads: int = 1,
) -> FiberDecomposition:
    """Decompose every fiber, truncate by rank_tol, and align the curves.

    Eigenvalues with |lambda| <= rank_tol * max(1, |lambda|_max(omega)) are
    dropped.  The eigenfunction sign convention makes the component of
    largest magnitude positive; ties inside degenerate blocks are resolved
    during alignment.  threads > 1 decomposes fibers concurrently with
    identical results.
    """
    n = len(ogrid)
    work = lambda i: _decompose_one(k, ogrid, squad, i, rank_tol, eig_tol)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(n)))
    else:
        results = [work(i) for i in range(n)]
    eigenvalues = tuple(r[0] for r in results)
    functions = tuple(r[1] for r in results)
    traces = np.array([r[2] for r in results])
    eigensums = np.array([r[3] for r in results])
    labels = tuple(_align_labels(eigenvalues, functions, squad.weights))
    m_vals = np.array(
        [min(0.0, float(v.min())) if v.size else 0.0 for v in eigenvalues]
    )
    M_vals = np.array(
        [max(0.0, float(v.max())) if v.size else 0.0 for v in eigenvalues]
    )
    return FiberDecomposition(
        ogrid=ogrid,
        squad=squad,
        eigenvalues=eigenvalues,
        functions=functions,
        labels=labels,
        traces=traces,
        eigensums=eigensums,
        m=ScalarField(ogrid, m_vals),
        M=ScalarField(ogrid, M_vals),
        rank_tol=rank_tol,
    )


def align_curves(d: FiberDecomposition) -> tuple:
    """Recompute the aligned curve labeling of a decomposition."""
    return tuple(_align_labels(d.eigenvalues, d.functions, d.squad.weights))


def spectral_bounds(d: FiberDecomposition) -> tuple:
    """Fiberwise lower and upper spectral bounds (both keep 0 in range)."""
    return d.m, d.M
