"""Fiber spectra, mixings of eigenvalue curves, and membership tests.

A partition splits the parameter nodes into labeled sets; the mixed field
takes curve n's eigenvalue on the set labeled n, with label 0 reserved for
the constant zero curve.  A field belongs to the operator's spectrum
exactly when at every node it is within tolerance of the fiber spectrum,
the retained eigenvalues together with 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatch,
    IncompletePartition,
    IndexOutOfRange,
    UnknownCurveLabel,
)
from .fiber import FiberDecomposition
from .grid import OmegaGrid, ScalarField, same_omega_grid


@dataclass(frozen=True)
class Partition:
    """Labeled sets of parameter node indices covering the grid exactly once."""

    n_nodes: int
    sets: tuple  # ((label, (node indices...)), ...)

    def __post_init__(self):
        seen = np.zeros(self.n_nodes, dtype=int)
        norm = []
        for label, indices in self.sets:
            label = int(label)
            if label < 0:
                raise ValueError(f"labels must be non-negative, got {label}")
            idx = tuple(int(i) for i in indices)
            for i in idx:
                if not 0 <= i < self.n_nodes:
                    raise IndexOutOfRange(f"node index {i} outside the grid")
                seen[i] += 1
            norm.append((label, idx))
        if np.any(seen > 1):
            first = int(np.nonzero(seen > 1)[0][0])
            raise IncompletePartition(
                f"node {first} is covered by more than one set"
            )
        if np.any(seen == 0):
            first = int(np.nonzero(seen == 0)[0][0])
            raise IncompletePartition(f"node {first} is not covered by any set")
        object.__setattr__(self, "sets", tuple(norm))

    @staticmethod
    def from_ranges(ogrid: OmegaGrid, entries) -> "Partition":
        """Build from (label, lo, hi) rows; each set takes the nodes with
        lo <= omega < hi."""
        sets = []
        for label, lo, hi in entries:
            picked = np.nonzero((ogrid.nodes >= lo) & (ogrid.nodes < hi))[0]
            sets.append((int(label), tuple(int(i) for i in picked)))
        return Partition(len(ogrid), tuple(sets))

    def labels_by_node(self) -> np.ndarray:
        out = np.zeros(self.n_nodes, dtype=int)
        for label, indices in self.sets:
            for i in indices:
                out[i] = label
        return out


def fiber_spectrum(d: FiberDecomposition, i: int) -> np.ndarray:
    """Spectrum of one fiber: retained eigenvalues and 0, descending."""
    if not 0 <= i < d.n_fibers:
        from .errors import IndexOutOfRange

        raise IndexOutOfRange(f"fiber index {i} outside range [0, {d.n_fibers})")
    vals = np.append(d.eigenvalues[i], 0.0)
    return np.sort(vals)[::-1]


def mix_field(
    d: FiberDecomposition, p: Partition, use_aligned: bool = True
) -> ScalarField:
    """Mix eigenvalue curves over a partition.

    On the set labeled n > 0 the field takes curve n's eigenvalue (aligned
    curve id by default, descending sorted position otherwise); label 0
    contributes the zero curve.  Raises UnknownCurveLabel when a label
    references a curve missing at one of its nodes.
    """
    if p.n_nodes != d.n_fibers:
        raise GridMismatch("partition does not match the decomposition grid")
    values = np.zeros(d.n_fibers)
    for label, indices in p.sets:
        if label == 0:
            continue
        curve = label - 1
        for i in indices:
            if use_aligned:
                hit = np.nonzero(d.labels[i] == curve)[0]
                if hit.size == 0:
                    raise UnknownCurveLabel(
                        f"curve {label} is absent at node {i}"
                    )
                values[i] = d.eigenvalues[i][hit[0]]
            else:
                if curve >= len(d.eigenvalues[i]):
                    raise UnknownCurveLabel(
                        f"curve {label} is absent at node {i}"
                    )
                values[i] = d.eigenvalues[i][curve]
    return ScalarField(d.ogrid, values)


def membership_distances(d: FiberDecomposition, field: ScalarField) -> np.ndarray:
    """Distance from field(omega) to the fiber spectrum at every node."""
    if not same_omega_grid(d.ogrid, field.grid):
        raise GridMismatch("field lives on a different parameter grid")
    out = np.empty(d.n_fibers)
    for i in range(d.n_fibers):
        spec = fiber_spectrum(d, i)
        out[i] = float(np.min(np.abs(spec - field.values[i])))
    return out


def spm_membership(
    d: FiberDecomposition, field: ScalarField, tol: float
) -> tuple:
    """Check whether a field sits inside the fiber spectra everywhere.

    Returns (member, violations) where violations lists (node index,
    distance) for every node whose distance to the fiber spectrum exceeds
    tol.
    """
    distances = membership_distances(d, field)
    violations = [
        (int(i), float(distances[i]))
        for i in range(d.n_fibers)
        if distances[i] > tol
    ]
    return len(violations) == 0, violations
