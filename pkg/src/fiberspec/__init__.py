"""Fiberwise spectral calculus for partially integral operators.

The operator T acts on sections f(omega, .) of [0,1] x [0,1] one fiber at
a time: (Tf)(omega, t) = integral of k(omega, t, s) f(omega, s) ds.  This
package decomposes each fiber of a symmetric kernel into eigenvalue curves
and eigenfunctions, builds the threshold projector family, evaluates
continuous functions of the operator, and checks spectral membership of
mixed eigenvalue fields.
"""

from .calculus import (
    Eigenspace,
    ThresholdField,
    apply_quadrature,
    apply_spectral,
    eigenspace,
    functional_calculus,
    projector_apply,
    riemann_stieltjes_apply,
)
from .config import Config, Tolerances, decompose, load_config
from .errors import (
    ConfigError,
    DomainError,
    ExpressionSyntaxError,
    FiberspecError,
    GridMismatch,
    IncompletePartition,
    IndexOutOfRange,
    InvalidCount,
    InvalidKernel,
    InvalidMesh,
    InvalidQuadratureRule,
    MissingBinding,
    NoConvergence,
    NotSymmetric,
    RankTooLarge,
    UnknownCurveLabel,
    UnknownIdentifier,
)
from .expr import evaluate, free_variables, parse, to_source
from .fiber import (
    FiberDecomposition,
    align_curves,
    assemble_fiber_matrix,
    decompose_all_fibers,
    extract_eigenfunctions,
    jacobi_eigh,
    spectral_bounds,
)
from .grid import (
    OmegaGrid,
    ScalarField,
    Section,
    SQuadrature,
    build_omega_grid,
    build_s_quadrature,
    fiber_inner_product,
    fiber_norm_field,
    l22_norm,
    sample_field,
    sample_section,
)
from .kernel import (
    SampledKernel,
    SeparableKernel,
    fiber_kernel_matrix,
    hermitian_check,
    kernel_value,
    mercer_reconstruct,
    psd_check,
    sample_kernel,
)
from .spectrum import (
    Partition,
    fiber_spectrum,
    membership_distances,
    mix_field,
    spm_membership,
)

__version__ = "0.1.0"

__all__ = [
    "Config",
    "ConfigError",
    "DomainError",
    "Eigenspace",
    "ExpressionSyntaxError",
    "FiberDecomposition",
    "FiberspecError",
    "GridMismatch",
    "IncompletePartition",
    "IndexOutOfRange",
    "InvalidCount",
    "InvalidKernel",
    "InvalidMesh",
    "InvalidQuadratureRule",
    "MissingBinding",
    "NoConvergence",
    "NotSymmetric",
    "OmegaGrid",
    "Partition",
    "RankTooLarge",
    "SQuadrature",
    "SampledKernel",
    "ScalarField",
    "Section",
    "SeparableKernel",
    "ThresholdField",
    "Tolerances",
    "UnknownCurveLabel",
    "UnknownIdentifier",
    "align_curves",
    "apply_quadrature",
    "apply_spectral",
    "assemble_fiber_matrix",
    "build_omega_grid",
    "build_s_quadrature",
    "decompose",
    "decompose_all_fibers",
    "eigenspace",
    "evaluate",
    "extract_eigenfunctions",
    "fiber_inner_product",
    "fiber_kernel_matrix",
    "fiber_norm_field",
    "fiber_spectrum",
    "free_variables",
    "functional_calculus",
    "hermitian_check",
    "jacobi_eigh",
    "kernel_value",
    "l22_norm",
    "load_config",
    "membership_distances",
    "mercer_reconstruct",
    "mix_field",
    "parse",
    "projector_apply",
    "psd_check",
    "riemann_stieltjes_apply",
    "sample_field",
    "sample_kernel",
    "sample_section",
    "spectral_bounds",
    "spm_membership",
    "to_source",
]
