"""Spectral analysis of membrane locking in spline discretizations of a thin ring.

The standard and mixed Galerkin discretizations on uniform periodic splines
produce block-circulant matrices, so the full spectrum follows from one 2x2
problem per Fourier mode. The package computes exact coefficient tables,
continuum and discrete spectra, refinement limits and a log-distance
locking criterion.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .analytic import (
    BRANCHES,
    MINUS,
    PLUS,
    RingParams,
    analytic_eigenvalues,
    analytic_invariants,
    analytic_L2,
    analytic_ratio,
    sample_mode,
    transition_mode,
)
from .bspline import (
    FORMULATIONS,
    MIXED,
    STANDARD,
    SUPPORTED_DEGREES,
    CoefficientTable,
    Stencil,
    build_table,
    cardinal_bspline,
    inner_product_coefficient,
    verify_tables,
)
from .circulant import Block2x2, CirculantSpec, circulant_eigenvalue, circulant_eigenvalues, decouple_2x2
from .discrete import (
    Discretization,
    DiscreteSpectrum,
    assemble_dense,
    dense_oracle,
    discrete_spectrum,
    isolated_discrete_spectrum,
)
from .exceptions import (
    AmplitudeRatioPoleError,
    AssemblyError,
    ClosedFormUnavailableError,
    ConfigurationError,
    DegeneratePencilError,
    DomainError,
    OracleError,
    RingLockError,
    UndefinedAmplitudeRatioError,
    UnconvergedProxyWarning,
)
from .locking import (
    SAME_BRANCH,
    SAME_CLASS,
    LockingReport,
    asymptotic_limit,
    asymptotic_limit_numeric,
    branch_errors,
    error_landscape,
    isolated_bending_error,
    isolated_membrane_error,
    locking_report,
    relative_error_exact,
    relative_error_ibar,
    shared_grid_counts,
)
