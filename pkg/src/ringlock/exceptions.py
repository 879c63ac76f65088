"""Exception types raised by ringlock."""

from __future__ import annotations


class RingLockError(Exception):
    """Base class for all ringlock errors."""


class ConfigurationError(RingLockError, ValueError):
    """Unsupported degree, formulation, branch or mesh size."""


class DegeneratePencilError(RingLockError, ArithmeticError):
    """A 2x2 block with zero trace but nonzero determinant."""


class AmplitudeRatioPoleError(RingLockError, ArithmeticError):
    """lambda equals the top-left block entry while the coupling is nonzero."""


class UndefinedAmplitudeRatioError(RingLockError, ArithmeticError):
    """lambda equals the top-left entry and the coupling vanishes (pure-u mode)."""


class AssemblyError(RingLockError, ArithmeticError):
    """A Gram-type circulant eigenvalue that must be positive is not."""


class DomainError(RingLockError, ArithmeticError):
    """Negative radicand beyond round-off in a square root."""


class OracleError(RingLockError, ArithmeticError):
    """The dense reference eigensolver could not proceed."""


class UnconvergedProxyWarning(RuntimeWarning):
    """Large-N reference curve drifted between N_ref/2 and N_ref."""


class ClosedFormUnavailableError(RingLockError, NotImplementedError):
    """No closed-form refinement limit exists for this formulation."""
