"""Circulant eigenvalues and 2x2 pencils with commuting diagonal blocks.

A circulant matrix with first row ``c_0, ..., c_{N-1}`` has the Fourier
vectors ``v_j = (1, w^j, w^{2j}, ...)/sqrt(N)``, ``w = exp(2 pi i/N)``, as
eigenvectors, with eigenvalue ``sum_k c_k w^{kj}``. Coupling two such
matrices in a 2x2 block system reduces the full problem to one 2x2
eigenproblem per Fourier mode.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping

import numpy as np

from .exceptions import (
    AmplitudeRatioPoleError,
    DegeneratePencilError,
    DomainError,
    UndefinedAmplitudeRatioError,
)

SYMMETRIC = "symmetric"
SKEW = "skew-symmetric"
GENERAL = "general"
_SYMMETRIES = (SYMMETRIC, SKEW, GENERAL)

# clamp window for 1 - M/K^2 slightly below zero
RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class CirculantSpec:
    """First row of an ``N x N`` circulant matrix with exact coefficients.

    Only nonzero entries are stored (``stencil`` maps column offset
    ``0 <= k < N`` to ``c_k``); :attr:`coeffs` expands the full row.
    """

    size: int
    stencil: Mapping[int, Fraction]
    symmetry: str = GENERAL

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"circulant size must be positive, got {self.size}")
        if self.symmetry not in _SYMMETRIES:
            raise ValueError(f"unknown symmetry tag {self.symmetry!r}")
        clean = {}
        for k, c in self.stencil.items():
            if not 0 <= k < self.size:
                raise ValueError(f"offset {k} outside 0..{self.size - 1}")
            c = Fraction(c)
            if c:
                clean[k] = c
        object.__setattr__(self, "stencil", dict(sorted(clean.items())))
        n = self.size
        c = self.stencil
        if self.symmetry == SYMMETRIC:
            ok = all(c.get(k, 0) == c.get((n - k) % n, 0) for k in c)
        elif self.symmetry == SKEW:
            ok = 0 not in c and all(c[k] == -c.get((n - k) % n, 0) for k in c)
        else:
            ok = True
        if not ok:
            raise ValueError(f"coefficients are not {self.symmetry}")

    @classmethod
    def from_row(cls, coeffs, symmetry: str = GENERAL) -> "CirculantSpec":
        coeffs = list(coeffs)
        return cls(len(coeffs), dict(enumerate(coeffs)), symmetry)

    @classmethod
    def from_offsets(cls, size: int, offsets: Mapping[int, Fraction], symmetry: str = GENERAL):
        """Build from signed offsets, summing entries that alias mod ``size``."""
        row: dict[int, Fraction] = {}
        for k, c in offsets.items():
            row[k % size] = row.get(k % size, Fraction(0)) + Fraction(c)
        return cls(size, row, symmetry)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        zero = Fraction(0)
        return tuple(self.stencil.get(k, zero) for k in range(self.size))

    @cached_property
    def _float_terms(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.array(list(self.stencil), dtype=np.int64)
        cs = np.array([float(c) for c in self.stencil.values()])
        return ks, cs

    @property
    def abs_sum(self) -> float:
        return float(sum(abs(c) for c in self.stencil.values()))

    def dense(self) -> np.ndarray:
        """Assemble the full matrix ``C[i, j] = c_{(j - i) mod N}``."""
        n = self.size
        first = np.array([float(c) for c in self.coeffs])
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return first[idx]


def circulant_eigenvalue(spec: CirculantSpec, j: int) -> complex:
    """Eigenvalue of the circulant matrix belonging to Fourier mode ``j``.

    Symmetric specs use the cosine sum (real result), skew-symmetric specs
    the sine sum (purely imaginary result).
    """
    if not 0 <= j < spec.size:
        raise IndexError(f"mode index {j} outside 0..{spec.size - 1}")
    return complex(circulant_eigenvalues(spec, np.array([j]))[0])


def circulant_eigenvalues(spec: CirculantSpec, modes=None) -> np.ndarray:
    """Vectorised :func:`circulant_eigenvalue` over ``modes`` (default: all)."""
    n = spec.size
    modes = np.arange(n) if modes is None else np.asarray(modes, dtype=np.int64)
    if modes.size and (modes.min() < 0 or modes.max() >= n):
        raise IndexError(f"mode index outside 0..{n - 1}")
    ks, cs = spec._float_terms
    # reduce k*j mod N in integers so the angle stays accurate for large N
    phase = 2.0 * np.pi * ((ks[None, :] * modes[:, None]) % n) / n
    if spec.symmetry == SYMMETRIC:
        return (np.cos(phase) @ cs).astype(complex)
    if spec.symmetry == SKEW:
        return 1j * (np.sin(phase) @ cs)
    return np.exp(1j * phase) @ cs


@dataclass(frozen=True)
class Block2x2:
    """Entries of ``[[a, b], [c, d]]`` for one Fourier mode."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def hermitian(cls, a: float, b: complex, d: float) -> "Block2x2":
        return cls(a, b, complex(b).conjugate(), d)

    def dense(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


@dataclass(frozen=True)
class EigenPair2x2:
    lambda_plus: float
    lambda_minus: float
    K: float
    M: float
    L: float


def _real(z: complex, scale: float, what: str) -> float:
    z = complex(z)
    if abs(z.imag) > 1e-10 * max(scale, 1e-300):
        raise ValueError(f"{what} has a non-negligible imaginary part: {z}")
    return z.real


def stable_sqrt_radicand(x: float) -> float:
    """``sqrt(x)`` with small negative round-off clamped to zero."""
    if x < 0.0:
        if x < -RADICAND_TOL:
            raise DomainError(f"negative radicand {x:.3e}")
        return 0.0
    return math.sqrt(x)


def decouple_2x2(block: Block2x2, det: float | None = None) -> EigenPair2x2:
    """Eigenvalues ``K (1 +- L)`` of a 2x2 Hermitian block.

    ``K = (a + d)/2``, ``M = a d - c b`` and ``L = sqrt(1 - M/K^2)``. The minus
    root is evaluated as ``M / lambda_plus`` which avoids cancellation when
    ``M << K^2``. Callers that know ``M`` in a cancellation-free form pass it
    as ``det``. Without ``det`` the radicand comes from
    ``K^2 L^2 = ((a - d)/2)^2 + c b``, which stays accurate for nearly equal
    eigenvalues.
    """
    scale = abs(block.a) + abs(block.d) + abs(block.b) + abs(block.c)
    K = _real((block.a + block.d) / 2, scale, "trace")
    if det is None:
        M = _real(block.a * block.d - block.c * block.b, scale * scale, "determinant")
        gap = _real(((block.a - block.d) / 2) ** 2 + block.c * block.b, scale * scale, "discriminant")
    else:
        M = float(det)
    if K == 0.0:
        if M != 0.0:
            raise DegeneratePencilError("K = 0 with nonzero determinant")
        return EigenPair2x2(0.0, 0.0, 0.0, 0.0, 0.0)
    if det is None:
        L = stable_sqrt_radicand(gap / (K * K))
    else:
        L = stable_sqrt_radicand(1.0 - M / (K * K))
    lam_plus = K * (1.0 + L)
    lam_minus = M / lam_plus if lam_plus != 0.0 else K * (1.0 - L)
    if lam_plus < lam_minus:
        lam_plus, lam_minus = lam_minus, lam_plus
    return EigenPair2x2(lam_plus, lam_minus, K, M, L)


def amplitude_ratio(lam: float, block: Block2x2) -> complex:
    """Ratio ``U/W = b / (lambda - a)`` of the eigenvector for ``lam``."""
    denom = lam - complex(block.a)
    if denom == 0:
        if block.b == 0:
            raise UndefinedAmplitudeRatioError("pure circumferential mode: U/W undefined")
        raise AmplitudeRatioPoleError("lambda coincides with the top-left entry")
    return complex(block.b) / denom


def physical_amplitude_ratio(lam: float, block: Block2x2) -> float:
    """Real ratio ``Im(b) / (lambda - a)`` for a purely imaginary coupling.

    Discrete blocks couple sine-type ``u`` and cosine-type ``w`` components
    through a skew-symmetric circulant, so ``b`` is imaginary and the factor
    ``i`` belongs to the phase convention, not to the ratio.
    """
    b = complex(block.b)
    if abs(b.real) > 1e-13 * abs(b):
        raise ValueError(f"coupling entry is not purely imaginary: {b}")
    return (amplitude_ratio(lam, block) / 1j).real


def fourier_vector(n: int, j: int) -> np.ndarray:
    w = cmath.exp(2j * math.pi / n)
    return np.array([w ** (k * j) for k in range(n)]) / math.sqrt(n)
