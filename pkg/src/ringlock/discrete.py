"""Discrete spectra of the periodic spline Galerkin ring discretizations.

Every block of the assembled system is circulant, so one Fourier mode
``j`` of an ``N``-element mesh sees only the symbols of the coefficient
rows at the angle ``theta_j = 2 pi j / N``. The 2N x 2N (standard) or
condensed mixed eigenproblem thus splits into 2x2 blocks.

Mode ``j`` and ``N - j`` carry the same physical mode number
``m = min(j, N - j)`` and the normalized mode number is ``xi = 2m/N``, so
that ``m h = pi xi`` with ``h = 2 pi / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .analytic import RingParams
from .bspline import FORMULATIONS, MIXED, STANDARD, SUPPORTED_DEGREES, build_table
from .circulant import RADICAND_TOL, Block2x2, EigenPair2x2, decouple_2x2
from .exceptions import AssemblyError, ConfigurationError, DomainError, OracleError

DENSE_MAX_ELEMENTS = 64


@dataclass(frozen=True)
class Discretization:
    """Uniform periodic spline space: ``elements`` knot spans of size ``h``.

    ``elements >= 2p`` keeps the stencil half-width below ``elements/2``;
    rows that still alias are summed, which is what assembling the periodic
    Gram matrix does.
    """

    degree: int
    elements: int
    formulation: str = STANDARD

    def __post_init__(self):
        if self.degree not in SUPPORTED_DEGREES:
            raise ConfigurationError(f"degree must be one of {SUPPORTED_DEGREES}, got {self.degree}")
        if self.formulation not in FORMULATIONS:
            raise ConfigurationError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        if not isinstance(self.elements, (int, np.integer)) or self.elements < 2 * self.degree:
            raise ConfigurationError(
                f"elements must be an integer >= {2 * self.degree} for degree {self.degree}, got {self.elements}"
            )

    @property
    def h(self) -> float:
        return 2.0 * math.pi / self.elements

    @property
    def table(self):
        return build_table(self.degree, self.formulation)

    def physical_mode(self, j):
        j = np.asarray(j)
        return np.minimum(j, self.elements - j)

    def xi(self, j):
        return 2.0 * self.physical_mode(j) / self.elements

    def angle(self, j):
        """Signed angle ``2 pi j'/N`` with ``j'`` in ``(-N/2, N/2]``."""
        j = np.asarray(j, dtype=np.int64)
        if np.any((j < 0) | (j >= self.elements)):
            raise IndexError(f"mode index outside 0..{self.elements - 1}")
        signed = np.where(2 * j > self.elements, j - self.elements, j)
        return 2.0 * np.pi * signed / self.elements


@dataclass(frozen=True)
class DiscreteModeBlock:
    """Mass-normalized 2x2 block of one Fourier mode.

    ``mass`` is the normalized mass symbol and ``det`` the block determinant
    evaluated without cancellation.
    """

    a: float
    b: complex
    d: float
    mass: float
    det: float

    def block(self) -> Block2x2:
        return Block2x2.hermitian(self.a, self.b, self.d)

    def eigenpair(self) -> EigenPair2x2:
        return decouple_2x2(self.block(), det=self.det)


@dataclass(frozen=True)
class BlockArrays:
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    mass: np.ndarray
    det: np.ndarray

    def __getitem__(self, i) -> DiscreteModeBlock:
        return DiscreteModeBlock(float(self.a[i]), complex(self.b[i]), float(self.d[i]),
                                 float(self.mass[i]), float(self.det[i]))


_STANDARD_ROWS = ("M", "K11m", "K12m", "K12b", "K22b")


def _standard_stencils(p: int):
    t = build_table(p, STANDARD)
    M, K11, K12m, K12b, K22b = (t[n].stencil for n in _STANDARD_ROWS)
    return (M, K11, K12m, K12b, K22b, K11 * M - K12m * K12m.reversed(),
            K12m * K12b.reversed(), K11 * K22b - K12b * K12b.reversed())


def symbols_standard(p: int, theta, dps: int | None = None):
    """Normalized symbols ``(m, k11, k12m, k12b, k22b, s0, s1, s2)``.

    ``s0 = k11 m - |k12m|^2``, ``s2 = k11 k22b - |k12b|^2`` and
    ``s1 = Re(k12m conj(k12b))`` come from exact product stencils, so the
    high-order zeros at ``theta = 0`` survive rounding. With ``dps`` the
    values are mpmath numbers at that working precision (scalar ``theta``).
    """
    st = _standard_stencils(p)
    if dps is None:
        v = [s.symbol(theta) for s in st]
    else:
        v = [s.symbol_mp(theta, dps) for s in st]
    m, k11, k12m, k12b, k22b, s0, s1, s2 = v
    return (m.real, k11.real, 1j * k12m.imag, 1j * k12b.imag, k22b.real, s0.real, s1.real, s2.real)


def symbols_mixed(p: int, theta, dps: int | None = None):
    """Normalized symbols ``(m, kee, x, y, z)``; ``x, y, z`` belong to the
    ``Keu11, Keu12, Keu22`` rows. The three share the phase ``exp(-i theta/2)``
    of the half-element shift between strain and displacement bases."""
    t = build_table(p, MIXED)
    rows = [t[n].stencil for n in ("M", "Kee11", "Keu11", "Keu12", "Keu22")]
    if dps is None:
        m, kee, x, y, z = (s.symbol(theta) for s in rows)
    else:
        m, kee, x, y, z = (s.symbol_mp(theta, dps) for s in rows)
    return m.real, kee.real, x, y, z


def standard_block_entries(symbols, h, R2, ib):
    """``(a, b, d, det)`` from standard symbols; generic over numpy arrays
    and mpmath scalars."""
    m, k11, k12m, k12b, k22b, s0, s1, s2 = symbols
    a = (1 + ib) * k11 / (R2 * h**2 * m)
    b = (k12m * h**2 + ib * k12b) / (R2 * h**3 * m)
    d = (1 + ib * k22b / (h**4 * m)) / R2
    num = h**4 * s0 + ib * (h**4 * k11 * m + k11 * k22b - 2 * h**2 * s1) + ib * ib * s2
    det = num / (R2 * R2 * h**6 * m * m)
    return a, b, d, det


def mixed_block_entries(symbols, h, R2, ib):
    """Per-mode condensation ``Keu^H Kee^{-1} Keu`` normalized by the mass.

    The determinant follows from the Lagrange identity
    ``det = |x1 y2 - x2 y1|^2/(e1 e2)`` for the condensed 2x2 block.
    """
    m, kee, x, y, z = symbols
    ax2 = abs(x) ** 2
    denom = R2 * kee * m
    a = (1 + ib) * ax2 / (denom * h**2)
    b = x.conjugate() * (y * h**2 + ib * z) / (denom * h**3)
    d = (h**4 * abs(y) ** 2 + ib * abs(z) ** 2) / (denom * h**4)
    det = ib * ax2 * abs(z - h**2 * y) ** 2 / (denom**2 * h**6)
    # coupling is purely imaginary up to rounding; keep the exact phase
    return a, 1j * b.imag, d, det


def blocks_at_angle(theta, h: float, degree: int, formulation: str, params: RingParams) -> BlockArrays:
    """Mode blocks at continuous angle(s) ``theta`` for mesh size ``h``.

    Realizable meshes use ``h = 2 pi/N`` and ``theta = 2 pi j/N``; other
    values give the continuous-``h`` extension used by the error formulas.
    """
    theta = np.asarray(theta, dtype=float)
    R2 = params.radius**2
    ib = params.ibar
    if formulation == STANDARD:
        sym = symbols_standard(degree, theta)
        a, b, d, det = standard_block_entries(sym, h, R2, ib)
    elif formulation == MIXED:
        sym = symbols_mixed(degree, theta)
        if np.any(sym[1] <= 0):
            raise AssemblyError("strain Gram symbol is not positive; mesh too coarse for this degree")
        a, b, d, det = mixed_block_entries(sym, h, R2, ib)
    else:
        raise ConfigurationError(f"unknown formulation {formulation!r}")
    if np.any(sym[0] <= 0):
        raise AssemblyError("mass symbol is not positive")
    return BlockArrays(a, np.asarray(b, dtype=complex), d, sym[0], det)


def mode_blocks(disc: Discretization, params: RingParams, modes=None) -> BlockArrays:
    modes = np.arange(disc.elements) if modes is None else np.asarray(modes)
    return blocks_at_angle(disc.angle(modes), disc.h, disc.degree, disc.formulation, params)


def mode_block_standard(n: int, disc: Discretization, params: RingParams) -> DiscreteModeBlock:
    if disc.formulation != STANDARD:
        raise ConfigurationError("mode_block_standard needs a standard discretization")
    return mode_blocks(disc, params, [n])[0]


def mode_block_mixed(n: int, disc: Discretization, params: RingParams) -> DiscreteModeBlock:
    """Per-mode static condensation ``K = Keu^H Kee^{-1} Keu``; transposes of
    circulants become complex conjugates of their symbols."""
    if disc.formulation != MIXED:
        raise ConfigurationError("mode_block_mixed needs a mixed discretization")
    return mode_blocks(disc, params, [n])[0]


def decouple_arrays(a, d, det):
    """Vectorised ``K (1 +- L)`` with the minus root as ``det/lambda_plus``."""
    K = 0.5 * (a + d)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = 1.0 - det / (K * K)
    if np.any(rad < -RADICAND_TOL):
        raise DomainError(f"negative radicand {rad.min():.3e}")
    L = np.sqrt(np.clip(rad, 0.0, None))
    lam_plus = K * (1.0 + L)
    lam_minus = np.where(lam_plus > 0, det / np.where(lam_plus > 0, lam_plus, 1.0), 0.0)
    return lam_plus, lam_minus


def physical_ratios(lam, blocks: BlockArrays):
    """``Im(b)/(lambda - a)``; NaN where the ratio is undefined or has a pole."""
    denom = lam - blocks.a
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = blocks.b.imag / denom
    return np.where(denom == 0, np.nan, rho)


@dataclass(frozen=True)
class SpectrumPoint:
    n: int
    xi: float
    lambda_plus: float
    lambda_minus: float
    rho_plus: float
    rho_minus: float


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Both branches for every Fourier index ``n = 0..N-1``."""

    disc: Discretization
    params: RingParams
    n: np.ndarray
    mode: np.ndarray
    xi: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    rho_plus: np.ndarray
    rho_minus: np.ndarray

    def __len__(self) -> int:
        return len(self.n)

    def __getitem__(self, i) -> SpectrumPoint:
        return SpectrumPoint(int(self.n[i]), float(self.xi[i]), float(self.lambda_plus[i]),
                             float(self.lambda_minus[i]), float(self.rho_plus[i]), float(self.rho_minus[i]))

    def branch(self, which: str) -> np.ndarray:
        return self.lambda_plus if which == "plus" else self.lambda_minus

    def ratio(self, which: str) -> np.ndarray:
        return self.rho_plus if which == "plus" else self.rho_minus

    def eigenvalues(self) -> np.ndarray:
        """All ``2N`` eigenvalues, sorted."""
        return np.sort(np.concatenate([self.lambda_plus, self.lambda_minus]))

    @cached_property
    def unique(self) -> np.ndarray:
        """Indices ``n = 0..N/2`` (one representative per physical mode)."""
        return np.arange(self.disc.elements // 2 + 1)


def discrete_spectrum(disc: Discretization, params: RingParams, modes=None) -> DiscreteSpectrum:
    modes = np.arange(disc.elements) if modes is None else np.asarray(modes, dtype=np.int64)
    blocks = mode_blocks(disc, params, modes)
    lam_plus, lam_minus = decouple_arrays(blocks.a, blocks.d, blocks.det)
    return DiscreteSpectrum(
        disc, params, modes, disc.physical_mode(modes), disc.xi(modes), lam_plus, lam_minus,
        physical_ratios(lam_plus, blocks), physical_ratios(lam_minus, blocks),
    )


# ---------------------------------------------------------------------------
# isolated second- and fourth-order model problems

ISOLATED_KINDS = ("membrane", "bending")


def isolated_discrete_spectrum(kind: str, degree: int, elements: int):
    """``(xi, lambda_h, lambda)`` for ``-u'' = lambda u`` (membrane) or
    ``u'''' = lambda u`` (bending) on the unit-radius periodic spline space.

    Returned for the unique modes ``m = 1..N/2``.
    """
    if kind not in ISOLATED_KINDS:
        raise ConfigurationError(f"kind must be one of {ISOLATED_KINDS}, got {kind!r}")
    disc = Discretization(degree, elements)
    t = disc.table
    modes = np.arange(1, elements // 2 + 1)
    theta = disc.angle(modes)
    m = t["M"].stencil.symbol(theta).real
    if kind == "membrane":
        lam_h = t["K11m"].stencil.symbol(theta).real / (disc.h**2 * m)
        lam = modes.astype(float) ** 2
    else:
        lam_h = t["K22b"].stencil.symbol(theta).real / (disc.h**4 * m)
        lam = modes.astype(float) ** 4
    return disc.xi(modes), lam_h, lam


# ---------------------------------------------------------------------------
# dense assembly and a self-contained eigensolver (test oracle)


def _dense(entry, N: int, h: float, params: RingParams) -> np.ndarray:
    # C[i, j] = c_{j - i}; eigenvalue of v_j is the symbol at +theta_j
    scale = entry.scale.value(h, params.radius, params.ibar)
    return scale * entry.circulant(N).dense()


def assemble_dense(disc: Discretization, params: RingParams) -> tuple[np.ndarray, np.ndarray]:
    """Assembled ``(K, M)`` of size ``2N``; the mixed stiffness is condensed
    at matrix level from the ``4N`` saddle-point blocks."""
    N, h, t = disc.elements, disc.h, disc.table
    D = lambda name: _dense(t[name], N, h, params)  # noqa: E731
    Mb = D("M")
    Z = np.zeros((N, N))
    M = np.block([[Mb, Z], [Z, Mb]])
    if disc.formulation == STANDARD:
        K11 = D("K11m") + D("K11b")
        K12 = D("K12m") + D("K12b")
        K22 = D("K22m") + D("K22b")
        K = np.block([[K11, K12], [K12.T, K22]])
    else:
        Kee = np.block([[D("Kee11"), Z], [Z, D("Kee22")]])
        Keu = np.block([[D("Keu11"), D("Keu12")], [D("Keu21"), D("Keu22")]])
        K = Keu.T @ np.linalg.solve(Kee, Keu)
    return 0.5 * (K + K.T), M


def cholesky_lower(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        s = A[j, j] - L[j, :j] @ L[j, :j]
        if s <= 0:
            raise OracleError("mass matrix is not symmetric positive definite")
        L[j, j] = math.sqrt(s)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def jacobi_eigenvalues(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
    below ``tol`` times the norm of ``A``; returns sorted eigenvalues."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    norm = np.linalg.norm(A)
    if norm == 0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * norm:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
    raise OracleError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def generalized_eigenvalues(K: np.ndarray, M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues of ``K x = lambda M x`` via ``L^{-1} K L^{-T}``."""
    L = cholesky_lower(M)
    X = np.linalg.solve(L, K)
    A = np.linalg.solve(L, X.T).T
    return jacobi_eigenvalues(0.5 * (A + A.T), tol)


def dense_oracle(disc: Discretization, params: RingParams) -> np.ndarray:
    """Sorted ``2N`` eigenvalues of the assembled system (``N <= 64``)."""
    if disc.elements > DENSE_MAX_ELEMENTS:
        raise ConfigurationError(f"dense oracle is limited to {DENSE_MAX_ELEMENTS} elements")
    K, M = assemble_dense(disc, params)
    return generalized_eigenvalues(K, M)
