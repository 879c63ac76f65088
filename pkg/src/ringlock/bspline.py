"""Cardinal B-splines in exact rational arithmetic and the circulant
coefficient tables of periodic uniform spline Galerkin matrices.

Every polynomial piece is stored in the local coordinate ``u = x - k`` of
its unit interval ``[k, k+1)``, so products and integrals over an element
reduce to operations on coefficient lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np

from .circulant import GENERAL, SKEW, SYMMETRIC, CirculantSpec
from .exceptions import ConfigurationError

Poly = tuple  # ascending Fraction coefficients in the local variable u

SUPPORTED_DEGREES = (2, 3, 4)
STANDARD = "standard"
MIXED = "mixed"
FORMULATIONS = (STANDARD, MIXED)


def _trim(q) -> Poly:
    q = list(q)
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    return tuple(q) if q else (Fraction(0),)


def _add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def _mul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _antiderivative(q: Poly) -> Poly:
    return (Fraction(0),) + tuple(Fraction(c) / (k + 1) for k, c in enumerate(q))


def _derivative(q: Poly) -> Poly:
    return _trim(k * c for k, c in enumerate(q) if k) if len(q) > 1 else (Fraction(0),)


def _horner(q: Poly, u):
    acc = 0
    for c in reversed(q):
        acc = acc * u + c
    return acc


def _integral01(q: Poly) -> Fraction:
    return sum((Fraction(c) / (k + 1) for k, c in enumerate(q)), Fraction(0))


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on the integer breakpoints ``0, 1, ..., len(pieces)``."""

    pieces: tuple

    @property
    def breakpoints(self) -> range:
        return range(len(self.pieces) + 1)

    @property
    def degree(self) -> int:
        return max(len(q) for q in self.pieces) - 1

    def __call__(self, x):
        """Exact value at ``x`` (right-continuous; zero outside the support)."""
        x = Fraction(x)
        k = math.floor(x)
        if not 0 <= k < len(self.pieces):
            return Fraction(0)
        return _horner(self.pieces[k], x - k)

    def derivative(self, order: int = 1) -> "PiecewisePoly":
        pieces = self.pieces
        for _ in range(order):
            pieces = tuple(_derivative(q) for q in pieces)
        return PiecewisePoly(pieces)

    def integral(self) -> Fraction:
        return sum((_integral01(q) for q in self.pieces), Fraction(0))

    def one_sided_derivatives(self, x: int, order: int) -> tuple[Fraction, Fraction]:
        """Left and right limits of the ``order``-th derivative at breakpoint ``x``."""
        d = self.derivative(order).pieces
        left = _horner(d[x - 1], 1) if 0 < x <= len(d) else Fraction(0)
        right = _horner(d[x], 0) if 0 <= x < len(d) else Fraction(0)
        return left, right


@lru_cache(maxsize=None)
def cardinal_bspline(p: int) -> PiecewisePoly:
    """Cardinal B-spline of degree ``p`` as the ``p``-fold convolution of the
    unit box ``1_[0,1)`` with itself.

    Convolution with the box gives ``phi_p(x) = int_{x-1}^{x} phi_{p-1}``,
    which on the element ``[k, k+1)`` reads
    ``Q_{k-1}(1) - Q_{k-1}(u) + Q_k(u)`` with ``Q_k`` the antiderivative of
    piece ``k`` of ``phi_{p-1}`` vanishing at ``u = 0``.

    Examples
    --------
    >>> cardinal_bspline(2)(Fraction(3, 2))
    Fraction(3, 4)
    """
    if p < 0:
        raise ValueError(f"degree must be non-negative, got {p}")
    if p == 0:
        return PiecewisePoly(((Fraction(1),),))
    prev = cardinal_bspline(p - 1).pieces
    anti = [_antiderivative(q) for q in prev]
    pieces = []
    for k in range(p + 1):
        piece: Poly = (Fraction(0),)
        if k >= 1:
            q = anti[k - 1]
            piece = _add(piece, (_horner(q, 1),))
            piece = _add(piece, tuple(-c for c in q))
        if k < p:
            piece = _add(piece, anti[k])
        pieces.append(piece)
    return PiecewisePoly(tuple(pieces))


def inner_product_coefficient(p_row: int, p_col: int, r: int, s: int, k: int) -> Fraction:
    """Exact ``int phi_{p_row}^{(r)}(x) phi_{p_col}^{(s)}(x - k) dx``.

    Derivatives are taken piecewise, so ``r <= p_row`` and ``s <= p_col`` are
    required (the ``p``-th derivative is piecewise constant). Disjoint
    supports give exactly zero.
    """
    if r < 0 or s < 0 or r > p_row or s > p_col:
        raise ValueError(f"derivative orders ({r}, {s}) not integrable for degrees ({p_row}, {p_col})")
    a = cardinal_bspline(p_row).derivative(r).pieces
    b = cardinal_bspline(p_col).derivative(s).pieces
    total = Fraction(0)
    for m, qa in enumerate(a):
        j = m - k
        if 0 <= j < len(b):
            total += _integral01(_mul(qa, b[j]))
    return total


# ---------------------------------------------------------------------------
# stencils


@dataclass(frozen=True)
class Stencil:
    """Exact Laurent polynomial ``P(z) = sum_k c_k z^k`` of a circulant row.

    The symbol ``P(exp(i theta))`` of a derivative stencil vanishes to high
    order at ``theta = 0``; summing cosines directly would lose most digits
    there. :meth:`symbol` therefore divides out ``(z - 1)^m`` exactly and
    evaluates ``z^k0 (z - 1)^m Q(z)`` with ``z - 1 = 2i sin(theta/2) e^{i theta/2}``.
    """

    terms: tuple  # sorted (offset, Fraction) pairs, zeros dropped

    @classmethod
    def from_offsets(cls, offsets: dict) -> "Stencil":
        return cls(tuple(sorted((k, Fraction(c)) for k, c in offsets.items() if c)))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.terms)

    def __add__(self, other: "Stencil") -> "Stencil":
        out = self.as_dict()
        for k, c in other.terms:
            out[k] = out.get(k, Fraction(0)) + c
        return Stencil.from_offsets(out)

    def __neg__(self) -> "Stencil":
        return Stencil(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other: "Stencil") -> "Stencil":
        return self + (-other)

    def __mul__(self, other: "Stencil") -> "Stencil":
        out: dict[int, Fraction] = {}
        for k, c in self.terms:
            for j, d in other.terms:
                out[k + j] = out.get(k + j, Fraction(0)) + c * d
        return Stencil.from_offsets(out)

    def reversed(self) -> "Stencil":
        """Stencil of the transpose; its symbol is the complex conjugate."""
        return Stencil(tuple(sorted((-k, c) for k, c in self.terms)))

    def scaled(self, factor) -> "Stencil":
        return Stencil.from_offsets({k: c * Fraction(factor) for k, c in self.terms})

    @cached_property
    def _factored(self) -> tuple:
        if not self.terms:
            return 0, 0, np.zeros(0, dtype=np.int64), np.zeros(0), ()
        k0 = self.terms[0][0]
        poly = [Fraction(0)] * (self.terms[-1][0] - k0 + 1)
        for k, c in self.terms:
            poly[k - k0] = c
        m = 0
        # synthetic division by (z - 1) while z = 1 is a root
        while len(poly) > 1 and sum(poly) == 0:
            quot = [Fraction(0)] * (len(poly) - 1)
            acc = Fraction(0)
            for i in range(len(poly) - 1, 0, -1):
                acc += poly[i]
                quot[i - 1] = acc
            poly = quot
            m += 1
        ks = np.array([j for j, c in enumerate(poly) if c], dtype=np.int64)
        cs = np.array([float(c) for c in poly if c])
        return k0, m, ks, cs, tuple(poly)

    @property
    def zero_order(self) -> int:
        """Multiplicity of the root of the symbol at ``theta = 0``."""
        return self._factored[1]

    def symbol(self, theta) -> np.ndarray:
        """``sum_k c_k exp(i k theta)`` accurate to a few ulps relative to its
        own magnitude near ``theta = 0``."""
        theta = np.asarray(theta, dtype=float)
        k0, m, ks, cs, _ = self._factored
        if cs.size == 0:
            return np.zeros(theta.shape, dtype=complex)
        q = np.exp(1j * np.multiply.outer(theta, ks)) @ cs
        zm1 = 2j * np.sin(theta / 2) * np.exp(0.5j * theta)
        return np.exp(1j * k0 * theta) * zm1**m * q

    def symbol_mp(self, theta, dps: int = 40):
        """Scalar :meth:`symbol` in mpmath arithmetic at ``dps`` digits."""
        import mpmath

        with mpmath.workdps(dps):
            theta = mpmath.mpf(theta)
            k0, m, _, _, q = self._factored
            if not q:
                return mpmath.mpc(0)
            z = mpmath.expj(theta)
            acc = mpmath.mpc(0)
            for c in reversed(q):
                acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            zm1 = 2j * mpmath.sin(theta / 2) * mpmath.expj(theta / 2)
            return +(mpmath.expj(k0 * theta) * zm1**m * acc)


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass(frozen=True)
class Scale:
    """Prefactor ``h**h * R**R * Ibar**I`` turning a table row into a matrix."""

    h: int = 0
    R: int = 0
    I: int = 0

    def value(self, h: float, radius: float, ibar: float) -> float:
        return h**self.h * radius**self.R * ibar**self.I


@dataclass(frozen=True)
class TableEntry:
    """One circulant row of a coefficient table.

    ``coeffs`` are the published ``c_0, c_1, ...``. ``pattern`` fixes where
    the remaining entries of the first row sit:

    * ``symmetric``: ``c_{N-k} = c_k``
    * ``skew``: ``c_0 = 0``, ``c_{N-k} = -c_k``
    * ``shifted-skew``: ``c_{N-1-k} = -c_k`` (strain/displacement coupling)
    * ``shifted-symmetric``: ``c_{N-1-k} = c_k``
    """

    name: str
    coeffs: tuple
    pattern: str
    scale: Scale

    def offsets(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}

        def put(k, c):
            out[k] = out.get(k, Fraction(0)) + c

        for k, c in enumerate(self.coeffs):
            c = Fraction(c)
            if self.pattern == "symmetric":
                put(k, c)
                if k:
                    put(-k, c)
            elif self.pattern == "skew":
                if k:
                    put(k, c)
                    put(-k, -c)
            elif self.pattern == "shifted-skew":
                put(k, c)
                put(-1 - k, -c)
            elif self.pattern == "shifted-symmetric":
                put(k, c)
                put(-1 - k, c)
            else:
                raise ValueError(f"unknown pattern {self.pattern!r}")
        return out

    @property
    def symmetry(self) -> str:
        return {"symmetric": SYMMETRIC, "skew": SKEW}.get(self.pattern, GENERAL)

    @property
    def bandwidth(self) -> int:
        return max(abs(k) for k in self.offsets())

    def circulant(self, size: int) -> CirculantSpec:
        """First row for an ``size``-element mesh; aliased offsets are summed."""
        return CirculantSpec.from_offsets(size, self.offsets(), self.symmetry)

    @property
    def stencil(self) -> Stencil:
        return Stencil.from_offsets(self.offsets())

    def symbol(self, theta) -> np.ndarray:
        """Fourier symbol ``sum_k c_k exp(i k theta)``; at ``theta = 2 pi j/N``
        this is the ``j``-th eigenvalue of :meth:`circulant` for every ``N``
        (aliasing does not change it). Symmetric rows return a real array,
        skew rows a purely imaginary one."""
        val = self.stencil.symbol(theta)
        if self.symmetry == SYMMETRIC:
            return val.real + 0j
        if self.symmetry == SKEW:
            return 1j * val.imag
        return val


@dataclass(frozen=True)
class CoefficientTable:
    degree: int
    formulation: str
    entries: dict

    def __getitem__(self, name: str) -> TableEntry:
        return self.entries[name]


F = Fraction

# Published rows, transcribed verbatim. Each group lists the matrix names
# sharing a row; the first name is the one that is recomputed.
PUBLISHED = {
    STANDARD: {
        ("M", "K22m"): {
            2: (F(11, 20), F(13, 60), F(1, 120)),
            3: (F(151, 315), F(397, 1680), F(1, 42), F(1, 5040)),
            4: (F(15619, 36288), F(44117, 181440), F(913, 22680), F(251, 181440), F(1, 362880)),
        },
        ("K11m", "K11b"): {
            2: (F(1), F(-1, 3), F(-1, 6)),
            3: (F(2, 3), F(-1, 8), F(-1, 5), F(-1, 120)),
            4: (F(35, 72), F(-11, 360), F(-17, 90), F(-59, 2520), F(-1, 5040)),
        },
        ("K12m",): {
            2: (F(0), F(5, 12), F(1, 24)),
            3: (F(0), F(49, 144), F(7, 90), F(1, 720)),
            4: (F(0), F(809, 2880), F(289, 2880), F(41, 6720), F(1, 40320)),
        },
        ("K12b",): {
            2: (F(0), F(1), F(-1, 2)),
            3: (F(0), F(19, 24), F(-1, 3), F(-1, 24)),
            4: (F(0), F(217, 360), F(-67, 360), F(-3, 40), F(-1, 720)),
        },
        ("K22b",): {
            2: (F(6), F(-4), F(1)),
            3: (F(8, 3), F(-3, 2), F(0), F(1, 6)),
            4: (F(19, 12), F(-43, 60), F(-4, 15), F(11, 60), F(1, 120)),
        },
    },
    MIXED: {
        ("M",): {
            2: (F(11, 20), F(13, 60), F(1, 120)),
            3: (F(151, 315), F(397, 1680), F(1, 42), F(1, 5040)),
            4: (F(15619, 36288), F(44117, 181440), F(913, 22680), F(251, 181440), F(1, 362880)),
        },
        ("Kee11", "Kee22"): {
            2: (F(2, 3), F(1, 6)),
            3: (F(11, 20), F(13, 60), F(1, 120)),
            4: (F(151, 315), F(397, 1680), F(1, 42), F(1, 5040)),
        },
        ("Keu11", "Keu21"): {
            2: (F(-1, 2), F(-1, 6)),
            3: (F(-1, 3), F(-5, 24), F(-1, 120)),
            4: (F(-35, 144), F(-17, 80), F(-17, 720), F(-1, 5040)),
        },
        ("Keu12",): {
            2: (F(11, 24), F(1, 24)),
            3: (F(151, 360), F(19, 240), F(1, 720)),
            4: (F(15619, 40320), F(477, 4480), F(247, 40320), F(1, 40320)),
        },
        ("Keu22",): {
            2: (F(1, 2), F(-1, 2)),
            3: (F(5, 12), F(-3, 8), F(-1, 24)),
            4: (F(49, 144), F(-21, 80), F(-11, 144), F(-1, 720)),
        },
    },
}

# name -> (row degree offset, col degree offset, row derivative, col derivative,
# sign, pattern, scale); an offset of -1 selects the degree p-1 strain basis.
_RECIPES = {
    STANDARD: {
        "M": (0, 0, 0, 0, 1, "symmetric", Scale(h=1, R=1)),
        "K11m": (0, 0, 1, 1, 1, "symmetric", Scale(h=-1, R=-1)),
        "K12m": (0, 0, 1, 0, 1, "skew", Scale(R=-1)),
        "K22m": (0, 0, 0, 0, 1, "symmetric", Scale(h=1, R=-1)),
        "K11b": (0, 0, 1, 1, 1, "symmetric", Scale(h=-1, R=-1, I=1)),
        "K12b": (0, 0, 1, 2, -1, "skew", Scale(h=-2, R=-1, I=1)),
        "K22b": (0, 0, 2, 2, 1, "symmetric", Scale(h=-3, R=-1, I=1)),
    },
    MIXED: {
        "M": (0, 0, 0, 0, 1, "symmetric", Scale(h=1, R=1)),
        "Kee11": (-1, -1, 0, 0, 1, "symmetric", Scale(h=1, R=1)),
        "Kee22": (-1, -1, 0, 0, 1, "symmetric", Scale(h=1, R=3, I=1)),
        "Keu11": (-1, 0, 0, 1, 1, "shifted-skew", Scale()),
        "Keu12": (-1, 0, 0, 0, 1, "shifted-symmetric", Scale(h=1)),
        "Keu21": (-1, 0, 0, 1, 1, "shifted-skew", Scale(R=1, I=1)),
        "Keu22": (-1, 0, 0, 2, -1, "shifted-symmetric", Scale(h=-1, R=1, I=1)),
    },
}


def _check(p: int, formulation: str) -> None:
    if p not in SUPPORTED_DEGREES:
        raise ConfigurationError(f"degree must be one of {SUPPORTED_DEGREES}, got {p}")
    if formulation not in FORMULATIONS:
        raise ConfigurationError(f"formulation must be one of {FORMULATIONS}, got {formulation!r}")


def table_row(p: int, formulation: str, name: str) -> tuple:
    """Recompute the published ``c_0, c_1, ...`` of one table row.

    The table lists ``c_k`` for the column function shifted by ``-k``, i.e.
    ``c_k = int D^r phi(x) D^s phi(x + k) dx``. Strain rows use the
    degree ``p-1`` spline with the displacement spline shifted one further
    element, ``x + 1 + k``, which is what places ``c_0`` opposite
    ``c_{N-1}``.
    """
    _check(p, formulation)
    d_row, d_col, r, s, sign, pattern, _ = _RECIPES[formulation][name]
    p_row, p_col = p + d_row, p + d_col
    if pattern.startswith("shifted"):
        return tuple(sign * inner_product_coefficient(p_row, p_col, r, s, -1 - k) for k in range(p))
    return tuple(sign * inner_product_coefficient(p_row, p_col, r, s, -k) for k in range(p_row + 1))


@lru_cache(maxsize=None)
def build_table(p: int, formulation: str) -> CoefficientTable:
    """All circulant rows of one formulation at degree ``p``, generated by
    exact integration."""
    _check(p, formulation)
    entries = {}
    for name, (*_, pattern, scale) in _RECIPES[formulation].items():
        entries[name] = TableEntry(name, table_row(p, formulation, name), pattern, scale)
    return CoefficientTable(p, formulation, entries)


@dataclass(frozen=True)
class RowCheck:
    names: tuple
    published: tuple
    computed: tuple

    @property
    def matches(self) -> bool:
        return self.published == self.computed

    def mismatches(self) -> list[tuple[int, Fraction, Fraction]]:
        n = max(len(self.published), len(self.computed))
        pad = lambda t: tuple(t) + (Fraction(0),) * (n - len(t))  # noqa: E731
        return [(k, a, b) for k, (a, b) in enumerate(zip(pad(self.published), pad(self.computed))) if a != b]


@dataclass(frozen=True)
class TableReport:
    degree: int
    formulation: str
    rows: tuple

    @property
    def n_match(self) -> int:
        return sum(r.matches for r in self.rows)

    @property
    def ok(self) -> bool:
        return self.n_match == len(self.rows)

    def summary(self) -> str:
        return f"p={self.degree} {self.formulation}: {self.n_match}/{len(self.rows)} rows exact"


def verify_tables(p: int, formulations: Iterable[str] = FORMULATIONS) -> list[TableReport]:
    """Compare every published row with its exact recomputation."""
    reports = []
    for form in formulations:
        _check(p, form)
        table = build_table(p, form)
        rows = []
        for names, by_degree in PUBLISHED[form].items():
            rows.append(RowCheck(names, by_degree[p], table[names[0]].coeffs))
        reports.append(TableReport(p, form, tuple(rows)))
    return reports
