from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import BSpline

from ringlock.bspline import (
    FORMULATIONS,
    MIXED,
    PUBLISHED,
    STANDARD,
    SUPPORTED_DEGREES,
    Stencil,
    build_table,
    cardinal_bspline,
    inner_product_coefficient,
    verify_tables,
)
from ringlock.circulant import circulant_eigenvalues
from ringlock.exceptions import ConfigurationError

DEGREES = range(0, 6)


def scipy_cardinal(p: int) -> BSpline:
    return BSpline.basis_element(np.arange(p + 2), extrapolate=False)


def gauss_inner(p_row, p_col, r, s, k, order=12):
    """Piecewise Gauss-Legendre quadrature of the same integral on scipy splines."""
    f = scipy_cardinal(p_row).derivative(r) if r else scipy_cardinal(p_row)
    g = scipy_cardinal(p_col).derivative(s) if s else scipy_cardinal(p_col)
    x, w = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for e in range(p_row + 1):
        xs = e + 0.5 * (x + 1)
        fv = np.nan_to_num(f(xs))
        gv = np.nan_to_num(g(xs - k))
        total += 0.5 * np.sum(w * fv * gv)
    return total


class TestCardinalBspline:
    @pytest.mark.parametrize("p", DEGREES)
    def test_matches_scipy(self, p):
        phi = cardinal_bspline(p)
        ref = scipy_cardinal(p)
        xs = [Fraction(i, 7) for i in range(0, 7 * (p + 1))]
        got = np.array([float(phi(x)) for x in xs])
        assert np.allclose(got, np.nan_to_num(ref(np.array([float(x) for x in xs]))), atol=1e-14)

    @pytest.mark.parametrize("p", DEGREES)
    def test_unit_integral(self, p):
        assert cardinal_bspline(p).integral() == 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5), st.fractions(min_value=0, max_value=1, max_denominator=97))
    def test_partition_of_unity(self, p, u):
        phi = cardinal_bspline(p)
        assert sum(phi(u + k) for k in range(p + 1)) == 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5), st.fractions(min_value=0, max_value=6, max_denominator=97))
    def test_mirror_symmetry(self, p, x):
        phi = cardinal_bspline(p)
        assert phi(x) == phi(p + 1 - x)

    @pytest.mark.parametrize("p", range(1, 6))
    def test_smoothness_order(self, p):
        phi = cardinal_bspline(p)
        for x in range(1, p + 1):
            for order in range(p):
                left, right = phi.one_sided_derivatives(x, order)
                assert left == right
        jumps = [phi.one_sided_derivatives(x, p) for x in range(p + 2)]
        assert any(a != b for a, b in jumps)

    def test_quadratic_value(self):
        assert cardinal_bspline(2)(Fraction(1, 2)) == Fraction(1, 8)

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            cardinal_bspline(-1)


class TestInnerProducts:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 4), st.data())
    def test_against_quadrature(self, p, data):
        q = data.draw(st.sampled_from([p, p - 1]))
        r = data.draw(st.integers(0, min(2, p)))
        s = data.draw(st.integers(0, min(2, q)))
        k = data.draw(st.integers(-p - 1, p + 1))
        exact = inner_product_coefficient(p, q, r, s, k)
        assert float(exact) == pytest.approx(gauss_inner(p, q, r, s, k), abs=1e-12)

    def test_quadratic_mass_row(self):
        row = [inner_product_coefficient(2, 2, 0, 0, -k) for k in range(3)]
        assert row == [Fraction(11, 20), Fraction(13, 60), Fraction(1, 120)]

    def test_disjoint_support_is_zero(self):
        assert inner_product_coefficient(3, 3, 1, 1, 4) == 0

    def test_rejects_excess_derivative(self):
        with pytest.raises(ValueError):
            inner_product_coefficient(2, 2, 3, 0, 0)

    @pytest.mark.parametrize("p", SUPPORTED_DEGREES)
    def test_symmetric_in_shift(self, p):
        for k in range(p + 1):
            assert inner_product_coefficient(p, p, 1, 1, k) == inner_product_coefficient(p, p, 1, 1, -k)


class TestTables:
    @pytest.mark.parametrize("p", SUPPORTED_DEGREES)
    @pytest.mark.parametrize("form", FORMULATIONS)
    def test_every_published_row_is_exact(self, p, form):
        (report,) = verify_tables(p, [form])
        assert report.ok, [r.mismatches() for r in report.rows]
        assert report.summary() == f"p={p} {form}: 5/5 rows exact"

    def test_shared_rows_are_identical(self):
        for form in FORMULATIONS:
            for names in PUBLISHED[form]:
                for p in SUPPORTED_DEGREES:
                    t = build_table(p, form)
                    assert len({t[n].coeffs for n in names}) == 1

    def test_bad_inputs(self):
        with pytest.raises(ConfigurationError):
            build_table(5, STANDARD)
        with pytest.raises(ConfigurationError):
            build_table(2, "hybrid")

    @pytest.mark.parametrize("p", SUPPORTED_DEGREES)
    @pytest.mark.parametrize("form", FORMULATIONS)
    @pytest.mark.parametrize("N", [8, 9, 16])
    def test_circulant_eigenvalues_equal_symbol(self, p, form, N):
        # aliasing of short meshes must not change the eigenvalue at theta_j
        for entry in build_table(p, form).entries.values():
            if N < 2 * p:
                continue
            lam = circulant_eigenvalues(entry.circulant(N))
            theta = 2 * np.pi * np.arange(N) / N
            sym = entry.stencil.symbol(theta)
            assert np.allclose(lam, sym, atol=1e-13), entry.name

    @pytest.mark.parametrize("p", SUPPORTED_DEGREES)
    def test_consistency_orders(self, p):
        t = build_table(p, STANDARD)
        assert t["M"].stencil.zero_order == 0
        assert t["K11m"].stencil.zero_order == 2
        assert t["K12m"].stencil.zero_order == 1
        assert t["K22b"].stencil.zero_order == 4
        m = build_table(p, MIXED)
        assert m["Keu11"].stencil.zero_order == 1
        assert m["Keu22"].stencil.zero_order == 2


stencils = st.dictionaries(st.integers(-4, 4), st.fractions(min_value=-3, max_value=3, max_denominator=12),
                           min_size=1, max_size=6).map(Stencil.from_offsets)


class TestStencil:
    @settings(max_examples=80, deadline=None)
    @given(stencils, st.floats(-math.pi, math.pi))
    def test_symbol_is_the_fourier_sum(self, s, theta):
        direct = sum(float(c) * np.exp(1j * k * theta) for k, c in s.terms)
        assert complex(s.symbol(theta)) == pytest.approx(direct, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(stencils, stencils, st.floats(-math.pi, math.pi))
    def test_product_and_reverse(self, a, b, theta):
        lhs = complex((a * b).symbol(theta))
        assert lhs == pytest.approx(complex(a.symbol(theta)) * complex(b.symbol(theta)), abs=1e-10)
        assert complex(a.reversed().symbol(theta)) == pytest.approx(np.conj(complex(a.symbol(theta))), abs=1e-12)

    @pytest.mark.parametrize("theta", [1e-7, 1e-4, 0.3, 2.9])
    def test_small_angle_relative_accuracy(self, theta):
        # the fourth-difference stencil 6,-4,1 is 16 sin^4(theta/2) exactly
        s = build_table(2, STANDARD)["K22b"].stencil
        with mpmath.workdps(40):
            ref = 16 * mpmath.sin(mpmath.mpf(theta) / 2) ** 4
            assert float(s.symbol(theta).real) == pytest.approx(float(ref), rel=1e-13)
            assert complex(s.symbol_mp(theta)).real == pytest.approx(float(ref), rel=1e-15)

    def test_arithmetic(self):
        a = Stencil.from_offsets({0: 1, 1: -1})
        assert (a - a).terms == ()
        assert (a + a).as_dict() == {0: 2, 1: -2}
        assert (-a).as_dict() == {0: -1, 1: 1}
        assert a.scaled(Fraction(1, 2)).as_dict() == {0: Fraction(1, 2), 1: Fraction(-1, 2)}
        assert a.zero_order == 1

    def test_empty_symbol(self):
        assert Stencil.from_offsets({}).symbol(0.5) == 0
        assert Stencil.from_offsets({}).symbol_mp(0.5) == 0
