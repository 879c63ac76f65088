from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringlock.circulant import (
    GENERAL,
    SKEW,
    SYMMETRIC,
    Block2x2,
    CirculantSpec,
    amplitude_ratio,
    circulant_eigenvalue,
    circulant_eigenvalues,
    decouple_2x2,
    fourier_vector,
    physical_amplitude_ratio,
    stable_sqrt_radicand,
)
from ringlock.exceptions import (
    AmplitudeRatioPoleError,
    DegeneratePencilError,
    DomainError,
    UndefinedAmplitudeRatioError,
)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=50)


@st.composite
def symmetric_specs(draw):
    n = draw(st.integers(3, 24))
    half = draw(st.lists(fractions, min_size=1, max_size=n // 2 + 1))
    row = {}
    for k, c in enumerate(half):
        row[k % n] = c
        row[(n - k) % n] = c
    return CirculantSpec(n, row, SYMMETRIC)


@st.composite
def skew_specs(draw):
    n = draw(st.integers(3, 24))
    half = draw(st.lists(fractions, min_size=1, max_size=(n - 1) // 2))
    row = {}
    for k, c in enumerate(half, start=1):
        if 2 * k != n:
            row[k] = c
            row[n - k] = -c
    return CirculantSpec(n, row, SKEW)


class TestCirculantSpec:
    def test_dense_layout(self):
        spec = CirculantSpec.from_row([1, 2, 3, 4])
        C = spec.dense()
        assert C[0].tolist() == [1, 2, 3, 4]
        assert C[1].tolist() == [4, 1, 2, 3]

    def test_from_offsets_sums_aliases(self):
        spec = CirculantSpec.from_offsets(4, {-2: Fraction(1), 2: Fraction(1), 1: Fraction(3)})
        assert spec.coeffs == (0, 3, 2, 0)

    def test_rejects_broken_symmetry(self):
        with pytest.raises(ValueError):
            CirculantSpec.from_row([1, 2, 3, 4], SYMMETRIC)
        with pytest.raises(ValueError):
            CirculantSpec.from_row([1, 2, 0, -2], SKEW)

    def test_rejects_out_of_range_offset(self):
        with pytest.raises(ValueError):
            CirculantSpec(4, {4: Fraction(1)})

    def test_abs_sum(self):
        assert CirculantSpec.from_row([1, -2, 0, 3]).abs_sum == 6.0


class TestCirculantEigenvalues:
    @settings(max_examples=60, deadline=None)
    @given(symmetric_specs())
    def test_symmetric_matches_dense_eigvals(self, spec):
        lam = circulant_eigenvalues(spec)
        assert np.allclose(lam.imag, 0.0)
        dense = np.sort(np.linalg.eigvalsh(spec.dense()))
        assert np.allclose(np.sort(lam.real), dense, atol=1e-10 * max(1.0, spec.abs_sum))

    @settings(max_examples=60, deadline=None)
    @given(skew_specs())
    def test_skew_is_imaginary_and_matches_dense(self, spec):
        lam = circulant_eigenvalues(spec)
        assert np.allclose(lam.real, 0.0)
        dense = np.linalg.eigvals(spec.dense())
        assert np.allclose(np.sort(dense.imag), np.sort(lam.imag), atol=1e-10 * max(1.0, spec.abs_sum))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(fractions, min_size=2, max_size=12), st.data())
    def test_fourier_vectors_are_eigenvectors(self, row, data):
        spec = CirculantSpec.from_row(row, GENERAL)
        j = data.draw(st.integers(0, spec.size - 1))
        v = fourier_vector(spec.size, j)
        lam = circulant_eigenvalue(spec, j)
        assert np.allclose(spec.dense() @ v, lam * v, atol=1e-10 * max(1.0, spec.abs_sum))

    def test_index_out_of_range(self):
        spec = CirculantSpec.from_row([1, 0, 0])
        with pytest.raises(IndexError):
            circulant_eigenvalue(spec, 3)

    def test_large_size_keeps_phase_accurate(self):
        # k*j reduced mod N: a pure shift has eigenvalues exactly on the unit circle
        n = 2**20
        spec = CirculantSpec(n, {1: Fraction(1)})
        lam = circulant_eigenvalues(spec, [n - 1, n // 2])
        assert lam[1] == pytest.approx(-1.0)
        assert lam[0] == pytest.approx(np.exp(-2j * np.pi / n), abs=1e-15)


hermitian_blocks = st.tuples(
    st.floats(1e-3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3)
)


class TestDecouple2x2:
    @settings(max_examples=200, deadline=None)
    @given(hermitian_blocks)
    def test_matches_eigvalsh(self, entries):
        a, br, bi, d = entries
        b = complex(br, bi) * math.sqrt(a * d) / (1 + abs(complex(br, bi)))
        block = Block2x2.hermitian(a, b, d)
        pair = decouple_2x2(block)
        ref = np.linalg.eigvalsh(block.dense())
        scale = max(abs(ref))
        assert pair.lambda_plus == pytest.approx(ref[1], abs=1e-12 * scale)
        assert pair.lambda_minus == pytest.approx(ref[0], abs=1e-12 * scale)
        assert pair.lambda_plus + pair.lambda_minus == pytest.approx(2 * pair.K, rel=1e-12)

    def test_tiny_determinant_keeps_relative_accuracy(self):
        # exact eigenvalues 1e8 and 1e-8; K(1 - L) would lose everything
        a, d = 1e8, 1e-8 + 1e-24
        block = Block2x2.hermitian(a, 0.0, d)
        pair = decouple_2x2(block, det=a * d)
        assert pair.lambda_minus == pytest.approx(d, rel=1e-14)

    def test_nearly_equal_eigenvalues(self):
        # a d - |b|^2 rounds to 1, so the gap must come from the discriminant form
        pair = decouple_2x2(Block2x2.hermitian(1.0, 1e-12, 1.0))
        assert pair.lambda_plus - 1.0 == pytest.approx(1e-12, rel=1e-4)
        assert pair.lambda_minus - 1.0 == pytest.approx(-1e-12, rel=1e-4)

    def test_zero_block(self):
        pair = decouple_2x2(Block2x2(0, 0, 0, 0))
        assert (pair.lambda_plus, pair.lambda_minus) == (0.0, 0.0)

    def test_degenerate_pencil(self):
        with pytest.raises(DegeneratePencilError):
            decouple_2x2(Block2x2(1, 1, 1, -1), det=-2.0)

    def test_negative_radicand_raises(self):
        # K^2 < M is impossible for Hermitian blocks, so feed an inconsistent det
        with pytest.raises(DomainError):
            decouple_2x2(Block2x2.hermitian(1.0, 0.0, 1.0), det=2.0)

    def test_radicand_clamp(self):
        assert stable_sqrt_radicand(-1e-14) == 0.0
        with pytest.raises(DomainError):
            stable_sqrt_radicand(-1e-9)


class TestAmplitudeRatio:
    def test_eigenvector_ratio(self):
        block = Block2x2.hermitian(2.0, 1.0, 3.0)
        for lam in np.linalg.eigvalsh(block.dense()):
            rho = amplitude_ratio(lam, block)
            # (A - lam) U + B W = 0 has U/W = B/(lam - A)
            assert (block.a - lam) * rho + block.b == pytest.approx(0, abs=1e-12)

    def test_pole_and_undefined(self):
        with pytest.raises(AmplitudeRatioPoleError):
            amplitude_ratio(1.0, Block2x2.hermitian(1.0, 1.0, 2.0))
        with pytest.raises(UndefinedAmplitudeRatioError):
            amplitude_ratio(1.0, Block2x2.hermitian(1.0, 0.0, 2.0))

    def test_physical_ratio_strips_phase(self):
        block = Block2x2.hermitian(2.0, 3j, 1.0)
        assert physical_amplitude_ratio(5.0, block) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            physical_amplitude_ratio(5.0, Block2x2.hermitian(2.0, 1 + 1j, 1.0))
