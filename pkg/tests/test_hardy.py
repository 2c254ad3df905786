import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke import (
    DomainError,
    NearBoundaryWarning,
    SymbolFunction,
    TruncatedOperator,
    block_size,
    catalog,
    composition_matrix,
    covariant_defect,
    cuntz_defect,
    evaluate,
    h2_basis_gram_defect,
    make_blaschke,
    monomial,
    spectral_norm,
    toeplitz_matrix,
)
from blaschke.hardy import derivative_range, isometry_column_defect, sample_grid

from conftest import blaschke_products


def e(k, M=512):
    return SymbolFunction.monomial(k, M)


class TestTruncatedOperator:
    def test_validation(self):
        with pytest.raises(DomainError):
            TruncatedOperator(np.eye(6))
        with pytest.raises(DomainError):
            TruncatedOperator(np.eye(12))
        bad = np.eye(8)
        bad[0, 0] = np.nan
        with pytest.raises(DomainError):
            TruncatedOperator(bad)

    def test_read_only(self):
        T = TruncatedOperator(np.eye(8))
        assert T.cutoff == 8
        with pytest.raises(ValueError):
            T.entries[0, 0] = 2


class TestToeplitz:
    def test_basic_symbols(self):
        np.testing.assert_allclose(toeplitz_matrix(e(0, 16), 8).entries, np.eye(8), atol=1e-15)
        np.testing.assert_allclose(toeplitz_matrix(e(1, 16), 8).entries, np.eye(8, k=-1), atol=1e-15)
        np.testing.assert_allclose(toeplitz_matrix(e(-1, 16), 8).entries, np.eye(8, k=1), atol=1e-15)

    def test_grid_requirement(self):
        with pytest.raises(DomainError):
            toeplitz_matrix(e(1, 8), 8)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), log_n=st.integers(3, 6))
    def test_structure_and_adjoint(self, seed, log_n):
        rng = np.random.default_rng(seed)
        N = 2**log_n
        a = SymbolFunction(rng.standard_normal(2 * N) + 1j * rng.standard_normal(2 * N))
        T = toeplitz_matrix(a, N).entries
        for k in range(-N + 1, N):
            d = np.diagonal(T, -k)
            assert np.all(d == d[0])
            assert d[0] == a.coeff(k)
        np.testing.assert_array_equal(toeplitz_matrix(a.conj(), N).entries, T.conj().T)


class TestComposition:
    def test_p2(self):
        C = composition_matrix(monomial(2), 8).entries
        want = np.zeros((8, 8))
        for k in range(4):
            want[2 * k, k] = 1
        np.testing.assert_array_equal(C, want)

    def test_rotation(self):
        lam = np.exp(0.3j)
        C = composition_matrix(make_blaschke(lam, [0]), 8).entries
        np.testing.assert_allclose(C, np.diag(lam ** np.arange(8)), atol=1e-15)

    def test_r1_column_against_quadrature(self):
        # first Taylor coefficients of R1 by a dense Riemann sum at 1e5 points
        C = composition_matrix(catalog.R1(), 64)
        K = 100_000
        zeta = np.exp(2j * np.pi * np.arange(K) / K)
        vals = evaluate(catalog.R1(), zeta)
        j = np.arange(64)
        coef = np.array([np.mean(vals * zeta ** (-int(m))) for m in j])
        assert np.max(np.abs(C.entries[:, 1] - coef)) <= 1e-9
        assert C.metadata["grid"] >= 512 and C.metadata["tail_estimate"] < 1e-12

    def test_grid_formula(self):
        M, tail = sample_grid(catalog.R1(), 64)
        assert M >= 16 * 2 * 64 and M & (M - 1) == 0
        assert tail < 1e-12

    def test_near_boundary_warns_and_grows(self):
        with pytest.warns(NearBoundaryWarning):
            B = make_blaschke(1, [0.97])
        with pytest.warns(NearBoundaryWarning):
            M, tail = sample_grid(B, 64)
        assert tail < 1e-12 or M == 2**16

    def test_columns_of_inner_powers_are_unit(self):
        C = composition_matrix(catalog.R4(), 128).entries
        b = block_size(catalog.R4(), 128)
        np.testing.assert_allclose(np.linalg.norm(C[:, :b], axis=0), 1, atol=1e-12)


class TestSpectralNorm:
    def test_matches_svd(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        A = A @ np.diag(0.5 ** np.arange(20)) @ A.conj().T
        assert spectral_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)

    def test_deterministic_and_zero(self):
        A = np.arange(16.0).reshape(4, 4)
        assert spectral_norm(A) == spectral_norm(A)
        assert spectral_norm(np.zeros((3, 3))) == 0.0


class TestBlock:
    def test_monomial_is_quarter(self):
        assert block_size(monomial(2), 64) == 16
        assert block_size(monomial(2), 256) == 64

    def test_bounded_by_derivative_range(self):
        lo, hi = derivative_range(catalog.R1())
        assert lo == pytest.approx(2 / 3, rel=1e-6) and hi == pytest.approx(6, rel=1e-6)
        assert block_size(catalog.R1(), 256) == 21


class TestCovariant:
    def test_p2_examples(self):
        P2 = monomial(2)
        assert covariant_defect(P2, e(1), 64) <= 1e-14
        assert covariant_defect(P2, e(2), 64) <= 1e-12

    def test_r1(self):
        assert covariant_defect(catalog.R1(), e(1), 256) <= 1e-6

    def test_bandwidth_guard(self):
        with pytest.raises(DomainError):
            covariant_defect(catalog.R1(), e(20), 64)

    def test_literal_quarter_block_is_contaminated(self):
        # On the first N/4 columns B^k already reaches past the cutoff for R1.
        assert covariant_defect(catalog.R1(), e(2), 256, block=64) > 1e-3
        assert covariant_defect(catalog.R1(), e(2), 256) <= 1e-12

    @pytest.mark.parametrize("k", [1, -1, 2])
    def test_decay_with_cutoff(self, k):
        d64 = covariant_defect(catalog.R3(), e(k), 64)
        d256 = covariant_defect(catalog.R3(), e(k), 256)
        assert d256 <= max(0.5 * d64, 1e-12)

    @settings(max_examples=8, deadline=None)
    @given(B=blaschke_products(1, 3, radius=0.6), seed=st.integers(0, 2**32 - 1))
    def test_random_products(self, B, seed):
        rng = np.random.default_rng(seed)
        c = rng.standard_normal((5, 2))
        a = SymbolFunction.from_coefficients({k: complex(*c[k + 2]) for k in range(-2, 3)}, 256)
        assert covariant_defect(B, a, 128) <= 1e-8


class TestCuntz:
    def test_p2(self):
        d = cuntz_defect(monomial(2), 64)
        assert d.offdiag <= 1e-12 and d.completeness <= 1e-12

    @pytest.mark.parametrize("name", ["R1", "R4"])
    def test_example_products(self, name):
        d = cuntz_defect(getattr(catalog, name)(), 256)
        assert d.offdiag <= 1e-6 and d.completeness <= 1e-6

    def test_cutoff_guard(self):
        with pytest.raises(DomainError):
            cuntz_defect(monomial(5), 64)

    @pytest.mark.parametrize("name", ["R1", "R2", "R3", "R4"])
    def test_isometry_columns(self, name):
        assert isometry_column_defect(getattr(catalog, name)(), 256) <= 1e-8
        assert isometry_column_defect(monomial(2), 64) <= 1e-8


class TestBasisGram:
    def test_examples(self):
        assert h2_basis_gram_defect(monomial(2), 64, 3) <= 1e-15
        assert h2_basis_gram_defect(catalog.R1(), 256, 3) <= 1e-8
        assert h2_basis_gram_defect(catalog.R2(), 256, 3) <= 1e-8

    def test_capacity_guard(self):
        with pytest.raises(DomainError):
            h2_basis_gram_defect(monomial(2), 16, 4)
