import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from almost_commuting import linalg as la
from almost_commuting.errors import (
    DimensionMismatch,
    ImaginaryResidue,
    NearSingular,
    NonFinite,
    NotHermitian,
    NotSkew,
    NotUnitary,
    OddDimension,
    TooNegative,
)


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (M + M.conj().T) / 2


def random_unitary(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(M)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def pfaffian_recursive(A):
    """Expansion along the first row. Exponential, fine for n <= 8."""
    n = len(A)
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(1, n):
        keep = [k for k in range(n) if k not in (0, j)]
        minor = [[A[a][b] for b in keep] for a in keep]
        total += (-1) ** (j + 1) * A[0][j] * pfaffian_recursive(minor)
    return total


# eigenvalues of the seed-42 8x8 Hermitian, from companion-matrix roots and
# cross-checked against 30-digit mpmath
SEED42_EIGS = [-3.26178500646, -1.96911568136, -1.45608690558, -0.497054887978,
               0.402525195148, 1.5529337207, 2.537081504, 3.60766039552]


def seed42_hermitian():
    rng = np.random.default_rng(42)
    M = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    return (M + M.conj().T) / 2


class TestEig:
    def test_matches_frozen_oracle(self):
        eig = la.eig_hermitian(seed42_hermitian())
        np.testing.assert_allclose(eig.values, SEED42_EIGS, atol=1e-8)

    def test_matches_polynomial_roots(self):
        H = seed42_hermitian()
        roots = np.sort(np.roots(np.poly(H)).real)
        np.testing.assert_allclose(la.eig_hermitian(H).values, roots, atol=1e-8)

    def test_reconstruct_and_orthonormal(self):
        H = random_hermitian(np.random.default_rng(1), 12)
        eig = la.eig_hermitian(H)
        assert np.all(np.diff(eig.values) >= 0)
        np.testing.assert_allclose(eig.reconstruct(), H, atol=1e-12)
        np.testing.assert_allclose(eig.basis.conj().T @ eig.basis, np.eye(12), atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            la.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_nonfinite(self):
        with pytest.raises(NonFinite):
            la.eig_hermitian(np.array([[np.nan, 0], [0, 1]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatch):
            la.eig_hermitian(np.zeros((2, 3)))


class TestMatrixFunctions:
    def test_square_by_direct_product(self):
        H = random_hermitian(np.random.default_rng(2), 7)
        np.testing.assert_allclose(la.matrix_function_hermitian(H, np.square), H @ H, atol=1e-12)

    def test_cube_of_unitary(self):
        U = random_unitary(np.random.default_rng(3), 6)
        np.testing.assert_allclose(la.matrix_function_unitary(U, lambda z: z ** 3), U @ U @ U,
                                   atol=1e-12)

    def test_unitary_eig_unit_modulus(self):
        U = random_unitary(np.random.default_rng(4), 9)
        z, W = la.unitary_eig(U)
        np.testing.assert_allclose(np.abs(z), 1, atol=1e-13)
        np.testing.assert_allclose((W * z) @ W.conj().T, U, atol=1e-12)

    def test_unitary_eig_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            la.unitary_eig(2 * np.eye(3))

    def test_sqrt_psd(self):
        rng = np.random.default_rng(5)
        M = rng.normal(size=(6, 6))
        P = M @ M.T
        R = la.sqrt_psd(P)
        np.testing.assert_allclose(R @ R, P, atol=1e-10)

    def test_sqrt_psd_clamps_small_negatives(self):
        R = la.sqrt_psd(np.diag([1.0, -1e-9]))
        np.testing.assert_allclose(R, np.diag([1.0, 0.0]), atol=1e-12)

    def test_sqrt_psd_rejects_negative(self):
        with pytest.raises(TooNegative):
            la.sqrt_psd(np.diag([1.0, -0.1]))

    def test_polar(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        U, P = la.polar_unitary(X)
        assert la.is_unitary(U)
        np.testing.assert_allclose(U @ P, X, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(P) >= -1e-12)
        np.testing.assert_allclose(la.abs_matrix(X), P, atol=1e-12)


class TestNorms:
    def test_operator_norm_of_diagonal(self):
        assert la.operator_norm(np.diag([1, -3, 2])) == pytest.approx(3.0)

    def test_commutator_norm_of_paulis(self):
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.diag([1.0, -1.0]).astype(complex)
        assert la.commutator_norm(X, Z) == pytest.approx(2.0)

    def test_commutator_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            la.commutator_norm(np.eye(2), np.eye(3))

    def test_check_unitary(self):
        with pytest.raises(NotUnitary):
            la.check_unitary(np.array([[1, 1], [0, 1]], dtype=complex))


class TestPfaffian:
    def test_two_by_two(self):
        assert la.pfaffian(np.array([[0, 2.5], [-2.5, 0]])) == pytest.approx(2.5)

    def test_frozen_seed11(self):
        # recursive expansion gives -12.963070984322375
        rng = np.random.default_rng(11)
        A = rng.normal(size=(6, 6))
        A = A - A.T
        assert la.pfaffian(A).real == pytest.approx(-12.963070984322375, rel=1e-12)
        assert la.pfaffian_sign(A) == -1

    @pytest.mark.parametrize("seed", range(100))
    def test_sign_matches_recursive(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(6, 6))
        A = A - A.T
        ref = pfaffian_recursive(A.tolist())
        assert la.pfaffian_sign(A) == int(np.sign(ref))
        assert la.pfaffian(A).real == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_complex_matches_recursive(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        A = A - A.T
        assert la.pfaffian(A) == pytest.approx(pfaffian_recursive(A.tolist()), rel=1e-10)

    def test_block_diagonal_is_product(self):
        rng = np.random.default_rng(8)
        A = rng.normal(size=(4, 4))
        B = rng.normal(size=(6, 6))
        A, B = A - A.T, B - B.T
        C = np.zeros((10, 10))
        C[:4, :4] = A
        C[4:, 4:] = B
        assert la.pfaffian(C) == pytest.approx(la.pfaffian(A) * la.pfaffian(B), rel=1e-10)

    def test_odd_dimension(self):
        with pytest.raises(OddDimension):
            la.pfaffian(np.zeros((3, 3)))

    def test_not_skew(self):
        with pytest.raises(NotSkew):
            la.pfaffian(np.ones((2, 2)))

    def test_singular(self):
        A = np.zeros((4, 4))
        A[0, 1], A[1, 0] = 1, -1
        assert la.pfaffian(A) == 0
        with pytest.raises(NearSingular):
            la.pfaffian_sign(A)

    def test_imaginary_residue(self):
        with pytest.raises(ImaginaryResidue):
            la.pfaffian_sign(np.array([[0, 1j], [-1j, 0]]))

    def test_large_well_conditioned(self):
        # |Pf| is tiny relative to ||A||^n here, yet A is far from singular
        rng = np.random.default_rng(9)
        Q = np.linalg.qr(rng.normal(size=(160, 160)))[0]
        J = np.kron(np.eye(80), np.array([[0, 1], [-1, 0]]))
        D = np.diag(np.repeat(np.linspace(0.2, 3.0, 80), 2))
        A = Q @ (D @ J) @ Q.T
        A = (A - A.T) / 2
        sign = la.pfaffian_sign(A)
        assert sign == int(np.sign(np.linalg.det(Q)))


@settings(max_examples=40, deadline=None)
@given(half=st.integers(1, 5), seed=st.integers(0, 2 ** 32 - 1))
def test_pfaffian_squared_is_det(half, seed):
    rng = np.random.default_rng(seed)
    n = 2 * half
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = A - A.T
    pf = la.pfaffian(A)
    det = np.linalg.det(A)
    assert abs(pf * pf - det) <= 1e-9 * max(1.0, abs(det))


@settings(max_examples=40, deadline=None)
@given(half=st.integers(1, 5), seed=st.integers(0, 2 ** 32 - 1))
def test_pfaffian_congruence(half, seed):
    # Pf(B A B^T) = det(B) Pf(A)
    rng = np.random.default_rng(seed)
    n = 2 * half
    A = rng.normal(size=(n, n))
    A = A - A.T
    B = rng.normal(size=(n, n))
    lhs = la.pfaffian(B @ A @ B.T)
    rhs = np.linalg.det(B) * la.pfaffian(A)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2 ** 32 - 1))
def test_polar_factor_is_nearest_unitary(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U, _ = la.polar_unitary(X)
    V = random_unitary(rng, n)
    assert la.operator_norm(X - U) <= la.operator_norm(X - V) + 1e-10
