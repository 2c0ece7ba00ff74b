import numpy as np
import pytest
import scipy.linalg as sla

from rkupdate.dense import (
    funm_block_triangular,
    funm_small,
    norm2,
    qr_orthonormalize,
    shifted_factorize,
    spectral_decompose,
)
from rkupdate.errors import (
    IllConditionedEigenbasis,
    RankDeficient,
    SingularityOnSpectrum,
    SingularShift,
)
from rkupdate.functions import FunctionSpec

from conftest import rand_complex, random_hermitian


class TestQR:
    def test_scaled_unit_vector(self):
        Q = qr_orthonormalize(np.array([[2.0], [0.0]]))
        assert np.array_equal(Q, np.array([[1.0 + 0j], [0.0]]))

    def test_identity(self):
        Q = qr_orthonormalize(np.eye(3))
        assert np.allclose(Q, np.eye(3), atol=0)

    def test_random_orthonormal_and_range(self, rng):
        W = rand_complex(rng, 20, 4)
        Q = qr_orthonormalize(W)
        # Gram-matrix oracle
        assert norm2(Q.conj().T @ Q - np.eye(4)) <= 1e-12
        # projector reproduces the column space
        assert norm2(W - Q @ (Q.conj().T @ W)) <= 1e-12 * norm2(W)

    def test_rank_deficient(self, rng):
        b = rand_complex(rng, 10, 1)
        with pytest.raises(RankDeficient):
            qr_orthonormalize(np.hstack([b, b]))

    def test_zero_column(self):
        with pytest.raises(RankDeficient):
            qr_orthonormalize(np.zeros((5, 1)))


class TestShiftedFactorize:
    def test_diagonal_solve(self):
        fac = shifted_factorize(np.diag([1.0, 2.0]), 0.0)
        e1 = np.array([[1.0], [0.0]], dtype=complex)
        assert np.allclose(fac.solve(e1), e1, atol=1e-15)

    def test_exact_eigenvalue_shift(self):
        with pytest.raises(SingularShift):
            shifted_factorize(np.diag([1.0, 2.0]), 1.0)

    def test_residual(self, rng):
        A = rand_complex(rng, 30, 30)
        fac = shifted_factorize(A, -2.0)
        Y = rand_complex(rng, 30, 3)
        X = fac.solve(Y)
        assert norm2((A + 2.0 * np.eye(30)) @ X - Y) <= 1e-12 * norm2(Y)

    def test_adjoint_shares_factorization(self, rng):
        A = rand_complex(rng, 25, 25)
        xi = 1.5 - 0.7j
        fac = shifted_factorize(A, xi)
        Y = rand_complex(rng, 25, 2)
        X = fac.solve(Y, adjoint=True)
        M = (A - xi * np.eye(25)).conj().T
        assert norm2(M @ X - Y) <= 1e-12 * norm2(Y)


class TestSpectralDecompose:
    def test_hermitian_sorted_unitary(self):
        dec = spectral_decompose(np.diag([3.0, 1.0]), hermitian=True)
        assert np.allclose(dec.eigenvalues, [1.0, 3.0])
        assert dec.kind == "hermitian-unitary"
        assert norm2(dec.transform.conj().T @ dec.transform - np.eye(2)) <= 1e-12

    def test_rotation_generator(self):
        dec = spectral_decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert sorted(np.round(dec.eigenvalues.imag, 12)) == [-1.0, 1.0]
        assert np.allclose(dec.eigenvalues.real, 0.0, atol=1e-12)

    def test_hermitian_reconstruction(self, rng):
        A, _ = random_hermitian(rng, 40)
        dec = spectral_decompose(A, hermitian=True)
        R = (dec.transform * dec.eigenvalues) @ dec.transform.conj().T
        assert norm2(A - R) <= 1e-11 * norm2(A)

    def test_general_similarity_invariant(self, rng):
        A = rand_complex(rng, 15, 15)
        dec = spectral_decompose(A)
        assert norm2(A @ dec.transform - dec.transform * dec.eigenvalues) \
            <= 1e-11 * norm2(A)

    def test_ill_conditioned_raises(self):
        J = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-15]])
        with pytest.raises(IllConditionedEigenbasis):
            spectral_decompose(J)


class TestFunmSmall:
    def test_nilpotent_exponential(self):
        # non-diagonalizable: exercises the scaling-and-squaring fallback
        F = funm_small(np.array([[0.0, 1.0], [0.0, 0.0]]), FunctionSpec.exp())
        assert np.allclose(F, [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)

    def test_sign_diag(self):
        F = funm_small(np.diag([-3.0, 5.0]), FunctionSpec.sign(), hermitian=True)
        assert np.allclose(F, np.diag([-1.0, 1.0]), atol=1e-14)

    def test_inv_sqrt_diag(self):
        F = funm_small(np.diag([4.0, 9.0]), FunctionSpec.inv_sqrt(), hermitian=True)
        assert np.allclose(F, np.diag([0.5, 1.0 / 3.0]), atol=1e-14)

    def test_identity_and_one(self, rng):
        A = rand_complex(rng, 12, 12)
        assert norm2(funm_small(A, FunctionSpec.identity()) - A) <= 1e-13 * norm2(A)
        one = FunctionSpec.custom(lambda z: np.ones_like(z), label="1")
        assert norm2(funm_small(A, one) - np.eye(12)) <= 1e-13 * norm2(A)

    def test_hermitian_commutes_with_diagonalization(self, rng):
        A, w = random_hermitian(rng, 20, 0.5, 4.0)
        F = funm_small(A, FunctionSpec.inv_sqrt(), hermitian=True)
        dec = spectral_decompose(A, hermitian=True)
        F2 = (dec.transform * dec.eigenvalues**-0.5) @ dec.transform.conj().T
        assert norm2(F - F2) <= 1e-11 * norm2(F)

    def test_exp_fallback_agrees(self, rng):
        A = rand_complex(rng, 10, 10)
        assert norm2(funm_small(A, FunctionSpec.exp()) - sla.expm(A)) \
            <= 1e-10 * norm2(sla.expm(A))

    def test_sign_near_axis_raises(self):
        with pytest.raises(SingularityOnSpectrum):
            funm_small(np.diag([1e-16, 1.0]), FunctionSpec.sign(), hermitian=True)

    def test_inv_sqrt_indefinite_raises(self):
        with pytest.raises(SingularityOnSpectrum):
            funm_small(np.diag([-1.0, 1.0]), FunctionSpec.inv_sqrt(), hermitian=True)


class TestFunmBlockTriangular:
    def test_zero_coupling(self, rng):
        A11 = rand_complex(rng, 4, 4)
        A22 = rand_complex(rng, 3, 3)
        _, F12, _ = funm_block_triangular(A11, np.zeros((4, 3)), A22, FunctionSpec.exp())
        assert np.array_equal(F12, np.zeros((4, 3)))

    def test_identity_map(self, rng):
        A11 = rand_complex(rng, 4, 4)
        A12 = rand_complex(rng, 4, 4)
        A22 = rand_complex(rng, 4, 4)
        F11, F12, F22 = funm_block_triangular(A11, A12, A22, FunctionSpec.identity())
        assert np.array_equal(F12, A12)

    def test_assembled_oracle_exp(self, rng):
        A11 = rand_complex(rng, 6, 6)
        A12 = rand_complex(rng, 6, 6)
        A22 = rand_complex(rng, 6, 6)
        F11, F12, F22 = funm_block_triangular(A11, A12, A22, FunctionSpec.exp())
        Z = np.block([[A11, A12], [np.zeros((6, 6)), A22]])
        F = funm_small(Z, FunctionSpec.exp())
        assert norm2(F12 - F[:6, 6:]) <= 1e-10 * norm2(F)
        # diagonal blocks consistent with direct evaluation
        assert norm2(F11 - F[:6, :6]) <= 1e-12 * max(norm2(F11), 1.0)
        assert norm2(F22 - F[6:, 6:]) <= 1e-12 * max(norm2(F22), 1.0)
