import numpy as np
import pytest

from rkupdate.arnoldi import FactorizationCache, KrylovBasis, adjoint_basis, build_basis
from rkupdate.dense import norm2
from rkupdate.errors import RankDeficient, SingularShift
from rkupdate.functions import PartialFractions
from rkupdate.poles import INF, PolePlan, extended_plan

from conftest import max_principal_angle, rand_complex, random_hermitian


class TestSeedRules:
    def test_infinite_first_pole_keeps_seed_block(self):
        A = np.diag([1.0, 2.0, 3.0])
        e1 = np.eye(3)[:, :1]
        basis = build_basis(A, e1, [INF])
        assert np.allclose(np.abs(basis.basis), e1, atol=1e-14)

    def test_finite_first_pole_solves(self):
        A = np.diag([1.0, 2.0])
        b = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
        basis = build_basis(A, b, [0.0])
        v = np.array([1.0, 0.5])
        v /= np.linalg.norm(v)
        got = basis.basis[:, 0]
        got = got / got[0] * abs(got[0])
        assert np.allclose(np.abs(basis.basis[:, 0]), v, atol=1e-14)

    def test_pole_zero_mid_sweep(self, rng):
        # the naive recurrence is the identity for a zero pole; the step must
        # still enlarge the space to q_m(A)^{-1} K_m(A, B)
        A = rand_complex(rng, 12, 12) + 4 * np.eye(12)
        B = rand_complex(rng, 12, 1)
        basis = build_basis(A, B, [INF, 0.0, 0.0])
        Ainv = np.linalg.inv(A)
        target = np.hstack([B, Ainv @ B, Ainv @ Ainv @ B])
        assert max_principal_angle(basis.basis, np.linalg.qr(target)[0]) <= 1e-10


class TestSpans:
    def test_all_infinite_equals_polynomial_krylov(self, rng):
        A = rand_complex(rng, 24, 24)
        B = rand_complex(rng, 24, 2)
        basis = build_basis(A, B, [INF] * 4)
        P = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(4)])
        assert max_principal_angle(basis.basis, np.linalg.qr(P)[0]) <= 1e-10

    def test_extended_plan_span(self, rng):
        A = rand_complex(rng, 16, 16) + 5 * np.eye(16)
        B = rand_complex(rng, 16, 1)
        basis = build_basis(A, B, extended_plan(4))
        Ainv = np.linalg.inv(A)
        P = np.hstack([Ainv @ Ainv @ B, Ainv @ B, B, A @ B])
        assert max_principal_angle(basis.basis, np.linalg.qr(P)[0]) <= 1e-10

    def test_rational_span_hermitian_block(self, rng):
        A, _ = random_hermitian(rng, 50)
        B = rand_complex(rng, 50, 2)
        basis = build_basis(A, B, [-1.0, -3.0, INF])
        q = np.linalg.inv((A + np.eye(50)) @ (A + 3 * np.eye(50)))
        P = q @ np.hstack([B, A @ B, A @ A @ B])
        assert max_principal_angle(basis.basis, np.linalg.qr(P)[0]) <= 1e-10

    def test_m1_pole_zero_spans_inverse(self, rng):
        A = rand_complex(rng, 10, 10) + 3 * np.eye(10)
        B = rand_complex(rng, 10, 1)
        basis = build_basis(A, B, [0.0])
        assert max_principal_angle(basis.basis, np.linalg.solve(A, B)) <= 1e-12


class TestInvariants:
    def test_orthonormality_and_compression(self, rng):
        A = rand_complex(rng, 40, 40)
        B = rand_complex(rng, 40, 2)
        basis = build_basis(A, B, [-1.0, INF, -2.0 + 1j, 0.0])
        k = basis.dimension
        assert norm2(basis.basis.conj().T @ basis.basis - np.eye(k)) <= 1e-12
        G = basis.basis.conj().T @ A @ basis.basis
        assert norm2(basis.compression - G) <= 1e-12 * max(norm2(A), 1.0)

    def test_nested_prefix_bitwise(self, rng):
        A = rand_complex(rng, 20, 20)
        B = rand_complex(rng, 20, 1)
        basis = KrylovBasis(A, B)
        basis.advance(-1.0)
        basis.advance(INF)
        snapshot = basis.basis.copy()
        basis.advance(-2.0)
        assert np.array_equal(basis.basis[:, :2], snapshot)

    def test_ritz_containment_hermitian(self, rng):
        A, w = random_hermitian(rng, 30, 0.5, 9.0)
        B = rand_complex(rng, 30, 1)
        basis = build_basis(A, B, [-1.0, INF, -0.5, INF])
        ritz = np.linalg.eigvalsh(0.5 * (basis.compression + basis.compression.conj().T))
        assert ritz.min() >= w.min() - 1e-12 * abs(w.max())
        assert ritz.max() <= w.max() + 1e-12 * abs(w.max())

    def test_rational_exactness_lemma(self, rng):
        # r(A) B = U r(G) U* B for r = p/q_m with deg p <= m-1, via partial fractions
        for n, m, seed in [(30, 3, 0), (60, 6, 1), (45, 4, 2)]:
            local = np.random.default_rng(seed)
            A = rand_complex(local, n, n)
            A /= norm2(A)
            B = rand_complex(local, n, 1)
            poles = [2.5 * np.exp(2j * np.pi * local.random()) for _ in range(m)]
            basis = build_basis(A, B, poles)
            pf = PartialFractions(
                poly=(0.0,), poles=tuple(poles), mults=(1,) * m,
                coeffs=tuple((complex(local.standard_normal() + 1j * local.standard_normal()),)
                             for _ in range(m)))
            n_eye = np.eye(n, dtype=complex)
            rA = sum(c[0] * np.linalg.solve(A - p * n_eye, n_eye)
                     for p, c in zip(pf.poles, pf.coeffs))
            G = basis.compression
            k_eye = np.eye(G.shape[0], dtype=complex)
            rG = sum(c[0] * np.linalg.solve(G - p * k_eye, k_eye)
                     for p, c in zip(pf.poles, pf.coeffs))
            lhs = rA @ B
            rhs = basis.basis @ (rG @ (basis.basis.conj().T @ B))
            assert norm2(lhs - rhs) <= 1e-9 * norm2(lhs)


class TestAdjoint:
    def test_hermitian_same_span(self, rng):
        A, _ = random_hermitian(rng, 25)
        B = rand_complex(rng, 25, 1)
        ub = build_basis(A, B, [-1.0, -3.0, INF])
        vb = adjoint_basis(A, B, [-1.0, -3.0, INF])
        assert max_principal_angle(ub.basis, vb.basis) <= 1e-10

    def test_adjoint_infinite_seed(self):
        A = np.diag([1.0, 2.0])
        e2 = np.eye(2)[:, 1:]
        vb = adjoint_basis(A, e2, [INF])
        assert np.allclose(np.abs(vb.basis), e2, atol=1e-14)

    def test_adjoint_orthonormal_complex_poles(self, rng):
        A = rand_complex(rng, 40, 40)
        C = rand_complex(rng, 40, 1)
        vb = adjoint_basis(A, C, [-1.0 + 2.0j, -1.0 - 2.0j])
        k = vb.dimension
        assert norm2(vb.basis.conj().T @ vb.basis - np.eye(k)) <= 1e-12

    def test_adjoint_spans_adjoint_space(self, rng):
        A = rand_complex(rng, 18, 18)
        C = rand_complex(rng, 18, 1)
        xi = -1.0 + 2.0j
        vb = adjoint_basis(A, C, [xi])
        target = np.linalg.solve((A - xi * np.eye(18)).conj().T, C)
        assert max_principal_angle(vb.basis, target) <= 1e-12

    def test_cache_shared_between_sides(self, rng):
        A = rand_complex(rng, 20, 20)
        B = rand_complex(rng, 20, 1)
        C = rand_complex(rng, 20, 1)
        cache = FactorizationCache(A)
        build_basis(A, B, [-1.0, -2.0, -1.0], cache=cache)
        adjoint_basis(A, C, [-1.0, -2.0, -1.0], cache=cache)
        assert len(cache) == 2  # one LU per distinct pole serves both sides


class TestBreakdown:
    def test_rank_deficient_seed(self, rng):
        A = rand_complex(rng, 10, 10)
        b = rand_complex(rng, 10, 1)
        with pytest.raises(RankDeficient) as exc:
            build_basis(A, np.hstack([b, b]), [INF])
        assert exc.value.step == 1

    def test_singular_shift(self):
        A = np.diag([1.0, 2.0, 3.0])
        with pytest.raises(SingularShift):
            build_basis(A, np.ones((3, 1)), [2.0])

    def test_space_saturation_is_breakdown(self, rng):
        A = rand_complex(rng, 3, 3)
        B = rand_complex(rng, 3, 1)
        with pytest.raises(RankDeficient):
            build_basis(A, B, [INF, INF, INF, INF])
