"""Block rational Arnoldi process.

Builds orthonormal bases of the rational block Krylov subspace

    q_m(A)^{-1} span{B, AB, ..., A^{m-1} B},
    q_m(z) = prod over finite poles (z - xi_j),

growing one block per step.  Orthogonalization is classical Gram-Schmidt
with one unconditional reorthogonalization pass (CGS2).  Compressions
U* (Op U) are formed by explicit projection and extended incrementally.

Step rules (xi_j = pole of step j):

    j = 1, xi finite:   W = (A - xi I)^{-1} B
    j = 1, xi = inf:    W = B
    j > 1, xi = inf:    W = A U_{j-1}
    j > 1, xi = 0:      W = A^{-1} U_{j-1}
    j > 1, otherwise:   W = (A - xi I)^{-1} A U_{j-1}

The pole-zero step drops the A multiplication because (A - 0)^{-1} A is the
identity on the previous block; both rules generate the same subspace.
Rank loss is a hard error (no deflation).

Shifted factorizations are cached per pole value; one LU of A - xi I also
serves the adjoint systems (A - xi I)* X = Y, so an adjoint-side build with
the conjugated poles reuses the primal side's factorizations.
"""

import numpy as np

from ._validation import as_block, is_infinite_pole, require_square
from .dense import qr_orthonormalize, shifted_factorize
from .poles import PolePlan

__all__ = ["FactorizationCache", "KrylovBasis", "build_basis", "adjoint_basis",
           "rational_arnoldi_step"]


class FactorizationCache:
    """Shifted LU factorizations of one operator, keyed by pole value."""

    def __init__(self, A):
        self.A = require_square(A)
        self._fac = {}

    def factorization(self, xi):
        key = complex(xi)
        fac = self._fac.get(key)
        if fac is None:
            fac = shifted_factorize(self.A, key)
            self._fac[key] = fac
        return fac

    def solve(self, xi, Y):
        return self.factorization(xi).solve(Y)

    def solve_adjoint(self, xi, Y):
        """Solve (A - xi I)* X = Y reusing the factorization of A - xi I."""
        return self.factorization(xi).solve(Y, adjoint=True)

    def __len__(self):
        return len(self._fac)


class KrylovBasis:
    """Orthonormal block basis with its compression, grown step by step.

    The basis of step m-1 occupies the leading (m-1)*ell columns of the
    step-m basis (bases grow strictly by appending), which the difference
    estimator of the updater relies on.
    """

    def __init__(self, A, seed, *, adjoint=False, cache=None, operator_tag=None):
        self._A = require_square(A)
        n = self._A.shape[0]
        self._seed = as_block(seed, n, "seed")
        self._adjoint = bool(adjoint)
        self._A_H = self._A.conj().T if adjoint else None
        self.cache = cache if cache is not None else FactorizationCache(self._A)
        self.block_size = self._seed.shape[1]
        self.operator_tag = operator_tag or ("A*" if adjoint else "A")
        self.basis = np.zeros((n, 0), dtype=complex)
        self.compression = np.zeros((0, 0), dtype=complex)
        self.poles_used = ()
        self._op_basis = np.zeros((n, 0), dtype=complex)  # Op @ basis, column-aligned

    @property
    def n(self):
        return self._A.shape[0]

    @property
    def steps(self):
        return len(self.poles_used)

    @property
    def dimension(self):
        return self.basis.shape[1]

    def _matvec(self, X):
        return (self._A_H if self._adjoint else self._A) @ X

    def _solve(self, xi, Y):
        # adjoint side works with Op = A*, pole xi: (A* - xi I) = (A - conj(xi) I)*
        if self._adjoint:
            return self.cache.solve_adjoint(np.conj(xi), Y)
        return self.cache.solve(xi, Y)

    def advance(self, xi):
        """Append one block for pole xi; returns self."""
        j = self.steps + 1
        if is_infinite_pole(xi):
            xi = np.inf
            if j == 1:
                W = self._seed.copy()
            else:
                W = self._matvec(self.basis[:, -self.block_size:])
        else:
            xi = complex(xi)
            if j == 1:
                W = self._solve(xi, self._seed)
            elif xi == 0:
                W = self._solve(xi, self.basis[:, -self.block_size:])
            else:
                W = self._solve(xi, self._matvec(self.basis[:, -self.block_size:]))
        ref = np.linalg.norm(W, axis=0)
        if self.dimension:
            W = W - self.basis @ (self.basis.conj().T @ W)
            W = W - self.basis @ (self.basis.conj().T @ W)
        Q = qr_orthonormalize(W, reference_norms=ref, step=j)
        OpQ = self._matvec(Q)
        k = self.dimension
        new = np.zeros((k + self.block_size, k + self.block_size), dtype=complex)
        new[:k, :k] = self.compression
        new[:k, k:] = self.basis.conj().T @ OpQ
        new[k:, :k] = Q.conj().T @ self._op_basis
        new[k:, k:] = Q.conj().T @ OpQ
        self.basis = np.hstack([self.basis, Q])
        self._op_basis = np.hstack([self._op_basis, OpQ])
        self.compression = new
        self.poles_used = self.poles_used + (xi,)
        return self

    def block_product(self, X):
        """basis* X for a conforming tall block."""
        return self.basis.conj().T @ X


def rational_arnoldi_step(state, xi):
    """One step of the block rational Arnoldi process (functional alias)."""
    return state.advance(xi)


def _expand(plan, m):
    if isinstance(plan, PolePlan):
        if m is None:
            return plan.expand(len(plan.base_sequence()))
        return plan.expand(m)
    seq = tuple(plan)
    if m is not None and len(seq) != m:
        seq = PolePlan(seq).expand(m)
    return seq


def build_basis(A, B, plan, m=None, cache=None, operator_tag="A"):
    """Orthonormal basis of q_m(A)^{-1} K_m(A, B) with compression U* A U."""
    poles = _expand(plan, m)
    basis = KrylovBasis(A, B, adjoint=False, cache=cache, operator_tag=operator_tag)
    for xi in poles:
        basis.advance(xi)
    return basis


def adjoint_basis(A, C, plan, m=None, cache=None, operator_tag="A*"):
    """Orthonormal basis of conj(q_m)(A*)^{-1} K_m(A*, C).

    Takes the *same* pole plan as the primal side; poles are conjugated
    internally, and each shifted solve reuses the primal factorization of
    A - xi I through its adjoint.
    """
    poles = _expand(plan, m)
    basis = KrylovBasis(A, C, adjoint=True, cache=cache, operator_tag=operator_tag)
    for xi in poles:
        if is_infinite_pole(xi):
            basis.advance(np.inf)
        else:
            basis.advance(np.conj(complex(xi)))
    return basis
