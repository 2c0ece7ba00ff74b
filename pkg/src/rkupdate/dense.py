"""Dense complex linear algebra kernels.

Factorizations, orthonormalization, spectral decompositions and matrix
functions of small matrices.  Everything is dense complex double precision;
Hermitian structure is an explicit flag.  The heavy lifting is delegated to
LAPACK through numpy/scipy; this module owns the contracts (tolerances,
error conditions, fallbacks).
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._validation import as_matrix, require_square
from .errors import (
    IllConditionedEigenbasis,
    RankDeficient,
    SingularityOnSpectrum,
    SingularShift,
)

__all__ = [
    "TOL_ORTH", "TOL_SOLVE", "TOL_PIVOT", "TOL_DEFLATE", "TOL_AXIS", "COND_CAP",
    "qr_orthonormalize", "shifted_factorize", "ShiftedFactorization",
    "spectral_decompose", "SpectralDecomposition",
    "funm_small", "funm_block_triangular", "eval_rational_pf", "norm2",
]

TOL_ORTH = 1e-12
TOL_SOLVE = 1e-12
TOL_PIVOT = 1e-14
TOL_DEFLATE = 1e-12
TOL_AXIS = 1e-12
#: eigenvector condition cap for general-similarity matrix functions
COND_CAP = 1.0 / np.sqrt(np.finfo(float).eps)


def norm2(M):
    """Spectral norm; zero for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def qr_orthonormalize(W, reference_norms=None, step=None):
    """Orthonormal basis of the columns of W with deterministic phases.

    Raises :class:`RankDeficient` when a diagonal entry of R falls below
    ``TOL_DEFLATE`` times the reference column norm (by default the norms of
    W's own columns; callers orthogonalizing against an outer basis pass the
    pre-projection norms so cancellation is detected).
    """
    W = as_matrix(W, "W")
    n, k = W.shape
    if k > n:
        raise ValueError("more columns than rows; cannot orthonormalize")
    if reference_norms is None:
        reference_norms = np.linalg.norm(W, axis=0)
    reference_norms = np.asarray(reference_norms, dtype=float)
    floor = np.finfo(float).tiny + np.finfo(float).eps * max(1.0, reference_norms.max(initial=0.0))
    Q, R = np.linalg.qr(W, mode="reduced")
    rdiag = np.abs(np.diagonal(R))
    bad = rdiag < TOL_DEFLATE * np.maximum(reference_norms, floor)
    if np.any(bad):
        raise RankDeficient(
            f"column {int(np.nonzero(bad)[0][0])} lost rank during orthonormalization",
            step=step,
        )
    # normalize so that R has a real positive diagonal
    phases = np.diagonal(R) / rdiag
    return Q * phases.conj()


@dataclass(frozen=True)
class ShiftedFactorization:
    """LU factorization of A - shift*I, reusable for many right-hand sides.

    The same factorization serves both (A - shift I) X = Y and its adjoint
    (A - shift I)* X = Y, so pole-conjugate systems never need a second LU.
    """

    shift: complex
    lu: tuple
    scale: float

    def solve(self, Y, adjoint=False):
        Y = np.asarray(Y, dtype=complex)
        return sla.lu_solve(self.lu, Y, trans=2 if adjoint else 0)


def shifted_factorize(A, xi):
    """Factor A - xi*I; raises :class:`SingularShift` when xi is (numerically)
    an eigenvalue."""
    A = require_square(A)
    xi = complex(xi)
    n = A.shape[0]
    M = A - xi * np.eye(n, dtype=complex)
    scale = max(np.abs(A).max(), abs(xi), 1e-300)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diagonal(lu))
    if pivots.min(initial=np.inf) < TOL_PIVOT * scale:
        raise SingularShift(f"shift {xi} is numerically an eigenvalue")
    return ShiftedFactorization(shift=xi, lu=(lu, piv), scale=scale)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    transform: np.ndarray
    kind: str  # "hermitian-unitary" or "general-similarity"


def spectral_decompose(A, hermitian=False):
    """Eigendecomposition with the invariants the rest of the package relies on.

    Hermitian path: real ascending eigenvalues, unitary transform.  General
    path: similarity transform whose condition number must stay below
    ``COND_CAP`` (otherwise :class:`IllConditionedEigenbasis`).
    """
    A = require_square(A)
    if hermitian:
        w, Q = np.linalg.eigh(A)
        return SpectralDecomposition(w, Q, "hermitian-unitary")
    w, V = np.linalg.eig(A)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > COND_CAP:
        raise IllConditionedEigenbasis(
            f"eigenvector condition {cond:.2e} exceeds cap {COND_CAP:.2e}"
        )
    return SpectralDecomposition(w, V, "general-similarity")


def _check_spectrum(w, kind, scale, hermitian):
    """Domain checks for f on the spectrum; raises SingularityOnSpectrum."""
    tol = TOL_AXIS * max(scale, 1e-300)
    if kind == "sign":
        if np.abs(w.real).min(initial=np.inf) < tol:
            raise SingularityOnSpectrum("eigenvalue too close to the imaginary axis for sign")
    elif kind in ("inv-sqrt", "inv-power"):
        if hermitian:
            if w.real.min(initial=np.inf) < tol:
                raise SingularityOnSpectrum(f"{kind} needs a positive definite spectrum")
        elif w.real.min(initial=np.inf) < tol:
            raise SingularityOnSpectrum(f"{kind} needs eigenvalues with positive real part")
    elif kind == "sqrt":
        if not hermitian and w.real.min(initial=np.inf) < -tol:
            raise SingularityOnSpectrum("sqrt needs eigenvalues off the negative axis")
        if hermitian and w.real.min(initial=np.inf) < -tol:
            raise SingularityOnSpectrum("sqrt of an indefinite Hermitian matrix")
    elif kind == "log1p-over-z":
        if (w.real + 1.0).min(initial=np.inf) < tol:
            raise SingularityOnSpectrum("log(1+z)/z needs spectrum right of -1")


def eval_rational_pf(M, pf):
    """Evaluate a partial-fraction expansion at a square matrix via shifted solves."""
    M = require_square(M, "M")
    n = M.shape[0]
    I = np.eye(n, dtype=complex)
    F = np.zeros((n, n), dtype=complex)
    if len(pf.poly):
        # Horner on the polynomial part
        F = pf.poly[-1] * I
        for c in pf.poly[-2::-1]:
            F = F @ M + c * I
    for pole, mult, cs in zip(pf.poles, pf.mults, pf.coeffs):
        fac = shifted_factorize(M, pole)
        X = I
        for j in range(1, mult + 1):
            X = fac.solve(X)
            F = F + cs[j - 1] * X
    return F


def funm_small(A, f, hermitian=False):
    """f(A) for a small dense matrix via spectral decomposition.

    Rational kinds go through partial fractions (solves only).  The
    exponential falls back to scaling-and-squaring when the eigenbasis is
    too ill conditioned; other kinds raise in that case.
    """
    A = require_square(A)
    scale = np.abs(A).max(initial=0.0)
    if f.kind == "identity":
        return A.copy()
    if f.kind in ("rational", "inverse"):
        return eval_rational_pf(A, f.partial_fractions())
    if hermitian:
        w, Q = np.linalg.eigh(A)
        _check_spectrum(w + 0j, f.kind, scale, hermitian=True)
        fw = f.scalar(w + 0j)
        F = (Q * fw) @ Q.conj().T
        if np.abs(fw.imag).max(initial=0.0) <= 1e-14 * max(1.0, np.abs(fw).max()):
            F = 0.5 * (F + F.conj().T)
        return F
    try:
        dec = spectral_decompose(A, hermitian=False)
    except IllConditionedEigenbasis:
        if f.kind == "exp":
            return sla.expm(A)
        raise
    w, V = dec.eigenvalues, dec.transform
    _check_spectrum(w, f.kind, scale, hermitian=False)
    fw = f.scalar(w)
    return np.linalg.solve(V.T, ((V * fw)).T).T


def funm_block_triangular(A11, A12, A22, f, hermitian11=False, hermitian22=False):
    """The three nonzero blocks of f([[A11, A12], [0, A22]]).

    The diagonal blocks are evaluated directly by :func:`funm_small`; the
    coupling block comes from the assembled matrix (partial fractions for
    rational kinds, spectral calculus otherwise with the expm fallback).
    """
    A11 = require_square(A11, "A11")
    A22 = require_square(A22, "A22")
    A12 = as_matrix(A12, "A12")
    n1, n2 = A11.shape[0], A22.shape[0]
    if A12.shape != (n1, n2):
        raise ValueError(f"A12 must be {n1}x{n2}, got {A12.shape}")
    F11 = funm_small(A11, f, hermitian=hermitian11)
    F22 = funm_small(A22, f, hermitian=hermitian22)
    if f.kind == "identity":
        return F11, A12.copy(), F22
    if norm2(A12) == 0.0:
        return F11, np.zeros_like(A12), F22
    Z = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    Z[:n1, :n1] = A11
    Z[:n1, n1:] = A12
    Z[n1:, n1:] = A22
    F = funm_small(Z, f, hermitian=False)
    return F11, F[:n1, n1:], F22
