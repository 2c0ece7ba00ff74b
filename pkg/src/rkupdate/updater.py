"""Subspace projection for low-rank updates of matrix functions.

Approximates f(A + B C*) - f(A) by U_m X_m(f) V_m* where U_m, V_m are
orthonormal bases of rational block Krylov subspaces for (A, B) and
(A*, C), X_m(f) is the coupling block of f of a small block upper
triangular matrix, and convergence is monitored by the difference of
padded coupling matrices of nested bases.

In the Hermitian mode (A = A*, D = B J B*, conjugate-closed poles) the
right basis aliases the left one and X_m(f) collapses to the difference of
two small Hermitian matrix functions.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_block, require_square
from .arnoldi import FactorizationCache, KrylovBasis
from .dense import _check_spectrum, funm_block_triangular, funm_small, norm2
from .dpr1 import funm_diff_rank1
from .errors import SingularityOnSpectrum
from .poles import PolePlan

__all__ = ["project_update", "update_hermitian", "run_update",
           "estimate_error", "padded_difference_norm",
           "UpdateState", "UpdateReport"]


def project_update(left, right, B, C, f):
    """Coupling matrix X_m(f) from a pair of bases (general, two-sided form).

    X_m(f) is the (1,2) block of f([[G_m, (U*B)(V*C)*],
                                    [0,   H_m* + (V*B)(V*C)*]]).
    """
    UB = left.block_product(B)
    VC = right.block_product(C)
    VB = right.block_product(B)
    E12 = UB @ VC.conj().T
    M22 = right.compression.conj().T + VB @ VC.conj().T
    _, X, _ = funm_block_triangular(left.compression, E12, M22, f)
    return X


def update_hermitian(left, B, J, f):
    """Coupling matrix in the Hermitian mode:
    X_m(f) = f(G_m + (U*B) J (U*B)*) - f(G_m).

    For a positive rank-one update the difference is evaluated through the
    secular (diagonal-plus-rank-one) decomposition in the eigenbasis of G_m,
    which keeps the difference accurate on badly graded spectra; otherwise
    the two Hermitian matrix functions are formed and subtracted.
    """
    UB = left.block_product(B)
    J = np.asarray(J, dtype=complex)
    G = 0.5 * (left.compression + left.compression.conj().T)
    if J.shape == (1, 1) and J[0, 0].real > 0 and abs(J[0, 0].imag) == 0.0 \
            and UB.shape[1] == 1:
        lam, Q = np.linalg.eigh(G)
        w = Q.conj().T @ UB[:, 0]
        scale = max(np.abs(G).max(initial=0.0), float(J[0, 0].real) * norm2(UB) ** 2)
        try:
            rho = J[0, 0].real
            lam_new = np.linalg.eigvalsh(G + rho * np.outer(UB[:, 0], UB[:, 0].conj()))
            _check_spectrum(lam + 0j, f.kind, scale, hermitian=True)
            _check_spectrum(lam_new + 0j, f.kind, scale, hermitian=True)
            core = funm_diff_rank1(lam, w, rho, f.scalar)
            return Q @ core @ Q.conj().T
        except ValueError:
            pass
    S = UB @ J @ UB.conj().T
    S = 0.5 * (S + S.conj().T)
    F_plus = funm_small(G + S, f, hermitian=True)
    F_base = funm_small(G, f, hermitian=True)
    return F_plus - F_base


def padded_difference_norm(X_new, X_old):
    """Spectral norm of X_new - [[X_old, 0], [0, 0]] (nested-basis identity)."""
    X_new = np.asarray(X_new)
    D = X_new.copy()
    if X_old is not None and X_old.size:
        r, c = X_old.shape
        D[:r, :c] -= X_old
    return norm2(D)


@dataclass
class UpdateState:
    """Evolving approximation of f(A + BC*) - f(A)."""

    left: KrylovBasis
    right: KrylovBasis
    coupling: np.ndarray
    coupling_history: list
    hermitian_mode: bool
    estimate_history: list = None

    def materialize(self):
        """Dense U_m X_m V_m* (desk scale only)."""
        return self.left.basis @ self.coupling @ self.right.basis.conj().T

    def factors(self):
        """(U_m X_m, V_m) so that the update is the product of the pair."""
        return self.left.basis @ self.coupling, self.right.basis


@dataclass
class UpdateReport:
    final_rank: int
    iterations: int
    estimates: list
    true_errors: list = None
    converged: bool = False
    stagnation_warning: bool = False
    poles: tuple = ()

    def summary(self):
        final = self.estimates[-1] if self.estimates else float("nan")
        if self.true_errors:
            final = self.true_errors[-1]
        return (f"converged={str(self.converged).lower()} "
                f"iterations={self.iterations} final_error={final:.16e}")


def estimate_error(state, d):
    """Difference estimator ||X_m - padded X_{m-d}|| from the stored history."""
    hist = state.coupling_history
    if len(hist) <= d:
        raise ValueError(f"need at least {d + 1} stored couplings")
    if hist[-1] is None or hist[-1 - d] is None:
        raise ValueError("coupling history has a gap (singularity retry) at this lag")
    return padded_difference_norm(hist[-1], hist[-1 - d])


def _zero_report(plan_poles):
    return UpdateReport(final_rank=0, iterations=0, estimates=[0.0],
                        true_errors=[], converged=True, poles=tuple(plan_poles))


def run_update(A, B, C=None, *, f, plan, m_max, tol, d=2, J=None,
               true_update=None, keep_history=True):
    """Grow the update approximation until the difference estimator drops
    below tol or m_max steps are reached.

    Hermitian mode is selected by passing J (then D = B J B*, A must be
    Hermitian, and the pole plan must be closed under conjugation); the
    general mode takes C with D = B C*.  ``true_update`` (a dense reference
    for f(A+D)-f(A)) enables per-step true-error tracking for experiments.

    The estimate recorded at step m is ||X_m - padded X_{m-d}||, an estimate
    of the error at step m-d; it requires nested bases, which the growth by
    appended blocks guarantees.  Non-convergence is reported, not raised.
    When the compressed problem hits a singularity of f (transient Ritz
    values), the step is retried after one extra Arnoldi step; two
    consecutive failures abort.
    """
    A = require_square(A)
    n = A.shape[0]
    B = as_block(B, n, "B")
    hermitian_mode = J is not None
    if hermitian_mode:
        J = np.asarray(J, dtype=complex)
        C = B
    else:
        if C is None:
            raise ValueError("general mode needs C (or pass J for the Hermitian mode)")
        C = as_block(C, n, "C")
    if d < 1 or m_max < 1:
        raise ValueError("need m_max >= 1 and d >= 1")

    if norm2(B) == 0.0 or (not hermitian_mode and norm2(C) == 0.0):
        left = KrylovBasis(A, np.zeros((n, 1)))
        state = UpdateState(left, left, np.zeros((0, 0), dtype=complex), [],
                            hermitian_mode, estimate_history=[0.0])
        return state, _zero_report(())

    if not isinstance(plan, PolePlan):
        plan = PolePlan(tuple(plan))
    poles = plan.expand(m_max)
    # closure is a property of the plan's pole multiset (one full cycle);
    # a cyclic sweep may stop mid-pair without invalidating the mode
    if hermitian_mode and not plan.conjugate_closed():
        raise ValueError("Hermitian mode requires a conjugate-closed pole plan")

    cache = FactorizationCache(A)
    left = KrylovBasis(A, B, adjoint=False, cache=cache, operator_tag="A")
    right = left if hermitian_mode else KrylovBasis(A, C, adjoint=True, cache=cache,
                                                    operator_tag="A*")

    history = []
    estimates = []
    true_errors = [] if true_update is not None else None
    converged = False
    sing_failures = 0
    m_done = 0

    for m, xi in enumerate(poles, start=1):
        left.advance(xi)
        if not hermitian_mode:
            right.advance(np.conj(xi) if np.isfinite(complex(xi).real) else xi)
        m_done = m
        try:
            if hermitian_mode:
                X = update_hermitian(left, B, J, f)
            else:
                X = project_update(left, right, B, C, f)
            sing_failures = 0
        except SingularityOnSpectrum:
            sing_failures += 1
            if sing_failures >= 2 or m == m_max:
                raise
            history.append(None)
            if true_errors is not None:
                true_errors.append(float("nan"))
            continue
        history.append(X)
        if true_errors is not None:
            approx = left.basis @ X @ right.basis.conj().T
            true_errors.append(norm2(true_update - approx))
        if m > d and history[m - 1 - d] is not None:
            est = padded_difference_norm(X, history[m - 1 - d])
            estimates.append(est)
            if est <= tol:
                converged = True
                break

    X_last = next((h for h in reversed(history) if h is not None),
                  np.zeros((0, 0), dtype=complex))
    stagnation = False
    if len(estimates) >= 3:
        e3, e2, e1 = estimates[-3], estimates[-2], estimates[-1]
        if e2 > 0.95 * e3 and e1 > 0.95 * e2 and not converged:
            stagnation = True
    state = UpdateState(left, right, X_last,
                        history if keep_history else [X_last], hermitian_mode,
                        estimate_history=estimates)
    report = UpdateReport(
        final_rank=left.dimension,
        iterations=m_done,
        estimates=estimates,
        true_errors=true_errors,
        converged=converged,
        stagnation_warning=stagnation,
        poles=tuple(poles[:m_done]),
    )
    return state, report
