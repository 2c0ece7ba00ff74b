"""A priori error-bound evaluators.

Blaschke-product convergence factors eta_m, Markov-function bounds for the
Hermitian and non-Hermitian update, the polynomial-Krylov bound, the global
perturbation bound, and the z*f(z) modification trick.  Everything here is
scalar work on spectral windows; nothing touches large matrices.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import is_infinite_pole
from .errors import (
    EtaNotContracting,
    LastPoleNotInfinite,
    PoleInsideDomain,
    SupportOverlapsSpectrum,
)
from .poles import GONCHAR_RAKHMANOV_RATE, EllipseMap, IntervalMap, PolePlan

__all__ = [
    "SpectralWindow", "BoundReport", "eta_blaschke",
    "markov_bound_hermitian", "markov_bound_nonhermitian",
    "poly_update_bound", "frechet_perturbation_bound",
    "markov_modified_bound", "sign_update_bound",
]

#: default sample count for the eta maximization (env-overridable)
ETA_SAMPLES_ENV = "KU_NUM_SAMPLES_ETA"
_ETA_SAMPLES_DEFAULT = 4096

#: constant of the Crouzeix-Kressner Frechet-derivative bound
_CK = (1.0 + math.sqrt(2.0)) ** 2


@dataclass(frozen=True)
class SpectralWindow:
    """Interval (or axis-symmetric ellipse) surrogate for the union of the
    two numerical ranges.

    ``lmin``/``lmax`` are the real extent; a positive ``half_height`` turns
    the window into the axis-symmetric ellipse stub used for non-Hermitian
    problems (any other convex set is rejected).  ``omega`` is the leftmost
    real point in either case.
    """

    lmin: float
    lmax: float
    kind: str = "interval"
    half_height: float = 0.0

    def __post_init__(self):
        if not self.lmin <= self.lmax:
            raise ValueError("window needs lmin <= lmax")
        if self.half_height < 0:
            raise ValueError("half_height must be nonnegative")
        if self.half_height > 0 and self.kind == "interval":
            object.__setattr__(self, "kind", "symmetric-convex-stub")

    @property
    def omega(self):
        return self.lmin

    @classmethod
    def from_matrices(cls, A, A_plus, hermitian=True):
        """Window [min of both smallest, max of both largest eigenvalues]."""
        if not hermitian:
            raise ValueError("construction from matrices is for the Hermitian case")
        wa = np.linalg.eigvalsh(np.asarray(A, dtype=complex))
        wb = np.linalg.eigvalsh(np.asarray(A_plus, dtype=complex))
        return cls(float(min(wa[0], wb[0])), float(max(wa[-1], wb[-1])))

    @classmethod
    def enclosing_ranges(cls, *matrices):
        """Axis-symmetric ellipse enclosing the numerical ranges of the
        given matrices (via their Hermitian/skew parts, desk scale).

        The numerical range sits in the rectangle [Hermitian extent] x
        [i times skew extent] of half-sizes (w, h); the ellipse with
        rx = sqrt(w^2 + 4h^2), ry = sqrt(h^2 + w^2/4) passes exactly through
        the rectangle corners, always satisfies rx > ry, and inflates the
        real extent by at most 2h^2/w.
        """
        lo, hi, h = np.inf, -np.inf, 0.0
        for M in matrices:
            M = np.asarray(M, dtype=complex)
            H = 0.5 * (M + M.conj().T)
            S = (M - M.conj().T) / 2j
            wh = np.linalg.eigvalsh(H)
            ws = np.linalg.eigvalsh(S)
            lo = min(lo, wh[0])
            hi = max(hi, wh[-1])
            h = max(h, abs(ws[0]), abs(ws[-1]))
        if h == 0.0:
            return cls(float(lo), float(hi))
        c = 0.5 * (lo + hi)
        w = 0.5 * (hi - lo)
        rx = math.hypot(w, 2.0 * h) * (1.0 + 1e-12)
        ry = math.hypot(h, 0.5 * w) * (1.0 + 1e-12)
        return cls(float(c - rx), float(c + rx), half_height=float(ry))

    def interval_map(self):
        if self.half_height > 0:
            c = 0.5 * (self.lmin + self.lmax)
            rx = 0.5 * (self.lmax - self.lmin)
            return EllipseMap(c, rx, self.half_height)
        return IntervalMap(self.lmin, self.lmax)


@dataclass
class BoundReport:
    values: np.ndarray          # bound at steps 1..m
    rate: float                 # aggregate per-step factor
    constants: dict = field(default_factory=dict)
    proxy: str = ""             # nonempty when a computable proxy replaces an inf

    @property
    def final(self):
        return float(self.values[-1])


def _num_eta_samples():
    raw = os.environ.get(ETA_SAMPLES_ENV, "")
    try:
        val = int(raw)
        if val >= 8:
            return val
    except ValueError:
        pass
    return _ETA_SAMPLES_DEFAULT


def _expand_poles(plan, m):
    if isinstance(plan, PolePlan):
        return plan.expand(m) if m is not None else plan.base_sequence()
    seq = tuple(plan)
    if m is not None:
        seq = PolePlan(seq, repetition="as-given").expand(m) if len(seq) >= m else \
            PolePlan(seq, repetition="cyclic").expand(m)
    return seq


def _log_inv_blaschke(x, finite_phis, mults, n_inf):
    """log 1/|B(x)| for samples x (vector), grouped mapped poles."""
    out = np.zeros_like(x, dtype=float)
    for ph, mult in zip(finite_phis, mults):
        out += mult * (np.log(np.abs(x - ph)) - np.log(np.abs(1.0 - x * np.conj(ph))))
    if n_inf:
        out -= n_inf * np.log(np.abs(x))
    return out


def eta_blaschke(plan, imap, support, m=None):
    """Convergence factor eta = max over the mapped support of 1/|B_m|.

    ``plan`` may be a PolePlan or an explicit pole sequence; ``imap`` the
    window's conformal map; ``support`` the (alpha, beta) interval of the
    Markov function.  Infinite poles contribute a factor 1/|x| each.  The
    maximum is located on a Chebyshev-distributed sample grid (override the
    density with the KU_NUM_SAMPLES_ETA environment variable) and sharpened
    by golden-section refinement around the best sample.
    """
    poles = _expand_poles(plan, m)
    if len(poles) == 0:
        return 1.0
    alpha, beta = float(support[0]), float(support[1])
    if not alpha < beta:
        raise ValueError("support needs alpha < beta")
    if not beta < imap.a:
        raise SupportOverlapsSpectrum("support must lie strictly left of the window")

    groups = {}
    for p in poles:
        key = "inf" if is_infinite_pole(p) else complex(p)
        groups[key] = groups.get(key, 0) + 1
    n_inf = groups.pop("inf", 0)
    finite_phis, mults = [], []
    for p, mult in groups.items():
        ph = imap.phi(p)
        if abs(ph) <= 1.0 + 1e-13:
            raise PoleInsideDomain(f"pole {p} lies inside the spectral window")
        finite_phis.append(ph)
        mults.append(mult)

    phi_beta = imap.phi(beta).real
    nsamp = _num_eta_samples()
    cheb = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, nsamp)))  # [0, 1], clustered
    if math.isinf(alpha):
        # substitute x = phi(beta)/t, t in (0, 1]
        t = np.clip(cheb, 1.0 / nsamp**2, 1.0)
        grid = np.unique(t)
        def value(tt):
            x = phi_beta / tt
            return _log_inv_blaschke(np.asarray(x, dtype=float), finite_phis, mults, n_inf)
    else:
        phi_alpha = imap.phi(alpha).real
        grid = np.unique(phi_alpha + (phi_beta - phi_alpha) * cheb)
        def value(tt):
            return _log_inv_blaschke(np.asarray(tt, dtype=float), finite_phis, mults, n_inf)

    vals = value(grid)
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    # golden-section refinement of the bracket around the best sample
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = float(lo), float(hi)
    c_ = b_ - gr * (b_ - a_)
    d_ = a_ + gr * (b_ - a_)
    fc = float(value(np.array([c_]))[0])
    fd = float(value(np.array([d_]))[0])
    for _ in range(80):
        if fc > fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - gr * (b_ - a_)
            fc = float(value(np.array([c_]))[0])
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + gr * (b_ - a_)
            fd = float(value(np.array([d_]))[0])
        if abs(b_ - a_) <= 1e-14 * max(1.0, abs(a_)):
            break
    best = max(float(vals[k]), fc, fd)
    return float(np.exp(best))


def _markov_sup(f, window):
    """sup |f| on the window; Markov functions are monotone there, so the
    supremum sits at the endpoint nearest the support."""
    if not f.is_markov:
        raise ValueError("function has no Markov support interval")
    return float(abs(f.scalar(np.array([window.omega]))[0]))


def _require_support(f, window):
    support = f.markov_support
    if support[1] >= window.lmin:
        raise SupportOverlapsSpectrum(
            f"support upper end {support[1]} reaches window [{window.lmin}, {window.lmax}]"
        )
    return support


def markov_bound_hermitian(window, plan, f, m):
    """Bound 4 * (2 ||f||_E / |phi(beta)|) * eta_k for k = 1..m (Hermitian update)."""
    support = _require_support(f, window)
    poles = _expand_poles(plan, m)
    if not PolePlan(poles).conjugate_closed():
        raise ValueError("Hermitian Markov bound requires a conjugate-closed plan")
    imap = window.interval_map()
    sup_f = _markov_sup(f, window)
    phi_beta = abs(imap.phi(support[1]))
    lead = 4.0 * 2.0 * sup_f / phi_beta
    etas = np.array([eta_blaschke(poles[:k], imap, support) for k in range(1, m + 1)])
    values = lead * etas
    rate = float(etas[-1] ** (1.0 / m))
    # reference point: free-pole rational approximation of exp on the
    # negative axis converges at 1/GONCHAR_RAKHMANOV_RATE ~ 1/9.28903 per step
    return BoundReport(values=values, rate=rate,
                       constants={"projection": 4.0, "markov_numerator": 2.0 * sup_f,
                                  "phi_beta": phi_beta,
                                  "exp_reference_rate": 1.0 / GONCHAR_RAKHMANOV_RATE})


def markov_bound_nonhermitian(window, plan, f, m, normB, normC):
    """Bound 8 |f'(omega)| * eta/(1-eta) * ||B|| ||C|| (non-Hermitian update)."""
    support = _require_support(f, window)
    poles = _expand_poles(plan, m)
    imap = window.interval_map()
    fprime = float(abs(f.derivative(np.array([window.omega + 0j]))[0]))
    etas = np.array([eta_blaschke(poles[:k], imap, support) for k in range(1, m + 1)])
    if etas[-1] >= 1.0:
        raise EtaNotContracting(f"eta = {etas[-1]:.3e} >= 1; bound is void")
    with np.errstate(divide="ignore"):
        values = 8.0 * fprime * (etas / np.maximum(1.0 - etas, 1e-300)) * normB * normC
    rate = float(etas[-1] ** (1.0 / m))
    return BoundReport(values=values, rate=rate,
                       constants={"leading": 8.0 * fprime, "normB": normB, "normC": normC})


def _cheb_best_proxy(df, a, b, degree, samples=2048):
    """Chebyshev-interpolation proxy for inf over polynomials of given degree
    of ||f' - p|| on [a, b]; within (1 + Lebesgue constant) of the true inf."""
    if degree < 0:
        x = np.linspace(a, b, samples)
        return float(np.abs(df(x)).max())
    k = np.arange(degree + 1)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * (degree + 1)))
    xn = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    coeffs = np.polynomial.chebyshev.chebfit(nodes, np.real(df(xn)), degree)
    x = np.linspace(a, b, samples)
    xt = (2.0 * x - (a + b)) / (b - a)
    interp = np.polynomial.chebyshev.chebval(xt, coeffs)
    return float(np.abs(np.real(df(x)) - interp).max())


def poly_update_bound(window, f, m, normD_F):
    """Polynomial-Krylov bound 2 (1+sqrt2)^2 ||D||_F inf_{deg <= m-1} ||f' - p||.

    The best-approximation infimum is replaced by a Chebyshev-interpolation
    proxy (an upper estimate within a Lebesgue-constant factor); the report
    labels it.
    """
    a, b = window.lmin, window.lmax
    def df(x):
        return f.derivative(np.asarray(x, dtype=complex))
    values = []
    for k in range(1, m + 1):
        inf_proxy = _cheb_best_proxy(df, a, b, k - 1)
        values.append(2.0 * _CK * normD_F * inf_proxy)
    values = np.array(values if values else [2.0 * _CK * normD_F * _cheb_best_proxy(df, a, b, -1)])
    if m > 1 and values[0] > 0:
        rate = float((values[-1] / values[0]) ** (1.0 / (m - 1)))
    else:
        rate = 1.0
    return BoundReport(values=values, rate=rate,
                       constants={"leading": 2.0 * _CK * normD_F},
                       proxy="chebyshev-interpolation upper estimate")


def frechet_perturbation_bound(window, f, normD_F):
    """Global bound (1+sqrt2)^2 sup|f'| ||D||_F for ||f(A+D) - f(A)||_F."""
    sup_df = f.sup_abs_derivative_on_interval(window.lmin, window.lmax)
    return _CK * sup_df * float(normD_F)


def markov_modified_bound(window, plan, f_hat, m):
    """Bound for f(z) = z * f_hat(z) with a final infinite pole:
    ||p1||_E times the Markov bound for f_hat at step m-1."""
    poles = _expand_poles(plan, m)
    if not is_infinite_pole(poles[-1]):
        raise LastPoleNotInfinite("the modification trick fixes the last pole at infinity")
    sup_p1 = max(abs(window.lmin), abs(window.lmax))
    if m == 1:
        support = _require_support(f_hat, window)
        imap = window.interval_map()
        lead = 4.0 * 2.0 * _markov_sup(f_hat, window) / abs(imap.phi(support[1]))
        return BoundReport(values=np.array([sup_p1 * lead]), rate=1.0,
                           constants={"modification_factor": sup_p1})
    inner = markov_bound_hermitian(window, poles[:-1], f_hat, m - 1)
    values = sup_p1 * inner.values
    return BoundReport(values=values, rate=inner.rate,
                       constants={"modification_factor": sup_p1, **inner.constants})


def sign_update_bound(window_squared, plan, m, norm_A_plus_D, norm_BJ, norm_B, inv_sqrt):
    """Sign-update bound (4||A+D|| + 2||BJ|| ||B||) * min ||f - r|| on the
    squared window, with the Markov estimate for the inverse square root."""
    support = _require_support(inv_sqrt, window_squared)
    poles = _expand_poles(plan, m)
    imap = window_squared.interval_map()
    lead = (4.0 * norm_A_plus_D + 2.0 * norm_BJ * norm_B)
    markov_lead = 2.0 * _markov_sup(inv_sqrt, window_squared) / abs(imap.phi(support[1]))
    etas = np.array([eta_blaschke(poles[:k], imap, support) for k in range(1, m + 1)])
    values = lead * markov_lead * etas
    return BoundReport(values=values, rate=float(etas[-1] ** (1.0 / m)),
                       constants={"structure": lead, "markov": markov_lead})
