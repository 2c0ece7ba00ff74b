"""High-accuracy eigendecomposition of diagonal-plus-rank-one matrices.

For A = diag(d) + rho * z z^T (real d, z, rho > 0) the eigenvalues are the
roots of the secular equation 1 + rho * sum z_k^2/(d_k - lam) = 0, one in
each gap.  Solving the secular equation in gap-shifted coordinates and
rebuilding the weight vector a la Gu-Eisenstat gives eigenvalues with high
relative accuracy and numerically orthogonal eigenvectors, far beyond what
a general dense eigensolver delivers on badly graded spectra.

The experiment instances (log-spaced diagonal plus positive rank-one) are
exactly of this form; this module provides their reference decompositions.
"""

import numpy as np

__all__ = ["eigh_dpr1", "funm_dpr1"]

_BISECT_STEPS = 120


def _secular_root_in_gap(delta, w2, rho, lo, hi):
    """Root of 1 + rho * sum w2_k/(delta_k - mu) in (lo, hi), bisection.

    delta are the gap-shifted diagonal entries; the function is increasing
    between its poles, -inf at lo+, +inf at hi- (or +1 at infinity for the
    last gap).
    """
    a, b = lo, hi
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        val = 1.0 + rho * np.sum(w2 / (delta - mid))
        if val < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def eigh_dpr1(d, z, rho=1.0):
    """Eigendecomposition of diag(d) + rho * z z^T.

    Requires strictly increasing d, rho > 0, and all z_k nonzero (no
    deflation is implemented; the experiment generators guarantee this).
    Returns (lam, V) with lam ascending, V orthogonal.
    """
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=float).ravel()
    n = d.size
    if z.size != n:
        raise ValueError("z must have the same length as d")
    if np.any(np.diff(d) <= 0):
        raise ValueError("d must be strictly increasing")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if np.any(z == 0.0):
        raise ValueError("z must have no zero components (deflation unsupported)")
    znorm = np.linalg.norm(z)
    w = z / znorm
    rho_eff = rho * znorm**2
    w2 = w * w

    # mu[i] = lam[i] - d[i] in the gap (d[i], d[i+1]); last gap (d[n-1], +rho_eff)
    mu = np.empty(n)
    for i in range(n):
        delta = d - d[i]
        hi = (d[i + 1] - d[i]) if i + 1 < n else rho_eff
        mu[i] = _secular_root_in_gap(delta, w2, rho_eff, 0.0, hi)
        if mu[i] == 0.0 or mu[i] == hi:
            raise ValueError("secular root pinned at a gap endpoint; unresolvable")
    lam = d + mu

    # Gu-Eisenstat: rebuild weights consistent with the computed roots,
    #   what_k^2 = prod_j (lam_j - d_k) / (rho * prod_{j != k} (d_j - d_k)),
    # then the classical eigenvector formula v_i ~ what_k/(d_k - lam_i)
    # gives numerically orthogonal vectors.
    lam_minus_d = lam[:, None] - d[None, :]        # [i, k] = lam_i - d_k
    for i in range(n):
        lam_minus_d[i, i] = mu[i]
        if i + 1 < n:
            lam_minus_d[i, i + 1] = mu[i] - (d[i + 1] - d[i])
    if np.any(lam_minus_d == 0.0):
        raise ValueError("an updated eigenvalue coincides with a diagonal entry")
    what2 = np.empty(n)
    for k in range(n):
        num = lam_minus_d[:, k]
        logsum = np.log(np.abs(num[k]))
        sign = np.sign(num[k])
        for j in range(n):
            if j == k:
                continue
            t = num[j] / (d[j] - d[k])
            sign *= np.sign(t)
            logsum += np.log(np.abs(t))
        what2[k] = sign * np.exp(logsum) / rho_eff
    if not np.all(np.isfinite(what2)):
        raise ValueError("weight reconstruction overflowed; secular path unusable")
    what = np.sign(w) * np.sqrt(np.maximum(what2, 0.0))

    V = -(what[None, :] / lam_minus_d).T           # V[k, i] = what_k/(d_k - lam_i)
    norms = np.linalg.norm(V, axis=0, keepdims=True)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
        raise ValueError("eigenvector reconstruction failed; secular path unusable")
    V /= norms
    return lam, V


def funm_dpr1(d, z, rho, scalar_map):
    """f(diag(d) + rho z z^T) through the secular decomposition."""
    lam, V = eigh_dpr1(d, z, rho)
    return (V * scalar_map(lam)) @ V.T


def funm_diff_rank1(d, z, rho, scalar_map):
    """f(diag(d) + rho z z*) - f(diag(d)) for complex z, real ascending d.

    Complex weights are reduced to the real case by a diagonal phase
    similarity.  Coordinates with z_k = 0 decouple and contribute zero
    rows/columns to the difference.  Raises ValueError when the secular
    structure is unusable (repeated d); callers fall back to a generic
    eigendecomposition in that case.
    """
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=complex).ravel()
    n = d.size
    fd = np.asarray(scalar_map(d + 0j))
    if not np.all(np.isfinite(fd)):
        raise ValueError("scalar map not finite on the base spectrum")
    absz = np.abs(z)
    support = absz > 0.0
    D = np.zeros((n, n), dtype=complex)
    if not np.any(support):
        return D
    ds = d[support]
    if np.any(np.diff(ds) <= 0):
        raise ValueError("repeated eigenvalues; secular path unavailable")
    lam, V = eigh_dpr1(ds, absz[support], rho)
    flam = np.asarray(scalar_map(lam + 0j))
    if not np.all(np.isfinite(flam)):
        raise ValueError("scalar map not finite on the updated spectrum")
    core = (V * flam) @ V.T - np.diag(fd[support])
    phases = np.ones(n, dtype=complex)
    phases[support] = z[support] / absz[support]
    ps = phases[support]
    core = (ps[:, None] * core) * ps.conj()[None, :]
    ii = np.nonzero(support)[0]
    D[np.ix_(ii, ii)] = core
    return D
