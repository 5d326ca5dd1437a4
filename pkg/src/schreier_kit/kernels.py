"""Hot loops: batched family norms and the isometry-search descent.

Each kernel exists twice, a numba ``@njit`` version and a pure-numpy one
with the same arithmetic up to summation order.
``SCHREIER_KIT_DISABLE_NUMBA=1`` (or a missing numba) selects numpy.  ``SCHREIER_KIT_THREADS`` caps numba's thread pool.

Families enter as a dense 0/1 incidence matrix ``A`` with one row per
maximal member (rows in canonical order, so ``argmax`` ties resolve
canonically).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SCHREIER_KIT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    import warnings

    import numba
    from numba import njit, prange

    # old system TBB; numba falls back to another threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer")

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

if HAVE_NUMBA and os.environ.get("SCHREIER_KIT_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["SCHREIER_KIT_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


# ---------------------------------------------------------------- numpy

def np_family_norms(X, A, p):
    """Row-wise ``max_G (sum_{i in G} |x_i|^p)^(1/p)`` and the attaining row."""
    S = (np.abs(X) ** p) @ A.T
    g = S.argmax(axis=1)
    return S[np.arange(len(X)), g] ** (1.0 / p), g


def np_residuals(M, X, A, p, perms, r0, weight):
    """Residuals ``||M x_k|| - 1`` plus an orbit-distance penalty, with Jacobian.

    Returns ``(r, J, dist)``; ``r`` has ``K + 1`` entries (last = penalty),
    ``J`` is ``(K + 1, N*N)`` in row-major order of ``M``.
    """
    K, N = X.shape
    Y = X @ M.T
    aY = np.abs(Y)
    S = (aY ** p) @ A.T
    g = S.argmax(axis=1)
    s = S[np.arange(K), g]
    nrm = s ** (1.0 / p)
    coef = np.where(s > 0, nrm ** (1.0 - p), 0.0)
    D = coef[:, None] * aY ** (p - 1.0) * np.sign(Y) * A[g]
    r = np.empty(K + 1)
    J = np.zeros((K + 1, N * N))
    r[:K] = nrm - 1.0
    J[:K] = (D[:, :, None] * X[:, None, :]).reshape(K, N * N)
    diffs = M[None, :, :] - perms
    d2 = (diffs ** 2).sum(axis=(1, 2))
    j = int(d2.argmin())
    dist = np.sqrt(d2[j])
    if dist < r0:
        r[K] = weight * (r0 - dist)
        J[K] = -weight * diffs[j].ravel() / max(dist, 1e-15)
    else:
        r[K] = 0.0
    return r, J, dist


def np_lm_single(M0, X, A, p, perms, r0, weight, iters):
    M = M0.copy()
    N = M.shape[0]
    r, J, dist = np_residuals(M, X, A, p, perms, r0, weight)
    cost = r @ r
    lam = 1e-3
    eye = np.eye(N * N)
    for _ in range(iters):
        if cost < 1e-26:
            break
        H = J.T @ J
        grad = J.T @ r
        moved = False
        for _try in range(12):
            delta = np.linalg.solve(H + lam * eye, -grad)
            Mn = M + delta.reshape(N, N)
            rn, Jn, dn = np_residuals(Mn, X, A, p, perms, r0, weight)
            cn = rn @ rn
            if cn < cost:
                M, r, J, dist, cost = Mn, rn, Jn, dn, cn
                lam = max(lam / 3.0, 1e-12)
                moved = True
                break
            lam *= 4.0
        if not moved:
            break
    dev = np.abs(r[:-1]).max()
    return M, dev, dist


def np_lm_restarts(starts, X, A, p, perms, r0, weight, iters):
    R, N, _ = starts.shape
    Ms = np.empty_like(starts)
    dev = np.empty(R)
    dist = np.empty(R)
    for k in range(R):
        Ms[k], dev[k], dist[k] = np_lm_single(starts[k], X, A, p, perms, r0, weight, iters)
    return Ms, dev, dist


# ---------------------------------------------------------------- numba

if HAVE_NUMBA:

    # fastmath only reassociates the inner dot product; ties between exact sums survive
    @njit(cache=True, parallel=True, fastmath=True)
    def nb_family_norms(X, A, p):
        m, n = X.shape
        G = A.shape[0]
        out = np.empty(m)
        idx = np.empty(m, dtype=np.int64)
        for r in prange(m):
            w = np.empty(n)
            for i in range(n):
                w[i] = abs(X[r, i]) ** p
            best = -1.0
            bi = 0
            for g in range(G):
                s = 0.0
                for i in range(n):
                    s += A[g, i] * w[i]
                if s > best:
                    best = s
                    bi = g
            out[r] = best ** (1.0 / p)
            idx[r] = bi
        return out, idx

    @njit(cache=True)
    def nb_residuals(M, X, A, p, perms, r0, weight, r, J):
        K, N = X.shape
        G = A.shape[0]
        y = np.empty(N)
        for k in range(K):
            for i in range(N):
                acc = 0.0
                for j in range(N):
                    acc += M[i, j] * X[k, j]
                y[i] = acc
            best = -1.0
            bg = 0
            for g in range(G):
                s = 0.0
                for i in range(N):
                    if A[g, i] != 0.0:
                        s += abs(y[i]) ** p
                if s > best:
                    best = s
                    bg = g
            nrm = best ** (1.0 / p)
            r[k] = nrm - 1.0
            coef = nrm ** (1.0 - p) if best > 0 else 0.0
            for i in range(N):
                if A[bg, i] != 0.0 and y[i] != 0.0:
                    d = coef * abs(y[i]) ** (p - 1.0) * (1.0 if y[i] > 0 else -1.0)
                else:
                    d = 0.0
                for j in range(N):
                    J[k, i * N + j] = d * X[k, j]
        bestd = np.inf
        bj = 0
        for q in range(perms.shape[0]):
            s = 0.0
            for i in range(N):
                for j in range(N):
                    t = M[i, j] - perms[q, i, j]
                    s += t * t
            if s < bestd:
                bestd = s
                bj = q
        dist = np.sqrt(bestd)
        if dist < r0:
            r[K] = weight * (r0 - dist)
            den = max(dist, 1e-15)
            for i in range(N):
                for j in range(N):
                    J[K, i * N + j] = -weight * (M[i, j] - perms[bj, i, j]) / den
        else:
            r[K] = 0.0
            for c in range(N * N):
                J[K, c] = 0.0
        return dist

    @njit(cache=True)
    def nb_lm_single(M0, X, A, p, perms, r0, weight, iters):
        K, N = X.shape
        P = N * N
        M = M0.copy()
        r = np.empty(K + 1)
        J = np.zeros((K + 1, P))
        rn = np.empty(K + 1)
        Jn = np.zeros((K + 1, P))
        dist = nb_residuals(M, X, A, p, perms, r0, weight, r, J)
        cost = 0.0
        for k in range(K + 1):
            cost += r[k] * r[k]
        lam = 1e-3
        eye = np.eye(P)
        for _ in range(iters):
            if cost < 1e-26:
                break
            H = J.T @ J
            grad = J.T @ r
            moved = False
            for _try in range(12):
                delta = np.linalg.solve(H + lam * eye, -grad)
                Mn = M + delta.reshape((N, N))
                dn = nb_residuals(Mn, X, A, p, perms, r0, weight, rn, Jn)
                cn = 0.0
                for k in range(K + 1):
                    cn += rn[k] * rn[k]
                if cn < cost:
                    M = Mn
                    r[:] = rn
                    J[:, :] = Jn
                    dist = dn
                    cost = cn
                    lam = max(lam / 3.0, 1e-12)
                    moved = True
                    break
                lam *= 4.0
            if not moved:
                break
        dev = 0.0
        for k in range(K):
            if abs(r[k]) > dev:
                dev = abs(r[k])
        return M, dev, dist

    @njit(cache=True, parallel=True)
    def nb_lm_restarts(starts, X, A, p, perms, r0, weight, iters):
        R, N, _ = starts.shape
        Ms = np.empty_like(starts)
        dev = np.empty(R)
        dist = np.empty(R)
        for k in prange(R):
            M, d, s = nb_lm_single(starts[k], X, A, p, perms, r0, weight, iters)
            Ms[k] = M
            dev[k] = d
            dist[k] = s
        return Ms, dev, dist


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def family_norms(X, A, p, backend: str | None = None):
    """Norms of the rows of ``X`` and the index of an attaining row of ``A``."""
    X, A = _c(np.atleast_2d(X)), _c(np.atleast_2d(A))
    if (backend or BACKEND) == "numba" and HAVE_NUMBA:
        return nb_family_norms(X, A, float(p))
    return np_family_norms(X, A, float(p))


def lm_restarts(starts, X, A, p, perms, r0, weight, iters, backend: str | None = None):
    """Run one damped Gauss-Newton descent per start; see :func:`np_residuals`."""
    args = (_c(starts), _c(X), _c(A), float(p), _c(perms), float(r0), float(weight), int(iters))
    if (backend or BACKEND) == "numba" and HAVE_NUMBA:
        return nb_lm_restarts(*args)
    return np_lm_restarts(*args)
