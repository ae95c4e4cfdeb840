"""Dense symmetric eigendecomposition, implemented in-repo.

Householder reduction to tridiagonal form followed by the implicit-shift
QL iteration (the classic tred2/tql2 pair).  Both kernels are plain
nested loops so numba can compile them; without numba they still run,
just slowly.  Correctness is pinned against a brute-force dense solver
in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but keep a fallback
    HAVE_NUMBA = False

    def _njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


@_njit(cache=True)
def _tred2(a, d, e):
    # Householder reduction of the symmetric matrix in `a` to tridiagonal
    # form; on exit `a` holds the accumulated orthogonal transform, `d` the
    # diagonal and `e` the subdiagonal (e[0] unused).
    n = a.shape[0]
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        scale = 0.0
        if l > 0:
            for k in range(l + 1):
                scale += abs(a[i, k])
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                for k in range(l + 1):
                    a[i, k] /= scale
                    h += a[i, k] * a[i, k]
                f = a[i, l]
                g = -math.sqrt(h) if f >= 0.0 else math.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    a[j, i] = a[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += a[j, k] * a[i, k]
                    for k in range(j + 1, l + 1):
                        g += a[k, j] * a[i, k]
                    e[j] = g / h
                    f += e[j] * a[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = a[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        a[j, k] -= f * e[k] + g * a[i, k]
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        l = i
        if d[i] != 0.0:
            for j in range(l):
                g = 0.0
                for k in range(l):
                    g += a[i, k] * a[k, j]
                for k in range(l):
                    a[k, j] -= g * a[k, i]
        d[i] = a[i, i]
        a[i, i] = 1.0
        for j in range(l):
            a[j, i] = 0.0
            a[i, j] = 0.0


@_njit(cache=True)
def _tql2(d, e, z):
    # Implicit-shift QL iteration on the tridiagonal (d, e); rotations are
    # accumulated into the columns of z.  Returns 0 on success.
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    # absolute deflation floor: relative-only tests stall on blocks whose
    # diagonal is itself at round-off level (heavily rank-deficient input)
    anorm = 0.0
    for i in range(n):
        s = abs(d[i]) + abs(e[i])
        if s > anorm:
            anorm = s
    floor = 2.3e-16 * anorm
    for l in range(n):
        iteration = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.3e-16 * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            iteration += 1
            if iteration > 100:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sign_r = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sign_r)
            s = 1.0
            c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return 0


def eigh_sym(A: np.ndarray):
    """Eigendecomposition of a dense symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ascending and eigenvectors in the
    columns of V (orthonormal).  The input must be symmetric; it is
    symmetrized internally to wash out round-off asymmetry.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("eigh_sym expects a square matrix")
    n = A.shape[0]
    if n == 0:
        raise InvalidInputError("empty matrix")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T)) > 1e-8 * (1.0 + scale):
        raise InvalidInputError("matrix is not symmetric")
    if n == 1:
        return A[0].copy(), np.ones((1, 1))

    z = np.ascontiguousarray((A + A.T) / 2.0)
    d = np.empty(n)
    e = np.empty(n)
    _tred2(z, d, e)
    status = _tql2(d, e, z)
    if status != 0:  # pragma: no cover - 50 QL iterations never trip in practice
        raise ArithmeticError("QL iteration failed to converge")
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def truncated_pseudo_solve(G: np.ndarray, b: np.ndarray, eps: float):
    """Solve G w = b through the eigen-pseudoinverse of symmetric PSD G.

    Modes with eigenvalue <= eps * lambda_max are dropped.  Returns
    ``(w, kept, evals)``; ``w`` has the same trailing shape as ``b``.
    Raises :class:`InvalidInputError` when the whole spectrum is cut.
    """
    evals, evecs = eigh_sym(G)
    lam_max = evals[-1]
    if not lam_max > 0.0:
        raise InvalidInputError("matrix has no positive spectrum")
    keep = evals / lam_max > eps
    if not keep.any():  # unreachable: lambda_max always keeps itself
        raise InvalidInputError("cutoff removed the whole spectrum")
    coef = evecs.T @ b
    if coef.ndim == 1:
        w = evecs[:, keep] @ (coef[keep] / evals[keep])
    else:
        w = evecs[:, keep] @ (coef[keep] / evals[keep, None])
    return w, int(np.count_nonzero(keep)), evals
