"""Lattice basis reduction with exact integer transforms.

LLL (delta = 0.999) plus a greedy shortest-vector polish: after LLL each
row is replaced, front to back, by a vector whose projection achieves the
first minimum of the corresponding projected lattice.  The resulting
Gram-Schmidt norm profile is an intrinsic function of the lattice, not of
the input basis, which is what makes the reduced coordinates usable as
invariants.  All transforms are tracked as exact Python-int matrices.
"""

from math import gcd

import numpy as np

from .errors import NumericError
from .lattice_enum import integer_points_in_ball

LLL_DELTA = 0.999


def _gram_schmidt(B):
    """Orthogonalisation coefficients, squared norms, and GS rows (top down)."""
    n = B.shape[0]
    star = np.zeros_like(B, dtype=float)
    mu = np.zeros((n, n))
    norms2 = np.zeros(n)
    for i in range(n):
        v = np.array(B[i], dtype=float)
        for j in range(i):
            if norms2[j] <= 0.0 or not np.isfinite(norms2[j]):
                raise NumericError("degenerate basis in Gram-Schmidt")
            mu[i, j] = (B[i] @ star[j]) / norms2[j]
            v -= mu[i, j] * star[j]
        star[i] = v
        norms2[i] = v @ v
    if not np.isfinite(norms2).all() or norms2[-1] <= 0.0:
        raise NumericError("degenerate basis in Gram-Schmidt")
    return mu, norms2, star


def _identity_int(n):
    U = np.zeros((n, n), dtype=object)
    for i in range(n):
        U[i, i] = 1
    return U


def _size_reduce(B, U):
    """Make all |mu[i, j]| <= 1/2 by integer row operations (in place)."""
    n = B.shape[0]
    mu, _, _ = _gram_schmidt(B)
    for i in range(1, n):
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                B[i] -= q * B[j]
                U[i] = U[i] - q * U[j]
                mu[i, :j] -= q * mu[j, :j]
                mu[i, j] -= q
    return B, U


def lll_reduce(B, delta=LLL_DELTA):
    """Row-style LLL.  Returns ``(C, U)`` with ``C = U @ B``, U unimodular."""
    B = np.array(B, dtype=float)
    n = B.shape[0]
    U = _identity_int(n)
    if n == 1:
        return B, U
    k = 1
    steps = 0
    limit = 100000 * n
    while k < n:
        steps += 1
        if steps > limit:
            raise NumericError("LLL failed to terminate (non-finite input?)")
        mu, norms2, _ = _gram_schmidt(B)
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[k] -= q * B[j]
                U[k] = U[k] - q * U[j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms2[k] >= (delta - mu[k, k - 1] ** 2) * norms2[k - 1]:
            k += 1
        else:
            B[[k - 1, k]] = B[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            k = max(k - 1, 1)
    return _size_reduce(B, U)


def shortest_vector_coeffs(B):
    """Primitive integer coefficients of a shortest nonzero row-lattice vector.

    Deterministic: among candidates within 1e-12 relative of the minimum
    norm, the sign-normalised lexicographically smallest coefficient
    vector wins.  ``B`` should be reasonably reduced so the search ball
    (the smallest row norm) stays small.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = B.shape[0]
    bound = np.linalg.norm(B, axis=1).min()
    m, _, norms = integer_points_in_ball(B, np.zeros(n), bound * (1.0 + 1e-9))
    nonzero = norms > 0.0
    m, norms = m[nonzero], norms[nonzero]
    if m.shape[0] == 0:
        raise NumericError("no nonzero lattice vector found in the search ball")
    best = norms.min()
    near = norms <= best * (1.0 + 1e-12)
    candidates = m[near]
    # sign normalisation: first nonzero coefficient positive
    normed = []
    for row in candidates:
        row = [int(v) for v in row]
        lead = next(v for v in row if v != 0)
        if lead < 0:
            row = [-v for v in row]
        normed.append(tuple(row))
    coeffs = list(min(normed))
    g = 0
    for v in coeffs:
        g = gcd(g, abs(v))
    if g != 1:
        raise NumericError(f"shortest vector coefficients not primitive: {coeffs}")
    return coeffs


def complete_to_unimodular(coeffs):
    """Integer matrix with first row ``coeffs`` (primitive) and |det| = 1."""
    m = [int(v) for v in coeffs]
    n = len(m)
    ainv = _identity_int(n)

    def col_combine(i, j, q):
        # column op m_j -= q * m_i; inverse tracked as row op on ainv
        m[j] -= q * m[i]
        ainv[i] = ainv[i] + q * ainv[j]

    def col_swap(i, j):
        m[i], m[j] = m[j], m[i]
        ainv[[i, j]] = ainv[[j, i]]

    def col_negate(i):
        m[i] = -m[i]
        ainv[i] = -ainv[i]

    while True:
        support = [i for i in range(n) if m[i] != 0]
        if not support:
            raise NumericError("cannot complete the zero vector to a basis")
        if len(support) == 1:
            break
        pivot = min(support, key=lambda i: abs(m[i]))
        for j in support:
            if j == pivot:
                continue
            q = round(m[j] / m[pivot])
            if q:
                col_combine(pivot, j, q)
    i0 = support[0]
    if i0 != 0:
        col_swap(0, i0)
    if m[0] == -1:
        col_negate(0)
    if m[0] != 1:
        raise NumericError(f"input coefficients were not primitive (gcd {m[0]})")
    for row, want in zip(ainv[0], coeffs):
        if int(row) != int(want):
            raise NumericError("unimodular completion lost the input row")
    return ainv


def integer_det(A):
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    M = [[int(v) for v in row] for row in np.asarray(A)]
    n = len(M)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def hkz_reduce(B):
    """LLL followed by the greedy projected-shortest-vector polish.

    Returns ``(C, W)`` with ``C = W @ B``; the GS norm of row i equals the
    first minimum of the lattice projected orthogonally to rows < i.
    """
    B = np.array(B, dtype=float)
    n = B.shape[0]
    C, W = lll_reduce(B)
    for i in range(n - 1):
        mu, _, star = _gram_schmidt(C)
        P = np.array(C[i:], dtype=float)
        for k in range(P.shape[0]):
            for j in range(i):
                P[k] -= mu[i + k, j] * star[j]
        coeffs = shortest_vector_coeffs(P)
        if coeffs == [1] + [0] * (n - i - 1):
            continue
        V = complete_to_unimodular(coeffs)
        C[i:] = np.array(V, dtype=float) @ C[i:]
        W[i:] = V @ W[i:]
    return _size_reduce(C, W)
