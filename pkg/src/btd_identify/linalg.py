"""Exact and floating-point linear algebra kernels.

Two arithmetic modes run through the whole package:

* ``rational``: matrices are ``object``-dtype ndarrays holding Python ints
  (or Fractions, which are cleared to ints first).  Ranks, pivot columns,
  nullspaces and span tests are computed exactly; a rank obtained this way
  is a certificate, not an estimate.
* ``float``: complex128 ndarrays, ranks via SVD with a relative threshold.

The exact rank engine is fraction-free (Bareiss) elimination: every
intermediate entry is a minor of the input, so integer growth stays
polynomial and all divisions are exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

FLOAT_RANK_TOL = 1e-10


def is_exact_array(a) -> bool:
    """True when `a` is an object ndarray (int/Fraction entries)."""
    return isinstance(a, np.ndarray) and a.dtype == object


def _lcm(a, b):
    return a * b // gcd(a, b)


def to_integer_columns(M):
    """Clear denominators column by column; returns an int object matrix.

    Column scaling preserves rank, pivot-column structure and column span,
    so this is safe for all uses except nullspace computations.
    """
    M = np.asarray(M, dtype=object)
    out = M.copy()
    for j in range(M.shape[1]):
        den = 1
        for v in M[:, j]:
            if isinstance(v, Fraction):
                den = _lcm(den, v.denominator)
        if den != 1:
            out[:, j] = [int(v * den) if isinstance(v, Fraction) else v * den
                         for v in M[:, j]]
        else:
            out[:, j] = [int(v) if isinstance(v, Fraction) else v for v in M[:, j]]
    return out


def _normalize_columns(M):
    """Divide each integer column by its gcd (in place)."""
    for j in range(M.shape[1]):
        g = 0
        for v in M[:, j]:
            g = gcd(g, abs(v) if isinstance(v, int) else abs(int(v)))
            if g == 1:
                break
        if g > 1:
            M[:, j] = M[:, j] // g
    return M


def exact_echelon(M, want_pivots=False):
    """Fraction-free row elimination over the integers.

    Returns ``rank`` or ``(rank, pivot_columns)``.  Pivot columns form a
    maximal linearly independent subset of the columns of `M`.
    """
    A = to_integer_columns(M)
    _normalize_columns(A)
    m, n = A.shape
    pivots = []
    prev = 1
    row = 0
    for col in range(n):
        if row == m:
            break
        # smallest nonzero pivot keeps the Bareiss minors small
        piv, best = -1, None
        for r in range(row, m):
            v = A[r, col]
            if v != 0:
                a = -v if v < 0 else v
                if best is None or a < best:
                    best, piv = a, r
                    if a == 1:
                        break
        if piv < 0:
            continue
        if piv != row:
            A[[row, piv], :] = A[[piv, row], :]
        p = A[row, col]
        if row + 1 < m:
            sub = A[row + 1:, col + 1:]
            c = A[row + 1:, col][:, None]
            r_ = A[row, col + 1:][None, :]
            A[row + 1:, col + 1:] = (sub * p - c * r_) // prev
            A[row + 1:, col] = 0
        prev = p
        pivots.append(col)
        row += 1
    if want_pivots:
        return len(pivots), pivots
    return len(pivots)


def exact_rank(M) -> int:
    """Rank of an int/Fraction matrix, exact."""
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return exact_echelon(M)


def exact_det(M):
    """Determinant of a square int/Fraction matrix (Fraction-free for ints)."""
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    den = 1
    for v in M.reshape(-1):
        if isinstance(v, Fraction):
            den = _lcm(den, v.denominator)
    A = np.array([[int(v * den) for v in row] for row in M], dtype=object)
    sign = 1
    prev = 1
    for col in range(n - 1):
        piv = next((r for r in range(col, n) if A[r, col] != 0), None)
        if piv is None:
            return Fraction(0) if den != 1 else 0
        if piv != col:
            A[[col, piv], :] = A[[piv, col], :]
            sign = -sign
        p = A[col, col]
        sub = A[col + 1:, col + 1:]
        c = A[col + 1:, col][:, None]
        r_ = A[col, col + 1:][None, :]
        A[col + 1:, col + 1:] = (sub * p - c * r_) // prev
        prev = p
    det = sign * A[n - 1, n - 1]
    if den != 1:
        det = Fraction(det, den ** n)
    return det


def independent_columns_exact(M):
    """Indices of a maximal independent column subset (exact)."""
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return []
    _, piv = exact_echelon(M, want_pivots=True)
    return piv


_MODP = 2147483647  # 2^31 - 1, prime; products of residues fit in int64


def _modp_pivot_columns(M_int):
    """Pivot columns of `M_int` over Z/p.  The mod-p rank never exceeds the
    rank over Q, so these are candidates, not a certificate."""
    A = np.empty(M_int.shape, dtype=np.int64)
    for j in range(M_int.shape[1]):
        A[:, j] = [v % _MODP for v in M_int[:, j]]
    m, n = A.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(A[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            A[[row, piv], :] = A[[piv, row], :]
        inv = pow(int(A[row, col]), -1, _MODP)
        A[row, col:] = (A[row, col:] * inv) % _MODP
        below = A[row + 1:, col][:, None]
        A[row + 1:, col:] = (A[row + 1:, col:] - below * A[row, col:][None, :]) % _MODP
        pivots.append(col)
        row += 1
    return pivots


def independent_columns_bounded(M, upper_bound):
    """Maximal independent column subset when rank(M) <= upper_bound is known.

    Candidates come from a fast mod-p elimination; if exactly `upper_bound`
    candidates confirm independent over Q, they are a maximal subset (the
    bound rules out anything larger).  Otherwise falls back to the full
    exact elimination.
    """
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return []
    Mi = _normalize_columns(to_integer_columns(M))
    candidates = _modp_pivot_columns(Mi)
    if len(candidates) == upper_bound:
        confirmed = exact_echelon(Mi[:, candidates])
        if confirmed == upper_bound:
            return candidates
    _, piv = exact_echelon(Mi, want_pivots=True)
    return piv


def fraction_rref(M):
    """Reduced row echelon form over Fractions.

    Returns (R, pivot_columns) with R a Fraction object matrix.  Intended
    for small systems (nullspaces, membership tests); the Bareiss path is
    the one used on large tangent matrices.
    """
    A = np.asarray(M, dtype=object).copy()
    m, n = A.shape
    A = np.array([[Fraction(x) for x in row] for row in A], dtype=object) \
        if m else A
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        piv = next((r for r in range(row, m) if A[r, col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            A[[row, piv], :] = A[[piv, row], :]
        A[row, :] = A[row, :] / A[row, col]
        for r in range(m):
            if r != row and A[r, col] != 0:
                A[r, :] = A[r, :] - A[r, col] * A[row, :]
        pivots.append(col)
        row += 1
    return A, pivots


def exact_nullspace(M):
    """Integer basis of the right nullspace of an int/Fraction matrix.

    Returns a matrix whose columns span {x : M x = 0}; empty (n, 0) matrix
    when the kernel is trivial.
    """
    M = np.asarray(M, dtype=object)
    m, n = M.shape
    if m == 0:
        return np.array([[1 if i == j else 0 for j in range(n)]
                         for i in range(n)], dtype=object)
    R, pivots = fraction_rref(M)
    free = [j for j in range(n) if j not in pivots]
    cols = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -R[r, f]
        den = 1
        for v in x:
            den = _lcm(den, v.denominator)
        xi = [int(v * den) for v in x]
        g = 0
        for v in xi:
            g = gcd(g, abs(v))
        if g > 1:
            xi = [v // g for v in xi]
        cols.append(xi)
    if not cols:
        return np.zeros((n, 0), dtype=object)
    return np.array(cols, dtype=object).T


def exact_left_inverse(E):
    """Fraction matrix L with L @ E = I, for a full-column-rank int/Fraction E."""
    E = np.asarray(E, dtype=object)
    m, k = E.shape
    aug = np.concatenate([E, np.eye(m, dtype=int).astype(object)], axis=1)
    R, pivots = fraction_rref(aug)
    if pivots[:k] != list(range(k)):
        raise ValueError("matrix does not have full column rank")
    return R[:k, k:]


def exact_in_span(basis, v) -> bool:
    """Exact membership of vector `v` in the column span of `basis`."""
    basis = np.asarray(basis, dtype=object)
    v = np.asarray(v, dtype=object).reshape(-1, 1)
    if basis.shape[1] == 0:
        return bool(all(x == 0 for x in v[:, 0]))
    stacked = np.concatenate([basis, v], axis=1)
    return exact_rank(stacked) == exact_rank(basis)


def intersect_column_spans(A, B):
    """Integer basis of col(A) ∩ col(B), both int/Fraction matrices."""
    A = to_integer_columns(np.asarray(A, dtype=object))
    B = to_integer_columns(np.asarray(B, dtype=object))
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=object)
    stacked = np.concatenate([A, -B], axis=1)
    N = exact_nullspace(stacked)
    if N.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=object)
    inter = A @ N[:A.shape[1], :]
    keep = independent_columns_exact(inter)
    return inter[:, keep]


# ---------------------------------------------------------------------------
# float mode


def numeric_rank(M, tol=FLOAT_RANK_TOL) -> int:
    """Numerical rank: singular values above tol * sigma_max."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M.astype(complex), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > tol * s[0]).sum())


def independent_columns_float(M, tol=FLOAT_RANK_TOL):
    """Greedy pivoted-QR selection of a maximal independent column subset."""
    import scipy.linalg

    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return []
    r = numeric_rank(M, tol)
    _, _, perm = scipy.linalg.qr(M, pivoting=True, mode='economic')
    return sorted(perm[:r].tolist())


def orthogonal_complement(M, tol=FLOAT_RANK_TOL):
    """Orthonormal basis (columns) of the annihilator of col(M)."""
    M = np.asarray(M, dtype=complex)
    m = M.shape[0]
    if M.shape[1] == 0:
        return np.eye(m, dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=True)
    r = int((s > tol * s[0]).sum()) if s.size and s[0] > 0 else 0
    return u[:, r:]


def matrix_rank(M, tol=FLOAT_RANK_TOL) -> int:
    """Rank in the arithmetic implied by the dtype of `M`."""
    M = np.asarray(M)
    return exact_rank(M) if M.dtype == object else numeric_rank(M, tol)
