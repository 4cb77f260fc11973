"""Low-rank members of matrix spans: exact pencils, multistart nets, and the
span-intersection uniqueness check for block-term ground truths.

The decisive object is the set of matrices of rank <= L inside the span of
some of the blocks X_r.  For two matrices the span is a pencil and the
rank-drop locus is cut out exactly by the gcd of the (L+1)-minors, a binary
form whose roots we isolate in exact arithmetic for integer data.  For three
or more matrices no cheap exact method exists, so a seeded multistart
minimization of the (L+1)-th singular value probes the span; a member found
this way is re-verified, a clean sweep is only probabilistic evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
import scipy.linalg
import scipy.optimize

from .linalg import FLOAT_RANK_TOL, exact_det, exact_rank, numeric_rank
from .tensor_core import GroundTruth, rng_for

PENCIL_FLOAT_TOL = 1e-8


class DegeneratePencilError(ValueError):
    """The two matrices are linearly dependent; the span is a line."""


class CriterionHypothesisError(ValueError):
    """The ground truth violates I >= R with independent mixing vectors."""


@dataclass(frozen=True)
class PencilMember:
    """A projective coefficient pair [lambda : mu] and the member's rank."""

    coeffs: tuple
    rank: int
    exact: bool = True


@dataclass(frozen=True)
class PencilScan:
    """All rank <= L members of a pencil; iterable over its members."""

    members: tuple
    entire_pencil: bool = False
    method: str = "exact-pencil"

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class CriterionReport:
    holds: bool
    violating_subset: tuple | None = None
    violating_member: tuple | None = None  # (coeffs, rank)
    subset_methods: tuple = field(default=())
    definitive: bool = True

    def __post_init__(self):
        if not self.holds and self.violating_member is None:
            raise ValueError("a failing report must carry a witness member")


# ---------------------------------------------------------------------------
# exact pencil machinery (integer / Fraction matrices)


def _is_exact_matrix(X):
    X = np.asarray(X)
    return X.dtype == object and all(
        isinstance(v, (int, Fraction)) for v in X.reshape(-1))


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_gcd(p, q):
    """Monic gcd in Q[x]; inputs/outputs are Fraction coefficient lists."""
    p, q = [list(map(Fraction, v)) for v in (p, q)]
    _poly_trim(p), _poly_trim(q)
    while q:
        # p mod q
        while len(p) >= len(q) and p:
            factor = p[-1] / q[-1]
            shift = len(p) - len(q)
            for i, c in enumerate(q):
                p[i + shift] -= factor * c
            _poly_trim(p)
        p, q = q, p
    if p:
        lead = p[-1]
        p = [c / lead for c in p]
    return p


def _interp_minor_poly(S1, S2):
    """Coefficients of det(lambda*S1 + S2) by exact interpolation."""
    d = S1.shape[0]
    xs = list(range(d + 1))
    ys = [exact_det(x * S1 + S2) for x in xs]
    # Newton's divided differences over Q
    coeffs = [Fraction(y) for y in ys]
    for j in range(1, d + 1):
        for i in range(d, j - 1, -1):
            coeffs[i] = (coeffs[i] - coeffs[i - 1]) / Fraction(xs[i] - xs[i - j])
    # expand newton form to monomial coefficients
    poly = [Fraction(0)] * (d + 1)
    for i in range(d, -1, -1):
        # poly = poly * (x - xs[i]) + coeffs[i]
        new = [Fraction(0)] * (d + 1)
        for k in range(d):
            new[k + 1] += poly[k]
            new[k] -= poly[k] * xs[i]
        new[0] += coeffs[i]
        poly = new
    return _poly_trim(poly)


def _integer_primitive(p):
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _divisors(n):
    n = abs(n)
    out = {1}
    f = 1
    while f * f <= n:
        if n % f == 0:
            out.add(f)
            out.add(n // f)
        f += 1
    return out


def _rational_roots(p):
    """Rational roots of an integer polynomial and the deflated remainder.

    Each root is reported once (projective points, multiplicity dropped).
    """
    p = [Fraction(c) for c in p]
    roots = []
    if p and p[0] == 0:
        roots.append(Fraction(0))
        while p and p[0] == 0:
            p = p[1:]
    while len(p) > 1:
        prim = _integer_primitive(p)
        hit = None
        for num in sorted(_divisors(prim[0])):
            for den in sorted(_divisors(prim[-1])):
                for s in (1, -1):
                    r = Fraction(s * num, den)
                    if _poly_eval(p, r) == 0:
                        hit = r
                        break
                if hit is not None:
                    break
            if hit is not None:
                break
        if hit is None:
            break
        roots.append(hit)
        p = _poly_deflate(p, hit)
    return sorted(set(roots)), p


def _poly_eval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_deflate(p, r):
    """Divide p by (x - r) via synthetic division, exactly."""
    out = [Fraction(0)] * (len(p) - 1)
    acc = p[-1]
    for i in range(len(p) - 2, -1, -1):
        out[i] = acc
        acc = p[i] + acc * r
    return out


def _member_rank_exact(lam: Fraction, X1, X2):
    p, q = lam.numerator, lam.denominator
    return exact_rank(p * X1 + q * X2)


def pencil_low_rank_members(X1, X2, L, tol=PENCIL_FLOAT_TOL) -> PencilScan:
    """All [lambda : mu] with rank(lambda X1 + mu X2) <= L.

    Integer or Fraction input runs the exact minor-gcd path; complex input
    collects candidates from the generalized eigenvalue structure of the
    pencil and verifies each by singular values.  [1:0] and [0:1] are always
    checked.  A pencil lying entirely in the rank <= L locus is flagged
    ``entire_pencil`` with the endpoints reported as representatives.
    """
    X1 = np.asarray(X1)
    X2 = np.asarray(X2)
    if X1.shape != X2.shape or X1.ndim != 2:
        raise ValueError("need two matrices of identical shape")
    exact = _is_exact_matrix(X1) and _is_exact_matrix(X2)
    if exact:
        if exact_rank(np.concatenate(
                [X1.reshape(-1, 1), X2.reshape(-1, 1)], axis=1)) < 2:
            raise DegeneratePencilError("matrices are linearly dependent")
        return _pencil_exact(X1, X2, L)
    A = np.concatenate([np.asarray(X1, dtype=complex).reshape(-1, 1),
                        np.asarray(X2, dtype=complex).reshape(-1, 1)], axis=1)
    if numeric_rank(A, FLOAT_RANK_TOL) < 2:
        raise DegeneratePencilError("matrices are (numerically) dependent")
    return _pencil_float(np.asarray(X1, dtype=complex),
                         np.asarray(X2, dtype=complex), L, tol)


def _pencil_exact(X1, X2, L):
    J, K = X1.shape
    d = L + 1
    if d > min(J, K):
        members = tuple(
            PencilMember(c, exact_rank(c[0] * X1 + c[1] * X2)) for c in ((1, 0), (0, 1)))
        return PencilScan(members, entire_pencil=True)
    g = []  # gcd accumulator, Fraction coefficients
    all_zero = True
    for rows in itertools.combinations(range(J), d):
        for cols in itertools.combinations(range(K), d):
            S1 = X1[np.ix_(rows, cols)]
            S2 = X2[np.ix_(rows, cols)]
            p = _interp_minor_poly(S1, S2)
            if not p:
                continue
            all_zero = False
            g = _poly_gcd(g, p) if g else [Fraction(c) for c in p]
            if len(g) == 1:
                break
        if g and len(g) == 1:
            break
    if all_zero:
        members = tuple(
            PencilMember(c, exact_rank(c[0] * X1 + c[1] * X2)) for c in ((1, 0), (0, 1)))
        return PencilScan(members, entire_pencil=True)
    members = []
    if exact_rank(X1) <= L:
        members.append(PencilMember((1, 0), exact_rank(X1)))
    if exact_rank(X2) <= L:
        members.append(PencilMember((0, 1), exact_rank(X2)))
    residual = []
    if len(g) > 1:
        gi = _integer_primitive(g)
        roots, residual = _rational_roots(gi)
        for r in roots:
            if r == 0:
                continue  # [0:1] already checked
            num, den = r.numerator, r.denominator
            if num < 0:
                num, den = -num, -den
            rank = _member_rank_exact(r, X1, X2)
            if rank <= L:
                members.append(PencilMember((num, den), rank, exact=True))
    if len(residual) > 1:
        # irrational/complex roots of the remaining factor, numeric fallback
        coeffs = np.array([float(c) for c in residual], dtype=float)
        for z in np.polynomial.polynomial.polyroots(coeffs):
            M = complex(z) * np.asarray(X1, dtype=complex) + np.asarray(X2, complex)
            r = numeric_rank(M, FLOAT_RANK_TOL)
            if r <= L:
                members.append(PencilMember((complex(z), 1.0), r, exact=False))
    return PencilScan(tuple(members))


def _pencil_float(X1, X2, L, tol):
    J, K = X1.shape
    m = min(J, K)
    members = []
    if m <= L:
        for c in ((1.0, 0.0), (0.0, 1.0)):
            members.append(PencilMember(
                c, numeric_rank(c[0] * X1 + c[1] * X2, FLOAT_RANK_TOL), exact=False))
        return PencilScan(tuple(members), entire_pencil=True, method="float-pencil")
    rng = rng_for(2024, 5)
    if J != K:
        U = scipy.linalg.qr(rng.standard_normal((J, m))
                            + 1j * rng.standard_normal((J, m)), mode='economic')[0]
        V = scipy.linalg.qr(rng.standard_normal((K, m))
                            + 1j * rng.standard_normal((K, m)), mode='economic')[0]
        A1, A2 = U.conj().T @ X1 @ V, U.conj().T @ X2 @ V
    else:
        A1, A2 = X1, X2
    # det(lambda A1 + A2) = 0 at generalized eigenvalues of (A2, -A1)
    w = scipy.linalg.eigvals(A2, -A1)
    candidates = [(1.0, 0.0), (0.0, 1.0)]
    for z in w:
        if np.isfinite(z):
            candidates.append((complex(z), 1.0))
    seen = []
    for lam, mu in candidates:
        M = lam * X1 + mu * X2
        scale = np.linalg.norm(M)
        if scale == 0:
            continue
        s = np.linalg.svd(M, compute_uv=False)
        if s.size > L and s[L] > tol * s[0]:
            continue
        v = np.array([lam, mu], dtype=complex)
        v = v / np.linalg.norm(v)
        lead = v[np.argmax(np.abs(v) > 1e-12)]
        v = v * (abs(lead) / lead)
        if any(np.linalg.norm(v - u) < 1e-6 for u in seen):
            continue
        seen.append(v)
        members.append(PencilMember(
            (complex(v[0]), complex(v[1])), numeric_rank(M, FLOAT_RANK_TOL),
            exact=False))
    return PencilScan(tuple(members), method="float-pencil")


# ---------------------------------------------------------------------------
# spans of three or more matrices: multistart search


def span_low_rank_search(Xs, L, multistarts=50, tol=PENCIL_FLOAT_TOL, seed=0):
    """Best-effort search for rank <= L members of a matrix span, |Xs| >= 3.

    Minimizes the (L+1)-th singular value of the unit-coefficient
    combination from `multistarts` random starts.  Combinations proportional
    to one of the inputs are filtered out and reported separately.  An empty
    result is evidence, not proof; two-matrix spans take the exact pencil
    path instead.
    """
    Xs = [np.asarray(X, dtype=complex) for X in Xs]
    s = len(Xs)
    if s < 2:
        raise ValueError("need at least two matrices")
    if s == 2:
        scan = pencil_low_rank_members(Xs[0], Xs[1], L, tol)
        return list(scan.members), scan.entire_pencil
    J, K = Xs[0].shape
    if L >= min(J, K):
        return [], True  # vacuous: every member qualifies
    stack = np.stack([X.reshape(-1) for X in Xs])

    def combo(x):
        t = x[:s] + 1j * x[s:]
        n = np.linalg.norm(t)
        if n == 0:
            return None, None
        t = t / n
        return t, (t @ stack).reshape(J, K)

    def objective(x):
        t, M = combo(x)
        if t is None:
            return 1e6
        sv = np.linalg.svd(M, compute_uv=False)
        return sv[L] / max(sv[0], 1e-300)

    rng = rng_for(seed, 41)
    found = []
    axes = []
    for _ in range(multistarts):
        x0 = rng.standard_normal(2 * s)
        res = scipy.optimize.minimize(objective, x0, method="BFGS",
                                      options={"maxiter": 300, "gtol": 1e-12})
        if res.fun > tol:
            continue
        t, M = combo(res.x)
        if t is None:
            continue
        # normalize the projective representative: leading entry positive real
        lead = t[np.argmax(np.abs(t) > 1e-9)]
        t = t * (abs(lead) / lead)
        proportional = False
        for X in Xs:
            pair = np.stack([M.reshape(-1), X.reshape(-1)], axis=1)
            if numeric_rank(pair, 1e-7) == 1:
                proportional = True
                break
        bucket = axes if proportional else found
        if any(np.linalg.norm(t - u) < 1e-5 for u, _ in bucket):
            continue
        bucket.append((t, numeric_rank(M, FLOAT_RANK_TOL)))
    members = [PencilMember(tuple(t), r, exact=False) for t, r in found]
    return members, False


# ---------------------------------------------------------------------------
# the span-intersection uniqueness check


def delathauwer_check(gt: GroundTruth, multistarts=50, tol=PENCIL_FLOAT_TOL,
                      seed=0) -> CriterionReport:
    """Essential-uniqueness check for a block-term ground truth.

    For every subset of the blocks (size >= 2) and every block rank L in the
    subset, the span of those X_r must meet the rank <= L locus only at the
    X_r themselves (up to scale).  Two-matrix subsets are decided exactly on
    integer data; larger subsets are probed by multistart search, so a clean
    pass there is probabilistic while any witness is re-verified and
    definitive.
    """
    spec = gt.spec
    R = spec.R
    A = gt.mixing_matrix()
    if spec.I < R:
        raise CriterionHypothesisError(f"I = {spec.I} < R = {R}")
    arank = exact_rank(A) if A.dtype == object else numeric_rank(A)
    if arank < R:
        raise CriterionHypothesisError("mixing vectors a_r are dependent")
    Xs = gt.block_matrices()
    methods = []
    definitive = True
    for size in range(2, R + 1):
        for subset in itertools.combinations(range(R), size):
            for L in sorted({spec.L[j] for j in subset}, reverse=True):
                if size == 2:
                    j1, j2 = subset
                    try:
                        scan = pencil_low_rank_members(Xs[j1], Xs[j2], L, tol)
                    except DegeneratePencilError:
                        # the span is a line through both X's; any member is
                        # proportional to them, no violation possible
                        methods.append((subset, L, "degenerate-line", 0))
                        continue
                    method = scan.method
                    if scan.entire_pencil:
                        member = _fresh_pencil_member(Xs[j1], Xs[j2], L)
                        return CriterionReport(False, subset, member,
                                               tuple(methods), True)
                    extra = [m for m in scan.members
                             if not _is_endpoint(m.coeffs)]
                    if extra:
                        m = extra[0]
                        return CriterionReport(False, subset,
                                               (m.coeffs, m.rank),
                                               tuple(methods), True)
                    methods.append((subset, L, method, len(scan.members)))
                else:
                    sub = [Xs[j] for j in subset]
                    members, vacuous = span_low_rank_search(
                        sub, L, multistarts, tol, seed + 13 * size)
                    if vacuous:
                        members = [_fresh_span_member(sub, L)]
                    if members:
                        m = members[0]
                        return CriterionReport(False, subset,
                                               (m.coeffs, m.rank),
                                               tuple(methods), True)
                    methods.append((subset, L, "multistart", 0))
                    definitive = False
    return CriterionReport(True, None, None, tuple(methods), definitive)


def _is_endpoint(coeffs):
    lam, mu = coeffs
    return lam == 0 or mu == 0


def _fresh_pencil_member(X1, X2, L):
    M = X1 + X2
    rank = (exact_rank(M) if _is_exact_matrix(X1) and _is_exact_matrix(X2)
            else numeric_rank(np.asarray(M, dtype=complex)))
    return ((1, 1), rank)


def _fresh_span_member(Xs, L):
    M = sum(np.asarray(X, dtype=complex) for X in Xs)
    t = tuple(1.0 for _ in Xs)
    return PencilMember(t, numeric_rank(M), exact=False)
