"""Alternating least squares for rank-(1, L_r, L_r) block terms, canonical
forms modulo the trivial ambiguities, and a multistart uniqueness probe.

One sweep solves, in closed form, the joint least-squares subproblem for all
mixing vectors a_r, then all B_r, then all C_r; the residual is therefore
non-increasing sweep over sweep.  An exact line search along the sweep
direction (the residual along it is a degree-6 polynomial in the step) is
applied when it helps, which breaks the long swamps this model family is
known for.  The probe can additionally polish stalled runs with a
Gauss-Newton pass before clustering solutions by equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .conditions import evaluate_theorem
from .linalg import numeric_rank
from .tensor_core import BlockTermSpec, DenseTensor, GroundTruth, rng_for, \
    synth_block_term

MAX_SWEEPS = 500
REL_TOL = 1e-12
SUCCESS_RESIDUAL = 1e-6
RIDGE_SCALE = 1e-12


@dataclass(frozen=True)
class BTDSolution:
    spec: BlockTermSpec
    blocks: tuple  # (a_r, B_r, C_r) triples
    residual: float
    sweeps: int = 0
    notes: tuple = field(default=())
    history: tuple = field(default=())  # residual after each sweep

    def factors(self):
        A = np.stack([a for a, _, _ in self.blocks], axis=1)
        Bs = [B for _, B, _ in self.blocks]
        Cs = [C for _, _, C in self.blocks]
        return A, Bs, Cs

    def tensor(self) -> DenseTensor:
        return DenseTensor(_model(*self.factors()))


@dataclass(frozen=True)
class CanonicalSolution:
    """Blocks ordered by (L_r, rounded mixing vector); each a_r unit norm
    with positive-real leading entry, scale pushed into X_r = B_r C_r^T."""

    spec: BlockTermSpec
    blocks: tuple  # (a_r, X_r, column_space) triples
    residual: float


@dataclass(frozen=True)
class UniquenessReport:
    spec: BlockTermSpec
    trials: int
    converged_count: int
    distinct_classes: int
    class_representatives: tuple
    class_sizes: tuple
    continuum_evidence: bool
    excess_kernel: int
    verdict: str
    matches_verdict: bool
    inconclusive: bool = False


def _model(A, Bs, Cs):
    I = A.shape[0]
    J, K = Bs[0].shape[0], Cs[0].shape[0]
    Y = np.zeros((I, J, K), dtype=complex)
    for r in range(A.shape[1]):
        Y += np.einsum('i,jk->ijk', A[:, r], Bs[r] @ Cs[r].T)
    return Y


def _ridge_solve(M, RHS, notes):
    """Least-squares solve via normal equations; ridge on singularity."""
    G = M.conj().T @ M
    rhs = M.conj().T @ RHS
    try:
        return np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        eps = RIDGE_SCALE * max(np.trace(G).real, 1.0)
        notes.append("ridge-stabilized a singular subproblem")
        return np.linalg.solve(G + eps * np.eye(G.shape[0]), rhs)


def _init_factors(Y, spec, init, seed):
    I, J, K = spec.I, spec.J, spec.K
    R = spec.R
    if isinstance(init, GroundTruth):
        A = init.mixing_matrix().astype(complex)
        Bs = [np.asarray(B, dtype=complex) for _, B, _ in init.blocks]
        Cs = [np.asarray(C, dtype=complex) for _, _, C in init.blocks]
        return A, Bs, Cs
    rng = rng_for(seed, 3)
    cg = lambda *s: (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2)
    if init == "random":
        return cg(I, R), [cg(J, L) for L in spec.L], [cg(K, L) for L in spec.L]
    if init == "mode1-svd":
        U = np.linalg.svd(Y.reshape(I, -1), full_matrices=False)[0]
        A = U[:, :R] if U.shape[1] >= R else np.concatenate(
            [U, cg(I, R - U.shape[1])], axis=1)
        G = np.linalg.lstsq(A, Y.reshape(I, -1), rcond=None)[0]
        Bs, Cs = [], []
        for r, L in enumerate(spec.L):
            u, s, vh = np.linalg.svd(G[r].reshape(J, K))
            Bs.append(u[:, :L] * np.sqrt(s[:L]))
            Cs.append(vh[:L].conj().T * np.sqrt(s[:L]))
        return A, Bs, Cs
    raise ValueError(f"unknown init {init!r}")


def _line_search(Y, old, new, res_new):
    """Minimize the residual along old + t (new - old); degree-6 polynomial.

    Returns (factors, residual); t = 1 (the plain sweep) is the fallback, so
    the accepted step never increases the residual.
    """
    A0, B0, C0 = old
    A1, Bs, Cs = new
    R = A0.shape[1]
    dA = A1 - A0
    dB = [Bs[r] - B0[r] for r in range(R)]
    dC = [Cs[r] - C0[r] for r in range(R)]

    def at(t):
        return (A0 + t * dA, [B0[r] + t * dB[r] for r in range(R)],
                [C0[r] + t * dC[r] for r in range(R)])

    ts = np.array([0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    vals = [float(np.linalg.norm(Y - _model(*at(t))) ** 2) for t in ts]
    coef = np.polynomial.polynomial.polyfit(ts, vals, 6)
    roots = np.polynomial.polynomial.polyroots(
        np.polynomial.polynomial.polyder(coef))
    best_t, best_v = 1.0, float(res_new ** 2)
    for z in roots:
        if abs(z.imag) > 1e-9 or not 0 < z.real < 64:
            continue
        t = float(z.real)
        v = float(np.linalg.norm(Y - _model(*at(t))) ** 2)
        if v < best_v:
            best_t, best_v = t, v
    if best_t == 1.0:
        return new, res_new
    return at(best_t), float(np.sqrt(best_v))


def als_fit(Y: DenseTensor, spec: BlockTermSpec, init="random", seed=0,
            max_sweeps=MAX_SWEEPS, rel_tol=REL_TOL,
            line_search=True) -> BTDSolution:
    """Fit Y = sum_r a_r (x) B_r C_r^T by alternating least squares.

    `init` is 'random' (seeded), 'mode1-svd', or a GroundTruth to start
    from.  Terminates when the relative-residual change drops below
    `rel_tol` or after `max_sweeps`.
    """
    Yd = Y.to_float().data
    if Yd.shape != (spec.I, spec.J, spec.K):
        raise ValueError(f"tensor shape {Yd.shape} does not match the problem "
                         f"sizes ({spec.I}, {spec.J}, {spec.K})")
    nY = float(np.linalg.norm(Yd))
    if nY == 0.0:
        blocks = tuple(
            (np.zeros(spec.I, complex), np.zeros((spec.J, L), complex),
             np.zeros((spec.K, L), complex)) for L in spec.L)
        return BTDSolution(spec, blocks, 0.0, 0, ("zero input",))
    R = spec.R
    notes = []
    A, Bs, Cs = _init_factors(Yd, spec, init, seed)
    Y1 = Yd.reshape(spec.I, -1)
    Y2 = np.moveaxis(Yd, 1, 0).reshape(spec.J, -1)
    Y3 = np.moveaxis(Yd, 2, 0).reshape(spec.K, -1)
    res = float(np.linalg.norm(Yd - _model(A, Bs, Cs)) / nY)
    history = []
    sweeps = 0
    for sweep in range(max_sweeps):
        prev_res = res
        old = (A.copy(), [b.copy() for b in Bs], [c.copy() for c in Cs])
        G = np.stack([(Bs[r] @ Cs[r].T).reshape(-1) for r in range(R)])
        A = _ridge_solve(G.conj().T, Y1.conj().T, notes).conj().T
        W = np.concatenate([np.kron(A[:, r:r + 1], Cs[r]) for r in range(R)],
                           axis=1)
        Bstack = _ridge_solve(W, Y2.T, notes).T
        off = 0
        for r, L in enumerate(spec.L):
            Bs[r] = Bstack[:, off:off + L]
            off += L
        V = np.concatenate([np.kron(A[:, r:r + 1], Bs[r]) for r in range(R)],
                           axis=1)
        Cstack = _ridge_solve(V, Y3.T, notes).T
        off = 0
        for r, L in enumerate(spec.L):
            Cs[r] = Cstack[:, off:off + L]
            off += L
        res = float(np.linalg.norm(Yd - _model(A, Bs, Cs)) / nY)
        if line_search:
            (A, Bs, Cs), abs_res = _line_search(Yd, old, (A, Bs, Cs), res * nY)
            res = float(abs_res / nY)
        history.append(res)
        sweeps = sweep + 1
        if abs(prev_res - res) < rel_tol or res < 1e-15:
            break
    blocks = tuple((A[:, r].copy(), Bs[r], Cs[r]) for r in range(R))
    return BTDSolution(spec, blocks, res, sweeps, tuple(dict.fromkeys(notes)),
                       tuple(history))


# ---------------------------------------------------------------------------
# canonical forms and equivalence


class DegenerateBlockError(ValueError):
    """A mixing vector has (numerically) zero norm; no canonical scale."""


def canonicalize(sol: BTDSolution, tol=1e-9) -> CanonicalSolution:
    """Quotient out the trivial ambiguities.

    Each a_r is scaled to unit norm with a positive-real leading entry, the
    inverse scale absorbed into X_r = B_r C_r^T; blocks are then sorted by
    (L_r, entries of a_r rounded to 6 decimals).  Invariant under block
    permutations among equal L_r and under scale/counter-scale, and
    idempotent up to roundoff.
    """
    entries = []
    for r, (a, B, C) in enumerate(sol.blocks):
        a = np.asarray(a, dtype=complex)
        X = np.asarray(B, dtype=complex) @ np.asarray(C, dtype=complex).T
        na = float(np.linalg.norm(a))
        if na < tol:
            raise DegenerateBlockError(f"block {r} has near-zero mixing vector")
        lead = next(x for x in a if abs(x) > tol * na)
        phase = lead / abs(lead)
        scale = na * phase
        a_c = a / scale
        X_c = X * scale
        L = sol.spec.L[r]
        key = (L, tuple((round(z.real, 6), round(z.imag, 6)) for z in a_c))
        u, s, _ = np.linalg.svd(X_c)
        colspace = u[:, :L]
        entries.append((key, (a_c, X_c, colspace)))
    entries.sort(key=lambda kv: kv[0])
    return CanonicalSolution(sol.spec, tuple(b for _, b in entries),
                             sol.residual)


def solutions_equivalent(s1: CanonicalSolution, s2: CanonicalSolution,
                         tol=1e-6) -> bool:
    """Per-block closeness of a_r (x) X_r after canonicalization.

    In-order pairing is tried first; on failure, permutations within
    equal-L_r groups (the trivial permutation ambiguity) are searched.
    """
    if s1.spec != s2.spec:
        raise ValueError("solutions describe different problem sizes")

    def term(block):
        a, X, _ = block
        return np.multiply.outer(a, X)

    def close(b1, b2):
        t1, t2 = term(b1), term(b2)
        return bool(np.linalg.norm(t1 - t2) <=
                    tol * max(np.linalg.norm(t1), 1e-300))

    if all(close(b1, b2) for b1, b2 in zip(s1.blocks, s2.blocks)):
        return True
    from itertools import groupby, permutations
    Ls = s1.spec.L
    groups = [(L, [i for i, x in enumerate(Ls) if x == L])
              for L, _ in groupby(Ls)]
    # try matching within equal-L groups (greedy bipartite; sizes are tiny)
    for _, idxs in groups:
        if len(idxs) == 1:
            if not close(s1.blocks[idxs[0]], s2.blocks[idxs[0]]):
                return False
            continue
        matched = False
        for perm in permutations(idxs):
            if all(close(s1.blocks[i], s2.blocks[j])
                   for i, j in zip(idxs, perm)):
                matched = True
                break
        if not matched:
            return False
    return True


# ---------------------------------------------------------------------------
# fitting Jacobian, Gauss-Newton polish, uniqueness probe


def fit_jacobian(sol: BTDSolution):
    """Holomorphic Jacobian of (a_r, B_r, C_r) -> sum a_r (x) B_r C_r^T,
    columns ordered (all a entries, all B entries, all C entries)."""
    spec = sol.spec
    A, Bs, Cs = sol.factors()
    I, J, K = spec.I, spec.J, spec.K
    cols = []
    for r in range(spec.R):
        X = Bs[r] @ Cs[r].T
        for i in range(I):
            T = np.zeros((I, J, K), complex)
            T[i] = X
            cols.append(T.reshape(-1))
    for r in range(spec.R):
        for l in range(spec.L[r]):
            for j in range(J):
                T = np.einsum('i,k->ik', A[:, r], Cs[r][:, l])
                full = np.zeros((I, J, K), complex)
                full[:, j, :] = T
                cols.append(full.reshape(-1))
    for r in range(spec.R):
        for l in range(spec.L[r]):
            for k in range(K):
                T = np.einsum('i,j->ij', A[:, r], Bs[r][:, l])
                full = np.zeros((I, J, K), complex)
                full[:, :, k] = T
                cols.append(full.reshape(-1))
    return np.stack(cols, axis=1)


def gauge_dimension(spec: BlockTermSpec) -> int:
    """Complex dimension of the trivial-ambiguity orbit: per block one
    scale/counter-scale plus the GL(L_r) mixing inside B_r C_r^T."""
    return spec.R + sum(L * L for L in spec.L)


def continuum_check(sol: BTDSolution, tol=1e-7):
    """Excess kernel of the fitting Jacobian beyond the gauge dimension.

    A positive excess at an exact solution means the solution set has
    positive dimension modulo the trivial ambiguities.
    """
    Jc = fit_jacobian(sol)
    params = Jc.shape[1]
    rank = numeric_rank(Jc, tol)
    kernel = params - rank
    excess = kernel - gauge_dimension(sol.spec)
    return excess, kernel


def solution_from_ground_truth(gt: GroundTruth, Y: DenseTensor) -> BTDSolution:
    """Wrap generating factors as a solution, with its residual against Y."""
    blocks = tuple((np.asarray(a, complex), np.asarray(B, complex),
                    np.asarray(C, complex)) for a, B, C in gt.blocks)
    sol = BTDSolution(gt.spec, blocks, 0.0, 0, ("ground truth",))
    Yf = Y.to_float().data
    nY = max(float(np.linalg.norm(Yf)), 1e-300)
    res = float(np.linalg.norm(Yf - sol.tensor().data) / nY)
    return BTDSolution(gt.spec, blocks, res, 0, ("ground truth",))


def _gauss_newton_polish(Y, spec, sol: BTDSolution, max_nfev=400):
    """Trust-region refinement of a stalled fit; returns a BTDSolution.

    The residual is holomorphic in the parameters, so the real Jacobian is
    assembled from the complex one in closed form.
    """
    I, J, K = spec.I, spec.J, spec.K
    Ls = spec.L
    R = spec.R
    nY = float(np.linalg.norm(Y))

    def unpack(x):
        n = x.size // 2
        z = x[:n] + 1j * x[n:]
        A = z[:I * R].reshape(I, R)
        off = I * R
        Bs, Cs = [], []
        for L in Ls:
            Bs.append(z[off:off + J * L].reshape(J, L))
            off += J * L
        for L in Ls:
            Cs.append(z[off:off + K * L].reshape(K, L))
            off += K * L
        return A, Bs, Cs

    def fun(x):
        d = (_model(*unpack(x)) - Y).reshape(-1)
        return np.concatenate([d.real, d.imag])

    def jac(x):
        A, Bs, Cs = unpack(x)
        cols = []
        Xs = [Bs[r] @ Cs[r].T for r in range(R)]
        for i in range(I):  # pack order: A[i, r] with r fastest
            for r in range(R):
                T = np.zeros((I, J, K), complex)
                T[i] = Xs[r]
                cols.append(T.reshape(-1))
        for r in range(R):  # then B_r[j, l] with l fastest
            for j in range(J):
                for l in range(Ls[r]):
                    T = np.zeros((I, J, K), complex)
                    T[:, j, :] = np.einsum('i,k->ik', A[:, r], Cs[r][:, l])
                    cols.append(T.reshape(-1))
        for r in range(R):  # then C_r[k, l] with l fastest
            for k in range(K):
                for l in range(Ls[r]):
                    T = np.zeros((I, J, K), complex)
                    T[:, :, k] = np.einsum('i,j->ij', A[:, r], Bs[r][:, l])
                    cols.append(T.reshape(-1))
        Jc = np.stack(cols, axis=1)
        return np.block([[Jc.real, -Jc.imag], [Jc.imag, Jc.real]])

    A, Bs, Cs = sol.factors()
    z = np.concatenate([A.reshape(-1)] + [b.reshape(-1) for b in Bs]
                       + [c.reshape(-1) for c in Cs])
    x0 = np.concatenate([z.real, z.imag])
    out = scipy.optimize.least_squares(fun, x0, jac=jac, method="trf",
                                       xtol=3e-16, ftol=3e-16, gtol=3e-16,
                                       max_nfev=max_nfev)
    A, Bs, Cs = unpack(out.x)
    res = float(np.linalg.norm(_model(A, Bs, Cs) - Y) / nY)
    if res >= sol.residual:
        return sol
    blocks = tuple((A[:, r].copy(), Bs[r], Cs[r]) for r in range(R))
    return BTDSolution(spec, blocks, res, sol.sweeps,
                       sol.notes + ("gauss-newton polish",))


def uniqueness_probe(spec: BlockTermSpec, trials=20, seed=0,
                     success_residual=SUCCESS_RESIDUAL, equiv_tol=1e-6,
                     max_sweeps=MAX_SWEEPS, polish=True,
                     sampler="complex-gaussian", workers=1) -> UniquenessReport:
    """Synthesize one instance, fit from `trials` random starts, and cluster
    the converged solutions into equivalence classes.

    Continuum evidence is the excess Jacobian kernel at an exact solution
    (the ground truth always provides one).  The empirical findings are
    compared against the arithmetic verdict for the same sizes.  Starts are
    independent; `workers` > 1 runs them in a thread pool, with results
    assembled in start order either way.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    Y, gt = synth_block_term(spec, seed, sampler)
    Yf = Y.to_float()
    gt_sol = solution_from_ground_truth(gt, Yf)
    excess, _ = continuum_check(gt_sol)
    continuum = excess > 0

    def one_start(t):
        sol = als_fit(Yf, spec, init="random", seed=seed * 100003 + t,
                      max_sweeps=max_sweeps)
        if polish and sol.residual > success_residual * 1e-2:
            sol = _gauss_newton_polish(Yf.data, spec, sol)
        return sol

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(one_start, range(trials)))
    else:
        solutions = [one_start(t) for t in range(trials)]
    converged = [s for s in solutions if s.residual <= success_residual]
    classes = []
    sizes = []
    for s in sorted(converged, key=lambda s: s.residual):
        c = canonicalize(s)
        for i, rep in enumerate(classes):
            if solutions_equivalent(rep, c, equiv_tol):
                sizes[i] += 1
                break
        else:
            classes.append(c)
            sizes.append(1)
    verdict = evaluate_theorem(spec).verdict
    n = len(classes)
    if verdict == "EssentiallyUnique":
        matches = n == 1 and not continuum
    elif verdict == "PartiallyUnique":
        matches = n >= 1 and not continuum
    elif verdict == "InfinitelyMany":
        matches = n > 1 or continuum
    else:
        matches = True
    inconclusive = not converged and not continuum
    return UniquenessReport(spec, trials, len(converged), n, tuple(classes),
                            tuple(sizes), continuum, excess, verdict,
                            matches, inconclusive)
