"""Subspace varieties: generic points, affine tangent and conormal spaces.

A subspace variety collects the tensors whose mode-``i`` images have
dimension at most ``k_i``.  At a generic point written through frames
``E_i`` (mode subspaces) with a generic core, the affine tangent space is

    (E_1 (x) ... (x) E_n)  +  sum_i  A_i (x) image_i,

where ``image_i`` is the mode-``i`` image of the point.  The generator list
built here mirrors that formula literally (core block plus one block per
mode); the stored basis is a maximal independent subset of the generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

import numpy as np

from .linalg import (
    FLOAT_RANK_TOL,
    exact_in_span,
    exact_left_inverse,
    exact_nullspace,
    exact_rank,
    independent_columns_bounded,
    independent_columns_exact,
    independent_columns_float,
    numeric_rank,
    orthogonal_complement,
    to_integer_columns,
)
from .tensor_core import (
    DEFAULT_INTEGER_BOUND,
    DenseTensor,
    Shape,
    flatten,
    mode_multiply,
    multilinear_rank,
    rng_for,
    sample_entries,
)

GENERIC_SAMPLING_ATTEMPTS = 5


@dataclass(frozen=True)
class SubspaceVarietySpec:
    """Ambient shape plus one mode rank bound per mode."""

    ambient: Shape
    mode_ranks: tuple

    def __post_init__(self):
        if not isinstance(self.ambient, Shape):
            object.__setattr__(self, "ambient", Shape(tuple(self.ambient)))
        ks = tuple(int(k) for k in self.mode_ranks)
        object.__setattr__(self, "mode_ranks", ks)
        if len(ks) != self.ambient.order:
            raise ValueError("need one mode rank per mode")
        for k, a in zip(ks, self.ambient.dims):
            if not 1 <= k <= a:
                raise ValueError(f"mode rank {k} outside [1, {a}]")

    @property
    def unbalanced(self):
        """True when some k_i exceeds the product of the others; generic
        elements then have mode-i rank below k_i."""
        ks = self.mode_ranks
        return any(k > prod(ks) // k for k in ks)

    def is_full(self):
        return self.mode_ranks == self.ambient.dims


@dataclass(frozen=True)
class VarietyPoint:
    """A tensor together with frames exhibiting its mode subspaces."""

    spec: SubspaceVarietySpec
    tensor: DenseTensor
    frames: tuple

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(np.asarray(E) for E in self.frames))
        for E, a, k in zip(self.frames, self.spec.ambient.dims, self.spec.mode_ranks):
            if E.shape != (a, k):
                raise ValueError(f"frame of shape {E.shape}, expected ({a}, {k})")

    @property
    def is_exact(self):
        return self.tensor.is_exact

    def verify(self, tol=FLOAT_RANK_TOL):
        """Check frame ranks and membership of the tensor in the frame product.

        Membership is checked by mode-multiplying with a left annihilator of
        each frame, which must give the zero tensor.
        """
        for i, E in enumerate(self.frames):
            k = self.spec.mode_ranks[i]
            r = exact_rank(E) if E.dtype == object else numeric_rank(E, tol)
            if r != k:
                return False
            ann = (exact_nullspace(E.T).T if E.dtype == object
                   else orthogonal_complement(E, tol).conj().T)
            if ann.shape[0] == 0:
                continue
            Z = mode_multiply(self.tensor, ann, i)
            if Z.data.dtype == object:
                if any(v != 0 for v in Z.data.reshape(-1)):
                    return False
            elif np.linalg.norm(Z.data) > tol * max(self.tensor.norm(), 1.0):
                return False
        return True


@dataclass(frozen=True)
class LinearSubspace:
    """Subspace of the ambient tensor space, columns = vectorized tensors."""

    ambient_dim: int
    basis: np.ndarray
    arithmetic_mode: str  # 'float' | 'rational'

    def __post_init__(self):
        basis = np.asarray(self.basis)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise ValueError("basis must be ambient_dim x d")
        if self.arithmetic_mode not in ("float", "rational"):
            raise ValueError("arithmetic_mode must be 'float' or 'rational'")
        if self.arithmetic_mode == "rational":
            basis = np.asarray(basis, dtype=object)
        else:
            basis = basis.astype(complex)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self):
        return self.basis.shape[1]

    @classmethod
    def from_generators(cls, generators, arithmetic_mode, tol=FLOAT_RANK_TOL,
                        rank_bound=None):
        """Reduce a (possibly dependent) generator list to a stored basis.

        `rank_bound`, when the caller can prove one, enables a fast exact
        reduction (mod-p preselection confirmed over Q).
        """
        G = np.asarray(generators)
        if arithmetic_mode == "rational":
            G = to_integer_columns(np.asarray(G, dtype=object))
            keep = (independent_columns_bounded(G, rank_bound)
                    if rank_bound is not None else independent_columns_exact(G))
        else:
            G = G.astype(complex)
            keep = independent_columns_float(G, tol)
        return cls(G.shape[0], G[:, keep], arithmetic_mode)

    def contains(self, v, tol=FLOAT_RANK_TOL):
        if self.arithmetic_mode == "rational":
            return exact_in_span(self.basis, np.asarray(v, dtype=object))
        v = np.asarray(v, dtype=complex).reshape(-1)
        if self.dim == 0:
            return bool(np.linalg.norm(v) <= tol)
        resid = v - self.basis @ np.linalg.lstsq(self.basis, v, rcond=None)[0]
        return bool(np.linalg.norm(resid) <= tol * max(np.linalg.norm(v), 1.0))


def affine_cone_dimension(spec: SubspaceVarietySpec) -> int:
    """prod(k_i) + sum_i k_i (a_i - k_i); affine = projective + 1."""
    if spec.unbalanced:
        raise ValueError(
            "unbalanced ranks: some k_i exceeds the product of the others, "
            "generic points then have smaller mode rank")
    ks, dims = spec.mode_ranks, spec.ambient.dims
    return prod(ks) + sum(k * (a - k) for k, a in zip(ks, dims))


def sample_point(spec: SubspaceVarietySpec, sampler="integer-uniform", seed=0,
                 bound=DEFAULT_INTEGER_BOUND, tol=FLOAT_RANK_TOL) -> VarietyPoint:
    """Generic point: full-column-rank frames and a core of exact mode rank.

    Deterministic given (spec, sampler, seed).
    """
    if spec.unbalanced:
        raise ValueError("unbalanced ranks: generic sampling is not defined")
    rng = rng_for(seed, 13)
    ks, dims = spec.mode_ranks, spec.ambient.dims
    exact = sampler == "integer-uniform"
    for _ in range(100):
        frames = []
        for a, k in zip(dims, ks):
            E = np.asarray(sample_entries(rng, (a, k), sampler, bound))
            while (exact_rank(E) if exact else numeric_rank(E, tol)) != k:
                E = np.asarray(sample_entries(rng, (a, k), sampler, bound))
            frames.append(E)
        core = DenseTensor(sample_entries(rng, tuple(ks), sampler, bound))
        if multilinear_rank(core, tol).ranks != tuple(ks):
            continue
        T = core
        for i, E in enumerate(frames):
            T = mode_multiply(T, E, i)
        point = VarietyPoint(spec, T, tuple(frames))
        object.__setattr__(point, "_core", core)
        return point
    raise RuntimeError("failed to sample a point with exact mode ranks")


def _point_core(p: VarietyPoint):
    """Core coordinates of the point inside its frame product."""
    core = getattr(p, "_core", None)
    if core is not None:
        return core
    T = p.tensor
    if p.is_exact:
        for i, E in enumerate(p.frames):
            T = mode_multiply(T, exact_left_inverse(E), i)
        return T
    T = T.to_float()
    for i, E in enumerate(p.frames):
        T = mode_multiply(T, np.linalg.pinv(E.astype(complex)), i)
    return T


def tangent_generators(p: VarietyPoint):
    """Raw (possibly dependent) tangent generators at `p`, as columns.

    Core block: the frame product basis.  Mode-``i`` block: each ambient
    basis vector in slot ``i`` tensored with each basis vector of the
    mode-``i`` image, the image being the lift of the core's mode-``i``
    row space through the remaining frames.
    """
    spec = p.spec
    ks, dims = spec.mode_ranks, spec.ambient.dims
    n = len(dims)
    exact = p.is_exact
    core = _point_core(p)
    frames = [np.asarray(E) for E in p.frames]
    if not exact:
        frames = [E.astype(complex) for E in frames]

    def kron_all(mats):
        out = None
        for M in mats:
            out = M if out is None else np.kron(out, M)
        return out

    cols = [kron_all(frames)]  # ambient_size x prod(k)
    for i in range(n):
        others = kron_all([frames[j] for j in range(n) if j != i])
        Gi = flatten(core, i)  # k_i x prod(k_j, j != i)
        image = others @ Gi.T  # lifted image basis, one column per core row
        rest = [d for j, d in enumerate(dims) if j != i]
        for t in range(dims[i]):
            for c in range(ks[i]):
                block = np.zeros(dims, dtype=object if exact else complex)
                sl = [slice(None)] * n
                sl[i] = t
                block[tuple(sl)] = image[:, c].reshape(rest)
                cols.append(block.reshape(-1, 1))
    return np.concatenate(cols, axis=1)


def tangent_basis(p: VarietyPoint, tol=FLOAT_RANK_TOL) -> LinearSubspace:
    """Affine tangent space at `p` as a reduced LinearSubspace."""
    gens = tangent_generators(p)
    mode = "rational" if p.is_exact else "float"
    # the generator span is a Jacobian image, so its rank never exceeds the
    # variety dimension; that bound legitimizes the fast exact reduction
    bound = None
    if mode == "rational" and not p.spec.unbalanced:
        bound = affine_cone_dimension(p.spec)
    return LinearSubspace.from_generators(gens, mode, tol, rank_bound=bound)


def generic_point_with_tangent(spec, sampler="integer-uniform", seed=0,
                               bound=DEFAULT_INTEGER_BOUND, tol=FLOAT_RANK_TOL):
    """Sample until the tangent rank hits the dimension formula.

    Genericity is Zariski-open, so a random point fails with probability
    ~0; the check makes failures loud instead of silent under-counts.
    """
    want = affine_cone_dimension(spec)
    for attempt in range(GENERIC_SAMPLING_ATTEMPTS):
        p = sample_point(spec, sampler, seed + 1000003 * attempt, bound, tol)
        t = tangent_basis(p, tol)
        if t.dim == want:
            return p, t
    raise RuntimeError(
        f"no generic point found in {GENERIC_SAMPLING_ATTEMPTS} attempts "
        f"(achieved {t.dim}, formula {want})")


def conormal_basis(s: LinearSubspace) -> LinearSubspace:
    """Annihilator of `s`: dim(s) + dim(result) = ambient_dim."""
    if s.arithmetic_mode == "rational":
        if s.dim == 0:
            basis = np.array([[1 if i == j else 0 for j in range(s.ambient_dim)]
                              for i in range(s.ambient_dim)], dtype=object)
        else:
            basis = exact_nullspace(np.asarray(s.basis, dtype=object).T)
        return LinearSubspace(s.ambient_dim, basis, "rational")
    return LinearSubspace(s.ambient_dim, orthogonal_complement(s.basis), "float")


def is_tangent_hyperplane(h, p: VarietyPoint, tol=FLOAT_RANK_TOL) -> bool:
    """True iff the covector `h` annihilates every tangent generator at `p`.

    Exact when both the covector and the point carry int/Fraction entries.
    """
    h = np.asarray(h).reshape(-1)
    if h.shape[0] != p.spec.ambient.size:
        raise ValueError("covector length does not match the ambient space")
    h_obj = np.asarray(h, dtype=object).reshape(-1)
    exact = p.is_exact and all(isinstance(v, (int, Fraction)) for v in h_obj)
    if exact:
        if all(v == 0 for v in h_obj):
            raise ValueError("covector must be nonzero")
        vals = h_obj @ tangent_generators(p)
        return all(v == 0 for v in vals)
    hf = np.asarray(h, dtype=complex)
    if np.linalg.norm(hf) == 0:
        raise ValueError("covector must be nonzero")
    G = tangent_generators(p).astype(complex)
    scale = max(np.linalg.norm(G, axis=0).max(), 1.0)
    vals = hf @ G
    return bool(np.max(np.abs(vals)) <= tol * np.linalg.norm(hf) * scale)
