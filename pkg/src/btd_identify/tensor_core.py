"""Dense complex tensors, flattenings, multilinear rank, block-term synthesis.

Tensors are stored as ndarrays in row-major (C) order over the modes in
declared order; a mode-``i`` flattening therefore has columns indexed by the
remaining modes in lexicographic order.  Two entry types are supported:
``complex128`` for floating-point work and ``object`` (Python ints) for the
exact-arithmetic certification path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import FLOAT_RANK_TOL, exact_rank, numeric_rank

DEFAULT_INTEGER_BOUND = 9

SAMPLERS = ("complex-gaussian", "integer-uniform")


def rng_for(seed, *tags):
    """Deterministic generator derived from a seed and integer tags."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, tags)]))


def sample_entries(rng, shape, sampler="complex-gaussian", bound=DEFAULT_INTEGER_BOUND):
    """Draw an array of entries per the named sampler.

    ``complex-gaussian`` gives standard complex normal entries;
    ``integer-uniform`` gives Python ints uniform on [-bound, bound] in an
    object array (the exact-arithmetic path).
    """
    if sampler == "complex-gaussian":
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    if sampler == "integer-uniform":
        raw = rng.integers(-bound, bound + 1, size=shape)
        out = np.empty(np.shape(raw), dtype=object)
        for idx in np.ndindex(*np.shape(raw)):
            out[idx] = int(raw[idx])
        return out
    raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")


@dataclass(frozen=True)
class Shape:
    """Mode dimensions of a tensor space."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise ValueError("tensor order must be at least 2")
        if any(d < 1 for d in dims):
            raise ValueError(f"mode dimensions must be positive, got {dims}")

    @property
    def order(self):
        return len(self.dims)

    @property
    def size(self):
        return int(np.prod(self.dims))


@dataclass(frozen=True)
class DenseTensor:
    """Dense tensor with explicit shape; entries complex or exact ints."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != object:
            data = data.astype(complex)
        object.__setattr__(self, "data", data)
        Shape(data.shape)  # validates order/extents

    @property
    def shape(self):
        return Shape(self.data.shape)

    @property
    def order(self):
        return self.data.ndim

    @property
    def is_exact(self):
        return self.data.dtype == object

    def to_float(self):
        """Copy with complex128 entries (identity for float tensors)."""
        if not self.is_exact:
            return self
        return DenseTensor(self.data.astype(complex))

    def norm(self):
        return float(np.linalg.norm(self.to_float().data.reshape(-1)))

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.all(self.data == other.data))


@dataclass(frozen=True)
class ModeRanks:
    """Per-mode flattening ranks."""

    ranks: tuple

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))


def zeros(shape, exact=False):
    dims = Shape(tuple(shape)).dims
    if exact:
        data = np.empty(dims, dtype=object)
        data[...] = 0
        return DenseTensor(data)
    return DenseTensor(np.zeros(dims, dtype=complex))


def outer(*vectors, exact=False):
    """Rank-one tensor from mode vectors."""
    arrs = [np.asarray(v, dtype=object if exact else complex) for v in vectors]
    T = arrs[0]
    for v in arrs[1:]:
        T = np.multiply.outer(T, v)
    return DenseTensor(T)


def flatten(T: DenseTensor, mode: int):
    """Mode-`mode` flattening: rows are slot-`mode` slices, columns the
    remaining modes in lexicographic order."""
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range for order-{T.order} tensor")
    return np.moveaxis(T.data, mode, 0).reshape(T.data.shape[mode], -1)


def multilinear_rank(T: DenseTensor, tol=FLOAT_RANK_TOL) -> ModeRanks:
    """Tuple of flattening ranks; exact for object tensors, SVD otherwise."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    ranks = []
    for mode in range(T.order):
        M = flatten(T, mode)
        ranks.append(exact_rank(M) if T.is_exact else numeric_rank(M, tol))
    return ModeRanks(tuple(ranks))


def mode_multiply(T: DenseTensor, M, mode: int) -> DenseTensor:
    """Multiply mode `mode` by the matrix `M` (rows replace that mode)."""
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range for order-{T.order} tensor")
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[1] != T.data.shape[mode]:
        raise ValueError(
            f"matrix of shape {M.shape} cannot multiply mode {mode} "
            f"of extent {T.data.shape[mode]}")
    exact = T.is_exact and M.dtype == object
    A = M if exact else M.astype(complex)
    X = T.data if exact else T.to_float().data
    out = np.tensordot(A, X, axes=(1, mode))
    return DenseTensor(np.moveaxis(out, 0, mode))


@dataclass(frozen=True)
class BlockTermSpec:
    """Problem size (I, J, K) and block ranks L_1 <= ... <= L_R."""

    I: int
    J: int
    K: int
    L: tuple

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(int(x) for x in self.L))
        for name in ("I", "J", "K"):
            v = int(getattr(self, name))
            object.__setattr__(self, name, v)
            if v < 1:
                raise ValueError(f"{name} must be positive")
        if len(self.L) < 1:
            raise ValueError("at least one block is required")
        if any(x < 1 for x in self.L):
            raise ValueError("block ranks must be positive")
        if list(self.L) != sorted(self.L):
            raise ValueError("block ranks must be sorted non-decreasing")
        bad = [x for x in self.L if x > min(self.J, self.K)]
        if bad:
            raise ValueError(
                f"block rank {bad[0]} exceeds min(J, K) = {min(self.J, self.K)}")

    @property
    def R(self):
        return len(self.L)

    @property
    def shape_hypothesis_ok(self):
        """K >= J > L_R; flagged (not rejected) when it fails."""
        return self.K >= self.J > self.L[-1]

    @property
    def ambient(self):
        return Shape((self.I, self.J, self.K))


@dataclass(frozen=True)
class GroundTruth:
    """Generating factors of a synthetic block-term tensor."""

    spec: BlockTermSpec
    blocks: tuple = field(default=())  # of (a_r, B_r, C_r)

    def __post_init__(self):
        blocks = tuple((np.asarray(a), np.asarray(B), np.asarray(C))
                       for a, B, C in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        s = self.spec
        if len(blocks) != s.R:
            raise ValueError(f"expected {s.R} blocks, got {len(blocks)}")
        for r, (a, B, C) in enumerate(blocks):
            L = s.L[r]
            if a.shape != (s.I,) or B.shape != (s.J, L) or C.shape != (s.K, L):
                raise ValueError(f"block {r} has inconsistent factor shapes")

    @property
    def is_exact(self):
        return all(a.dtype == object for a, _, _ in self.blocks)

    def block_matrices(self):
        """The rank-L_r matrices X_r = B_r C_r^T."""
        return [B @ C.T for _, B, C in self.blocks]

    def mixing_matrix(self):
        """I x R matrix with columns a_r."""
        return np.stack([a for a, _, _ in self.blocks], axis=1)

    def tensor(self) -> DenseTensor:
        s = self.spec
        exact = self.is_exact
        if exact:
            data = np.empty((s.I, s.J, s.K), dtype=object)
            data[...] = 0
        else:
            data = np.zeros((s.I, s.J, s.K), dtype=complex)
        for a, B, C in self.blocks:
            data = data + np.multiply.outer(a, B @ C.T)
        return DenseTensor(data)


def synth_block_term(spec: BlockTermSpec, seed, sampler="complex-gaussian",
                     bound=DEFAULT_INTEGER_BOUND):
    """Synthesize Y = sum_r a_r (x) B_r C_r^T with full-column-rank factors.

    Deterministic in (spec, seed, sampler); factors failing the full-rank
    requirement are resampled from the same stream.
    """
    rng = rng_for(seed, 71)
    blocks = []
    for r, L in enumerate(spec.L):
        a = _nonzero_vector(rng, spec.I, sampler, bound)
        B = _full_column_rank(rng, (spec.J, L), sampler, bound)
        C = _full_column_rank(rng, (spec.K, L), sampler, bound)
        blocks.append((a, B, C))
    gt = GroundTruth(spec, tuple(blocks))
    return gt.tensor(), gt


def _matrix_rank_any(M):
    return exact_rank(M) if M.dtype == object else numeric_rank(M)


def _nonzero_vector(rng, n, sampler, bound):
    for _ in range(100):
        a = sample_entries(rng, (n,), sampler, bound)
        if any(x != 0 for x in np.atleast_1d(a)):
            return np.asarray(a)
    raise RuntimeError("sampler keeps returning zero vectors")


def _full_column_rank(rng, shape, sampler, bound):
    for _ in range(100):
        M = np.asarray(sample_entries(rng, shape, sampler, bound))
        if _matrix_rank_any(M) == shape[1]:
            return M
    raise RuntimeError(f"could not sample a full-column-rank {shape} matrix")
