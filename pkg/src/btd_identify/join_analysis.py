"""Join dimensions and defects via Terracini's lemma, plus containment probes.

Terracini: the affine tangent space to a join at a generic sum of points is
the sum of the affine tangent spaces at the summands.  Rank of a tangent
matrix is lower-semicontinuous in the sample, so any sampled rank is a lower
bound for the generic join dimension; in rational arithmetic, hitting the
expected dimension therefore *certifies* non-defectivity.  A measured defect
(rank below expected) is correct with probability one but is reported as
evidence, never certified, unless a closed-form bound backs it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .linalg import (
    FLOAT_RANK_TOL,
    exact_rank,
    intersect_column_spans,
    numeric_rank,
    to_integer_columns,
)
from .tensor_core import DenseTensor, mode_multiply, multilinear_rank, rng_for
from .variety import (
    LinearSubspace,
    SubspaceVarietySpec,
    VarietyPoint,
    affine_cone_dimension,
    generic_point_with_tangent,
    sample_point,
    tangent_basis,
    tangent_generators,
)

DEFAULT_TRIALS = {"rational": 3, "float": 10}


@dataclass(frozen=True)
class JoinReport:
    """Dimension/defect verdict for a join of subspace varieties."""

    specs: tuple
    expected_affine_dim: int
    computed_affine_dim: int
    defect: int
    trials: int
    arithmetic_mode: str
    certified: bool
    certificate: str = ""
    per_trial: tuple = field(default=())

    def __post_init__(self):
        ambient = self.specs[0].ambient.size
        if not (self.computed_affine_dim <= self.expected_affine_dim <= ambient):
            raise ValueError("computed <= expected <= ambient violated")
        if self.defect < 0:
            raise ValueError("defect must be nonnegative")


@dataclass(frozen=True)
class TwdReport:
    """Outcome of a tangential-weak-defectivity witness search."""

    base_specs: tuple
    witness_spec: SubspaceVarietySpec
    containment_found: bool
    witness_point: VarietyPoint | None
    trials: int
    strategy: str = "independent"


def _same_ambient(specs):
    ambients = {s.ambient.dims for s in specs}
    if len(ambients) != 1:
        raise ValueError(f"specs live in different ambients: {sorted(ambients)}")


def expected_join_dim(specs) -> int:
    """Affine expected dimension: min(sum of cone dims, ambient size)."""
    specs = tuple(specs)
    _same_ambient(specs)
    total = sum(affine_cone_dimension(s) for s in specs)
    return min(total, specs[0].ambient.size)


def terracini_join_dim(specs, arithmetic="rational", trials=None, seed=0,
                       tol=FLOAT_RANK_TOL) -> JoinReport:
    """Join dimension by summing tangent spaces at sampled generic points.

    The reported defect follows the uncapped convention
    ``sum of cone dims - computed`` (equal to expected - computed whenever
    the expected dimension does not hit the ambient ceiling), so joins that
    overfill the ambient still report their parameter-count defect.
    """
    specs = tuple(specs)
    _same_ambient(specs)
    if arithmetic not in DEFAULT_TRIALS:
        raise ValueError("arithmetic must be 'rational' or 'float'")
    if trials is None:
        trials = DEFAULT_TRIALS[arithmetic]
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sampler = "integer-uniform" if arithmetic == "rational" else "complex-gaussian"
    expected = expected_join_dim(specs)
    total = sum(affine_cone_dimension(s) for s in specs)
    per_trial = []
    for t in range(trials):
        bases = []
        for i, spec in enumerate(specs):
            _, tb = generic_point_with_tangent(
                spec, sampler, seed=_trial_seed(seed, t, i), tol=tol)
            bases.append(tb.basis)
        stacked = np.concatenate(bases, axis=1)
        if arithmetic == "rational":
            rank = exact_rank(stacked)
        else:
            rank = numeric_rank(stacked, tol)
        per_trial.append(rank)
        if rank == expected:
            break  # cannot increase further; certification already maximal
    computed = max(per_trial)
    defect = total - computed
    bounds = many_join_bounds(specs)
    certified = bounds.nondefective_certificate or (
        arithmetic == "rational" and computed == expected and defect == 0)
    if bounds.nondefective_certificate:
        certificate = "mode-dimension containment"
    elif certified:
        certificate = "exact rank met expected dimension"
    elif defect > 0 and bounds.defect_lower_bound > 0:
        certificate = "formula-backed defect lower bound"
    else:
        certificate = ""
    return JoinReport(specs, expected, computed, defect, len(per_trial),
                      arithmetic, certified, certificate, tuple(per_trial))


def _trial_seed(seed, trial, index):
    return int(seed) + 1000003 * (trial + 1) + 97 * index


@dataclass(frozen=True)
class TwoJoinDefect:
    """Closed-form defect prediction for a join of two subspace varieties."""

    value: int
    within_hypothesis: bool
    failed_inequalities: tuple = ()


def defect_two_join_formula(ambient, first, second) -> TwoJoinDefect:
    """Predicted defect (a'+a''-a)+ (b'+b''-b)+ (c'+c''-c)+ for two
    3-mode subspace varieties, with its six hypothesis inequalities.

    Outside the hypotheses the product is still returned, flagged.
    """
    a, b, c = ambient
    ap, bp, cp = first
    app, bpp, cpp = second
    checks = {
        "a' <= (b-b')(c-c')": ap <= (b - bp) * (c - cp),
        "b' <= (a-a')(c-c')": bp <= (a - ap) * (c - cp),
        "c' <= (a-a')(b-b')": cp <= (a - ap) * (b - bp),
        "a'' <= (b-b'')(c-c'')": app <= (b - bpp) * (c - cpp),
        "b'' <= (a-a'')(c-c'')": bpp <= (a - app) * (c - cpp),
        "c'' <= (a-a'')(b-b'')": cpp <= (a - app) * (b - bpp),
    }
    failed = tuple(name for name, ok in checks.items() if not ok)
    pos = lambda x: x if x > 0 else 0
    value = pos(ap + app - a) * pos(bp + bpp - b) * pos(cp + cpp - c)
    return TwoJoinDefect(value, not failed, failed)


@dataclass(frozen=True)
class ManyJoinBounds:
    nondefective_certificate: bool
    defect_lower_bound: int


def many_join_bounds(specs) -> ManyJoinBounds:
    """Containment certificate and parameter-count defect lower bound.

    Certificate: every mode dimension dominates the sum of that mode's
    ranks, so the join splits and is non-defective.  Lower bound:
    max(0, sum of core sizes - ambient size).
    """
    specs = tuple(specs)
    _same_ambient(specs)
    dims = specs[0].ambient.dims
    cert = all(dims[i] >= sum(s.mode_ranks[i] for s in specs)
               for i in range(len(dims)))
    bound = max(0, sum(prod(s.mode_ranks) for s in specs) - prod(dims))
    return ManyJoinBounds(cert, bound)


def tangent_containment_probe(base_points, witness: VarietyPoint,
                              tol=FLOAT_RANK_TOL) -> bool:
    """True iff the witness tangent space lies in the span of the base
    tangent spaces (concatenation does not increase rank)."""
    base_points = list(base_points)
    _same_ambient([p.spec for p in base_points] + [witness.spec])
    exact = witness.is_exact and all(p.is_exact for p in base_points)
    bases = [tangent_basis(p, tol).basis for p in base_points]
    wit = tangent_generators(witness)
    if exact:
        stacked = to_integer_columns(np.concatenate(bases, axis=1))
        base_rank = exact_rank(stacked)
        joint = np.concatenate([stacked, to_integer_columns(wit)], axis=1)
        return exact_rank(joint) == base_rank
    stacked = np.concatenate(bases, axis=1).astype(complex)
    base_rank = numeric_rank(stacked, tol)
    joint = np.concatenate([stacked, wit.astype(complex)], axis=1)
    return numeric_rank(joint, tol) == base_rank


def _fiber_perturbation(base_points, rng, bound=4):
    """Witness on the first base variety obtained by shifting along the
    intersection of the frame-product cores.

    When the cores of two summands overlap, the pair can trade a shared
    tensor back and forth, producing alternative decompositions whose
    summands are containment witnesses; an empty intersection yields None.
    """
    if len(base_points) < 2 or not all(p.is_exact for p in base_points):
        return None
    p0 = base_points[0]
    cores = []
    for p in base_points[:2]:
        K = None
        for E in p.frames:
            K = E if K is None else np.kron(K, E)
        cores.append(np.asarray(K, dtype=object))
    inter = intersect_column_spans(cores[0], cores[1])
    if inter.shape[1] == 0:
        return None
    coeffs = [int(rng.integers(-bound, bound + 1)) for _ in range(inter.shape[1])]
    if all(c == 0 for c in coeffs):
        coeffs[0] = 1
    shift = inter @ np.array(coeffs, dtype=object)
    t = int(rng.integers(1, bound + 1))
    data = p0.tensor.data + t * shift.reshape(p0.spec.ambient.dims)
    cand = VarietyPoint(p0.spec, DenseTensor(data), p0.frames)
    if multilinear_rank(cand.tensor).ranks != tuple(p0.spec.mode_ranks):
        return None
    return cand


def twd_search(base_points, witness_spec=None, trials=50, seed=0,
               strategy="independent", tol=FLOAT_RANK_TOL) -> TwdReport:
    """Search for a containment witness outside the base points.

    ``independent`` draws fresh generic points of ``witness_spec`` (a
    falsification probe for 'not tangentially weakly defective');
    ``mixed`` also tries fiber perturbations, which find witnesses when the
    join is defective through overlapping cores.
    """
    base_points = list(base_points)
    if witness_spec is None:
        witness_spec = base_points[0].spec
    sampler = ("integer-uniform" if all(p.is_exact for p in base_points)
               else "complex-gaussian")
    rng = rng_for(seed, 29)
    for trial in range(trials):
        cand = None
        if strategy == "mixed" and trial % 2 == 0:
            cand = _fiber_perturbation(base_points, rng)
        if cand is None:
            cand = sample_point(witness_spec, sampler,
                                seed=_trial_seed(seed, trial, 777))
        if any(_same_point(cand, p, tol) for p in base_points):
            continue
        if tangent_containment_probe(base_points, cand, tol):
            return TwdReport(tuple(p.spec for p in base_points), witness_spec,
                             True, cand, trial + 1, strategy)
    return TwdReport(tuple(p.spec for p in base_points), witness_spec,
                     False, None, trials, strategy)


def _same_point(p: VarietyPoint, q: VarietyPoint, tol) -> bool:
    """Projective equality of the two point tensors (up to scale)."""
    u = p.tensor.to_float().data.reshape(-1)
    v = q.tensor.to_float().data.reshape(-1)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return nu == nv
    inner = abs(np.vdot(u, v))
    return bool(abs(inner - nu * nv) <= tol * nu * nv)
