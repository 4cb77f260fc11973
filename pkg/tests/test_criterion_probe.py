import numpy as np
import pytest

from btd_identify import (
    BlockTermSpec,
    GroundTruth,
    delathauwer_check,
    evaluate_theorem,
    pencil_low_rank_members,
    span_low_rank_search,
    synth_block_term,
)
from btd_identify.criterion_probe import (
    CriterionHypothesisError,
    DegeneratePencilError,
)
from btd_identify.tensor_core import rng_for
from oracles import fraction_rank, random_int_matrix


def unit_sum(pairs, shape=(4, 4)):
    M = np.empty(shape, dtype=object)
    M[...] = 0
    for i, j in pairs:
        M[i, j] = 1
    return M


def test_pencil_disjoint_support():
    X1 = unit_sum([(0, 0), (1, 1)])
    X2 = unit_sum([(2, 2), (3, 3)])
    scan = pencil_low_rank_members(X1, X2, 2)
    assert {m.coeffs for m in scan} == {(1, 0), (0, 1)}
    assert all(m.rank == 2 and m.exact for m in scan)
    assert not scan.entire_pencil


def test_pencil_overlapping_support():
    X1 = unit_sum([(0, 0), (1, 1)])
    X2 = unit_sum([(1, 1), (2, 2)])
    scan = pencil_low_rank_members(X1, X2, 2)
    assert {m.coeffs for m in scan} == {(1, 0), (0, 1), (1, -1)}
    member = next(m for m in scan if m.coeffs == (1, -1))
    assert member.rank == 2
    diff = X1 - X2
    assert fraction_rank(diff) == 2  # independent recheck of the witness


def test_pencil_degenerate():
    X1 = unit_sum([(0, 0), (1, 1)])
    with pytest.raises(DegeneratePencilError):
        pencil_low_rank_members(X1, 3 * X1, 2)


def test_pencil_entire_when_rank_bound_vacuous():
    X1 = unit_sum([(0, 0)], shape=(2, 5))
    X2 = unit_sum([(1, 1)], shape=(2, 5))
    scan = pencil_low_rank_members(X1, X2, 2)
    assert scan.entire_pencil


def test_pencil_entire_for_shared_column_space():
    # both matrices live in the same 2-dim column space, so every member
    # has rank <= 2 although no (L+1)-minor constraint survives
    rng = rng_for(5, 1)
    B = random_int_matrix(rng, 4, 2)
    X1 = B @ random_int_matrix(rng, 2, 4)
    X2 = B @ random_int_matrix(rng, 2, 4)
    while fraction_rank(np.concatenate([X1.reshape(-1, 1), X2.reshape(-1, 1)],
                                       axis=1)) < 2:
        X2 = B @ random_int_matrix(rng, 2, 4)
    scan = pencil_low_rank_members(X1, X2, 2)
    assert scan.entire_pencil


def test_pencil_members_verified_exactly():
    rng = rng_for(17, 3)
    for trial in range(5):
        B1 = random_int_matrix(rng, 4, 2)
        C1 = random_int_matrix(rng, 4, 2)
        B2 = random_int_matrix(rng, 4, 2)
        C2 = random_int_matrix(rng, 4, 2)
        X1, X2 = B1 @ C1.T, B2 @ C2.T
        if fraction_rank(X1) < 2 or fraction_rank(X2) < 2:
            continue
        scan = pencil_low_rank_members(X1, X2, 2)
        for m in scan:
            if not m.exact:
                continue
            lam, mu = m.coeffs
            assert fraction_rank(lam * X1 + mu * X2) == m.rank <= 2


def test_pencil_root_set_transforms_under_basis_change():
    """Replacing the pencil basis by an invertible combination maps the
    member set by the inverse coefficient transform."""
    rng = rng_for(23, 1)
    X1 = unit_sum([(0, 0), (1, 1)])
    X2 = unit_sum([(1, 1), (2, 2)])
    for a, b, c, d in [(1, 1, 0, 1), (2, 1, 1, 1), (1, -1, 2, 1)]:
        if a * d - b * c == 0:
            continue
        Y1 = a * X1 + b * X2
        Y2 = c * X1 + d * X2
        scan = pencil_low_rank_members(Y1, Y2, 2)
        # a member (s, t) of the new pencil is the matrix (sa+tc) X1 + (sb+td) X2
        mapped = set()
        for m in scan:
            s, t = m.coeffs
            lam, mu = s * a + t * c, s * b + t * d
            from math import gcd
            g = gcd(abs(lam), abs(mu))
            lam, mu = lam // g, mu // g
            if lam < 0 or (lam == 0 and mu < 0):
                lam, mu = -lam, -mu
            mapped.add((lam, mu))
        assert mapped == {(1, 0), (0, 1), (1, -1)}


def test_span_search_finds_constructed_member():
    X1 = unit_sum([(0, 0), (1, 1)])
    X2 = unit_sum([(0, 0)]) - unit_sum([(1, 1)])  # X1 + X2 = 2 E00, rank 1
    rng = rng_for(31, 2)
    X3 = random_int_matrix(rng, 4, 2) @ random_int_matrix(rng, 2, 4)
    members, vacuous = span_low_rank_search(
        [X1.astype(complex), X2.astype(complex), X3.astype(complex)], 2,
        multistarts=40, seed=0)
    assert not vacuous
    assert members  # the pencil through X1, X2 is entirely rank <= 2


def test_span_search_vacuous_when_rank_bound_trivial():
    rng = rng_for(37, 1)
    Xs = [np.asarray(random_int_matrix(rng, 3, 5), dtype=complex)
          for _ in range(3)]
    members, vacuous = span_low_rank_search(Xs, 3, multistarts=5, seed=0)
    assert vacuous and members == []


def test_span_search_generic_triple_empty():
    rng = rng_for(41, 1)
    Xs = []
    while len(Xs) < 3:
        X = random_int_matrix(rng, 6, 2) @ random_int_matrix(rng, 2, 6)
        if fraction_rank(X) == 2:
            Xs.append(np.asarray(X, dtype=complex))
    members, vacuous = span_low_rank_search(Xs, 2, multistarts=50, seed=0)
    assert not vacuous
    assert members == []


def test_delathauwer_single_block_vacuous():
    spec = BlockTermSpec(2, 3, 3, (2,))
    _, gt = synth_block_term(spec, seed=0, sampler="integer-uniform")
    rep = delathauwer_check(gt)
    assert rep.holds and rep.definitive


def test_delathauwer_disjoint_blocks_hold():
    spec = BlockTermSpec(2, 4, 4, (2, 2))
    a1 = np.array([1, 0], dtype=object)
    a2 = np.array([0, 1], dtype=object)
    B1 = unit_sum([(0, 0), (1, 1)], (4, 2))
    C1 = unit_sum([(0, 0), (1, 1)], (4, 2))
    B2 = unit_sum([(2, 0), (3, 1)], (4, 2))
    C2 = unit_sum([(2, 0), (3, 1)], (4, 2))
    gt = GroundTruth(spec, ((a1, B1, C1), (a2, B2, C2)))
    rep = delathauwer_check(gt)
    assert rep.holds
    assert rep.definitive
    assert rep.subset_methods[0][2] == "exact-pencil"


def test_delathauwer_detects_overlap_violation():
    spec = BlockTermSpec(2, 4, 4, (2, 2))
    a1 = np.array([1, 0], dtype=object)
    a2 = np.array([0, 1], dtype=object)
    B1 = unit_sum([(0, 0), (1, 1)], (4, 2))
    C1 = unit_sum([(0, 0), (1, 1)], (4, 2))
    B2 = unit_sum([(1, 0), (2, 1)], (4, 2))
    C2 = unit_sum([(1, 0), (2, 1)], (4, 2))
    gt = GroundTruth(spec, ((a1, B1, C1), (a2, B2, C2)))
    rep = delathauwer_check(gt)
    assert not rep.holds
    assert rep.violating_subset == (0, 1)
    coeffs, rank = rep.violating_member
    assert coeffs == (1, -1)
    assert rank == 2


def test_delathauwer_hypothesis_violations():
    spec = BlockTermSpec(2, 4, 4, (1, 1, 2))
    _, gt = synth_block_term(spec, seed=0, sampler="integer-uniform")
    with pytest.raises(CriterionHypothesisError):
        delathauwer_check(gt)  # I = 2 < R = 3
    spec2 = BlockTermSpec(2, 4, 4, (2, 2))
    _, gt2 = synth_block_term(spec2, seed=0, sampler="integer-uniform")
    a, B, C = gt2.blocks[0]
    dependent = GroundTruth(spec2, ((a, B, C), (2 * a, *gt2.blocks[1][1:])))
    with pytest.raises(CriterionHypothesisError):
        delathauwer_check(dependent)


def test_delathauwer_agrees_with_two_block_verdict():
    """Random essentially-unique two-block sizes: the span check must hold
    (a faster slice of the full hundred-spec acceptance run)."""
    rng = rng_for(2027, 5)
    done = 0
    while done < 20:
        J = int(rng.integers(3, 7))
        K = int(rng.integers(J, 7))
        L = int(rng.integers(1, J))
        spec = BlockTermSpec(2, J, K, (L, L))
        v = evaluate_theorem(spec)
        if v.verdict != "EssentiallyUnique" or "D" not in v.fired:
            continue
        _, gt = synth_block_term(spec, seed=500 + done, sampler="integer-uniform")
        rep = delathauwer_check(gt)
        assert rep.holds, f"spec {spec} seed {500 + done}"
        done += 1
