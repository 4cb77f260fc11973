import numpy as np
import pytest

from btd_identify import (
    SubspaceVarietySpec,
    defect_two_join_formula,
    expected_join_dim,
    many_join_bounds,
    tangent_containment_probe,
    terracini_join_dim,
    twd_search,
)
from btd_identify.suite import (
    disjoint_diagonal_pair_4x4x4,
    overlapping_core_pair_3x5x11,
    rank_two_slice_pair_2x4x4,
)
from btd_identify.tensor_core import rng_for


def S(ambient, ks):
    return SubspaceVarietySpec(tuple(ambient), tuple(ks))


def test_expected_join_dim_values():
    assert expected_join_dim([S((3, 5, 11), (2, 3, 6))] * 2) == 148
    assert expected_join_dim([S((2, 4, 4), (1, 2, 2))] * 2) == 26
    single = S((2, 4, 4), (1, 2, 2))
    assert expected_join_dim([single]) == 13


def test_expected_join_dim_rejects_mixed_ambients():
    with pytest.raises(ValueError):
        expected_join_dim([S((2, 4, 4), (1, 2, 2)), S((2, 4, 5), (1, 2, 2))])


def test_join_overlapping_pair_measures_defect_eleven():
    """Every pair of tangent spaces on this shape shares the block
    (intersection of first-two-mode products) x C^11, so the join falls 11
    short of the parameter count; the sampled rank certifies >= 137 and the
    closed-form overlap argument pins the rest."""
    rep = terracini_join_dim([S((3, 5, 11), (2, 3, 6))] * 2, "rational",
                             trials=2, seed=0)
    assert rep.expected_affine_dim == 148
    assert rep.computed_affine_dim == 137
    assert rep.defect == 11
    assert not rep.certified


def test_join_disjoint_pair_certified_nondefective():
    rep = terracini_join_dim([S((4, 4, 4), (2, 2, 2))] * 2, "rational",
                             trials=2, seed=0)
    assert rep.computed_affine_dim == 40 == rep.expected_affine_dim
    assert rep.defect == 0
    assert rep.certified


def test_join_mixed_ranks_certified_by_containment():
    specs = [S((2, 6, 6), (1, 2, 2)), S((2, 6, 6), (1, 3, 3))]
    rep = terracini_join_dim(specs, "rational", trials=1, seed=0)
    assert rep.expected_affine_dim == 49
    assert rep.computed_affine_dim == 49
    assert rep.defect == 0
    assert rep.certified
    assert rep.certificate == "mode-dimension containment"


def test_join_float_mode_matches_rational():
    repf = terracini_join_dim([S((3, 5, 11), (2, 3, 6))] * 2, "float",
                              trials=2, seed=0)
    assert repf.computed_affine_dim == 137
    assert repf.defect == 11
    assert not repf.certified  # float rank is evidence, not a certificate


def test_join_trials_monotone():
    specs = [S((3, 4, 4), (2, 2, 2))] * 2
    computed = [terracini_join_dim(specs, "rational", trials=t, seed=5)
                .computed_affine_dim for t in (1, 2, 3)]
    assert computed[0] <= computed[1] <= computed[2]
    rep = terracini_join_dim(specs, "rational", trials=3, seed=5)
    assert max(rep.per_trial) == rep.computed_affine_dim
    assert rep.computed_affine_dim <= rep.expected_affine_dim


def test_two_join_formula_examples():
    out = defect_two_join_formula((3, 5, 11), (2, 3, 6), (2, 3, 6))
    assert out.value == 1 and not out.within_hypothesis
    out = defect_two_join_formula((4, 4, 4), (2, 2, 2), (2, 2, 2))
    assert out.value == 0 and out.within_hypothesis
    out = defect_two_join_formula((2, 4, 4), (1, 2, 2), (1, 2, 2))
    assert out.value == 0 and out.within_hypothesis


def test_two_join_formula_agreement_on_symmetric_unforced_shapes():
    """Measured defect equals the closed-form value on symmetric pairs with
    no forced mode image (k_i < prod of the other k_j), the regime where the
    formula's genericity argument is airtight; >= 10 shapes, exact."""
    from math import prod

    rng = rng_for(2026, 17)
    checked = 0
    while checked < 10:
        a, b, c = (int(rng.integers(2, 7)) for _ in range(3))
        sub = tuple(int(rng.integers(1, d + 1)) for d in (a, b, c))
        out = defect_two_join_formula((a, b, c), sub, sub)
        if not out.within_hypothesis:
            continue
        if any(k >= prod(sub) // k for k in sub):
            continue
        rep = terracini_join_dim([S((a, b, c), sub)] * 2, "rational",
                                 trials=1, seed=checked)
        assert rep.defect == out.value, (
            f"shape {(a, b, c)} sub {sub}: measured {rep.defect}, "
            f"formula {out.value}")
        checked += 1


def test_two_join_formula_misses_structured_overlaps():
    """Regression for a boundary configuration where the closed form is
    wrong: with subs (1,2,2) and (2,1,2) in C^3x3x3 the tangent blocks
    A'(x)B(x)C' and A(x)B''(x)C'' always share A'(x)B''(x)(C' cap C''), one
    dimension the formula does not see.  The measured defect is the truth."""
    out = defect_two_join_formula((3, 3, 3), (1, 2, 2), (2, 1, 2))
    assert out.within_hypothesis and out.value == 0
    rep = terracini_join_dim(
        [S((3, 3, 3), (1, 2, 2)), S((3, 3, 3), (2, 1, 2))], "rational",
        trials=2, seed=0)
    assert rep.defect == 1


def test_two_join_formula_positive_defect_case():
    out = defect_two_join_formula((5, 5, 5), (3, 3, 3), (3, 3, 3))
    assert out.within_hypothesis and out.value == 1
    rep = terracini_join_dim([S((5, 5, 5), (3, 3, 3))] * 2, "rational",
                             trials=2, seed=1)
    assert rep.defect == 1


def test_many_join_bounds_examples():
    tight = many_join_bounds([S((2, 2, 2), (2, 2, 2))] * 2)
    assert not tight.nondefective_certificate
    assert tight.defect_lower_bound == 8
    roomy = many_join_bounds([S((4, 4, 4), (2, 2, 2))] * 2)
    assert roomy.nondefective_certificate
    assert roomy.defect_lower_bound == 0
    # several rank-(1,L,L) factors overfilling the ambient
    specs = [S((2, 3, 3), (1, 2, 2))] * 3
    bounds = many_join_bounds(specs)
    assert bounds.defect_lower_bound == max(0, 3 * 4 - 18)


def test_ambient_filling_pair_reports_uncapped_defect():
    rep = terracini_join_dim([S((2, 2, 2), (2, 2, 2))] * 2, "rational",
                             trials=1, seed=0)
    assert rep.expected_affine_dim == 8
    assert rep.computed_affine_dim == 8
    assert rep.defect == 8
    assert not rep.certified
    assert rep.certificate == "formula-backed defect lower bound"


def test_containment_probe_crossed_witness():
    p1, p2, w = disjoint_diagonal_pair_4x4x4()
    assert tangent_containment_probe([p1, p2], w)
    assert tangent_containment_probe([p1, p2], p1)


def test_containment_probe_rejects_random_witnesses():
    p1, p2 = rank_two_slice_pair_2x4x4()
    rep = twd_search([p1, p2], trials=10, seed=3, strategy="independent")
    assert not rep.containment_found


def test_defective_join_yields_containment_witness():
    p1, p2 = overlapping_core_pair_3x5x11()
    rep = twd_search([p1, p2], trials=200, seed=1, strategy="mixed")
    assert rep.containment_found
    assert rep.witness_point is not None
    assert rep.witness_point.verify()


def test_twd_report_fields():
    p1, p2 = rank_two_slice_pair_2x4x4()
    rep = twd_search([p1, p2], trials=5, seed=0)
    assert rep.trials == 5
    assert rep.base_specs == (p1.spec, p2.spec)
    assert rep.witness_point is None
