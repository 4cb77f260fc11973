import itertools

import pytest
from hypothesis import given, settings, strategies as st

from btd_identify import (
    BlockTermSpec,
    SubspaceVarietySpec,
    ambient_fill_check,
    evaluate_theorem,
    terracini_join_dim,
)
from btd_identify.conditions import condition_table


def test_ambient_fill_examples():
    f = ambient_fill_check(BlockTermSpec(2, 4, 4, (2, 2)))
    assert (f.total, f.ambient, f.sign) == (26, 32, "<")
    assert f.terms == (13, 13)
    f = ambient_fill_check(BlockTermSpec(2, 3, 3, (2, 2)))
    assert (f.total, f.ambient, f.sign) == (18, 18, "=")
    f = ambient_fill_check(BlockTermSpec(2, 4, 6, (2, 2, 2)))
    assert (f.total, f.ambient, f.sign) == (51, 48, ">")


def test_verdict_table():
    v = evaluate_theorem(BlockTermSpec(2, 4, 4, (2, 2)))
    assert v.verdict == "EssentiallyUnique"
    assert {"C", "D"} <= set(v.fired)
    v = evaluate_theorem(BlockTermSpec(4, 4, 8, (2, 2, 2, 2)))
    assert v.verdict == "EssentiallyUnique"
    assert "E" in v.fired
    assert not {"C", "D"} & set(v.fired)
    v = evaluate_theorem(BlockTermSpec(2, 5, 6, (2, 2, 2)))
    assert v.verdict == "PartiallyUnique"
    assert "A" in v.fired
    assert not {"C", "D", "E"} & set(v.fired)
    v = evaluate_theorem(BlockTermSpec(2, 4, 6, (2, 2, 2)))
    assert v.verdict == "InfinitelyMany"
    assert "AmbientOverfull" in v.fired


def test_equality_fill_gives_unknown_with_note():
    v = evaluate_theorem(BlockTermSpec(2, 3, 3, (2, 2)))
    assert v.verdict == "Unknown"
    assert not v.hypothesis_ok
    assert any("equals the ambient" in n for n in v.notes)


def test_shape_hypothesis_failure_gives_unknown_with_note():
    v = evaluate_theorem(BlockTermSpec(2, 4, 3, (2, 2)))  # K < J
    assert v.verdict == "Unknown"
    assert not v.hypothesis_ok
    assert any("shape hypothesis" in n for n in v.notes)
    assert "D" in v.fired  # conditions still evaluated and reported


def _all_specs(max_dim=8, max_r=4):
    for I, J, K in itertools.product(range(1, max_dim + 1), repeat=3):
        if not K >= J or J < 2:
            continue
        for R in range(1, max_r + 1):
            for L in itertools.combinations_with_replacement(
                    range(1, J), R):  # J > L_R enforced by range
                yield BlockTermSpec(I, J, K, L)


def test_b_implies_overfull_exhaustively():
    """With K >= J > L_R every per-block count strictly exceeds L_r^2, so
    condition B can only hold when the counts already overfill the ambient."""
    seen_b = 0
    for spec in _all_specs():
        fill = ambient_fill_check(spec)
        table = condition_table(spec)
        for L, term in zip(spec.L, fill.terms):
            assert term > L * L
        if table["B"]:
            seen_b += 1
            assert fill.sign == ">"
            v = evaluate_theorem(spec)
            assert v.verdict == "InfinitelyMany"
            assert any("condition B" in n for n in v.notes)
    assert seen_b > 0  # B does occur, always alongside overfill


def test_d_requires_two_blocks():
    for spec in [BlockTermSpec(2, 4, 4, (2, 2)), BlockTermSpec(3, 4, 5, (1, 2)),
                 BlockTermSpec(2, 5, 6, (2, 2, 2)), BlockTermSpec(2, 3, 3, (2,))]:
        if condition_table(spec)["D"]:
            assert spec.R == 2


def test_c_forces_essential_uniqueness_regardless_of_a():
    spec = BlockTermSpec(2, 6, 6, (2, 3))
    table = condition_table(spec)
    assert table["C"]
    v = evaluate_theorem(spec)
    assert v.verdict == "EssentiallyUnique"


spec_strategy = st.tuples(
    st.integers(1, 6), st.integers(2, 6), st.integers(2, 6),
    st.integers(1, 3), st.integers(1, 3)).map(
    lambda t: (t[0], max(t[1], t[2]), max(t[1], t[2]),
               tuple(sorted((min(t[3], max(t[1], t[2]) - 1),
                             min(t[4], max(t[1], t[2]) - 1))))))


@given(spec_strategy)
@settings(max_examples=100, deadline=None)
def test_verdict_deterministic_and_total(params):
    I, J, K, L = params
    spec = BlockTermSpec(I, J, K, L)
    v1 = evaluate_theorem(spec)
    v2 = evaluate_theorem(spec)
    assert v1 == v2
    assert v1.verdict in ("EssentiallyUnique", "PartiallyUnique",
                          "InfinitelyMany", "Unknown")


CROSS_VALIDATION_SPECS = [
    BlockTermSpec(2, 4, 4, (2, 2)),        # EssentiallyUnique, ambient 32
    BlockTermSpec(2, 5, 5, (2, 2)),        # EssentiallyUnique, ambient 50
    BlockTermSpec(2, 5, 6, (2, 2, 2)),     # PartiallyUnique, ambient 60
    BlockTermSpec(3, 4, 4, (1, 2)),        # EssentiallyUnique, ambient 48
    BlockTermSpec(2, 6, 6, (2, 2)),        # EssentiallyUnique, ambient 72
    BlockTermSpec(2, 4, 6, (1, 1, 2)),     # ambient 48
    BlockTermSpec(2, 3, 4, (1, 2)),        # ambient 24
    BlockTermSpec(4, 4, 8, (2, 2, 2, 2)),  # EssentiallyUnique via E, ambient 128
    BlockTermSpec(2, 6, 7, (2, 2, 2)),     # ambient 84
    BlockTermSpec(3, 5, 5, (2, 2)),        # ambient 75
    BlockTermSpec(2, 4, 5, (2, 2)),        # ambient 40
    BlockTermSpec(2, 3, 3, (1, 1)),        # ambient 18
]


@pytest.mark.parametrize("spec", CROSS_VALIDATION_SPECS,
                         ids=lambda s: f"{s.I}x{s.J}x{s.K}-{'_'.join(map(str, s.L))}")
def test_finite_verdicts_imply_nondefective_joins(spec):
    """A finite-decompositions verdict requires the join of the block
    varieties to be non-defective; check by exact Terracini count."""
    v = evaluate_theorem(spec)
    if v.verdict not in ("EssentiallyUnique", "PartiallyUnique"):
        pytest.skip(f"verdict {v.verdict}")
    assert spec.I * spec.J * spec.K <= 200
    varieties = [SubspaceVarietySpec((spec.I, spec.J, spec.K), (1, L, L))
                 for L in spec.L]
    rep = terracini_join_dim(varieties, "rational", trials=1, seed=1)
    assert rep.defect == 0
    assert rep.certified
