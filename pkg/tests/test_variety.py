import numpy as np
import pytest

from btd_identify import (
    LinearSubspace,
    SubspaceVarietySpec,
    VarietyPoint,
    affine_cone_dimension,
    conormal_basis,
    is_tangent_hyperplane,
    sample_point,
    tangent_basis,
)
from btd_identify.linalg import exact_in_span, exact_rank
from btd_identify.suite import (
    rank_two_slice_pair_2x4x4,
    tangent_hyperplane_pair_2x4x4,
)
from btd_identify.tensor_core import DenseTensor, multilinear_rank
from btd_identify.variety import generic_point_with_tangent, tangent_generators
from oracles import fraction_rank


def test_affine_cone_dimension_values():
    assert affine_cone_dimension(SubspaceVarietySpec((2, 4, 4), (1, 2, 2))) == 13
    assert affine_cone_dimension(SubspaceVarietySpec((3, 5, 11), (2, 3, 6))) == 74
    full = SubspaceVarietySpec((3, 4, 5), (3, 4, 5))
    assert affine_cone_dimension(full) == 60


def test_affine_cone_dimension_refuses_unbalanced():
    spec = SubspaceVarietySpec((2, 2, 8), (2, 2, 8))
    assert spec.unbalanced
    with pytest.raises(ValueError, match="unbalanced"):
        affine_cone_dimension(spec)
    with pytest.raises(ValueError, match="unbalanced"):
        sample_point(spec, seed=0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SubspaceVarietySpec((2, 4, 4), (1, 2))
    with pytest.raises(ValueError):
        SubspaceVarietySpec((2, 4, 4), (3, 2, 2))
    with pytest.raises(ValueError):
        SubspaceVarietySpec((2, 4, 4), (0, 2, 2))


def test_sample_point_structure_and_determinism():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=5)
    q = sample_point(spec, seed=5)
    assert all(x == y for x, y in zip(p.tensor.data.reshape(-1),
                                      q.tensor.data.reshape(-1)))
    assert p.verify()
    assert multilinear_rank(p.tensor).ranks == (1, 2, 2)
    flat = [abs(v) for E in p.frames for v in np.asarray(E).reshape(-1)]
    assert max(flat) <= 9
    r = sample_point(spec, seed=6)
    assert any(x != y for x, y in zip(p.tensor.data.reshape(-1),
                                      r.tensor.data.reshape(-1)))


def test_sample_point_full_spec():
    spec = SubspaceVarietySpec((2, 3, 4), (2, 3, 4))
    p = sample_point(spec, seed=1)
    assert multilinear_rank(p.tensor).ranks == (2, 3, 4)
    assert tangent_basis(p).dim == 24  # whole ambient


def test_tangent_dimension_examples():
    p, t = generic_point_with_tangent(
        SubspaceVarietySpec((3, 5, 11), (2, 3, 6)), seed=0)
    assert t.dim == 74
    p2, t2 = generic_point_with_tangent(
        SubspaceVarietySpec((2, 4, 4), (1, 2, 2)), seed=0)
    assert t2.dim == 13
    p3, t3 = generic_point_with_tangent(
        SubspaceVarietySpec((2, 2, 2), (1, 1, 1)), seed=0)
    assert t3.dim == 4  # cone over the rank-one variety


def test_tangent_rank_over_twenty_seeds_exact():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    want = affine_cone_dimension(spec)
    dims = []
    for seed in range(20):
        p = sample_point(spec, seed=seed)
        dims.append(tangent_basis(p).dim)
    assert all(d <= want for d in dims)
    assert any(d == want for d in dims)


def test_tangent_contains_the_point_itself():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=9)
    t = tangent_basis(p)
    assert exact_in_span(t.basis, p.tensor.data.reshape(-1))


def test_tangent_monotone_under_rank_increase():
    small = SubspaceVarietySpec((3, 4, 4), (1, 2, 2))
    big = SubspaceVarietySpec((3, 4, 4), (2, 3, 3))
    p = sample_point(small, seed=4)
    rng = np.random.default_rng(11)
    frames_big = []
    for E, a, k in zip(p.frames, big.ambient.dims, big.mode_ranks):
        while True:
            extra = np.empty((a, k - E.shape[1]), dtype=object)
            for i in range(a):
                for j in range(k - E.shape[1]):
                    extra[i, j] = int(rng.integers(-9, 10))
            F = np.concatenate([E, extra], axis=1)
            if exact_rank(F) == k:
                frames_big.append(F)
                break
    saturated = VarietyPoint(big, p.tensor, tuple(frames_big))
    t_small = tangent_basis(p)
    gens_big = tangent_generators(saturated)
    joint = np.concatenate([gens_big, t_small.basis], axis=1)
    assert exact_rank(joint) == exact_rank(gens_big)


def test_conormal_dimensions_add_up():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=2)
    t = tangent_basis(p)
    c = conormal_basis(t)
    assert t.dim == 13 and c.dim == 19
    assert t.dim + c.dim == 32
    vals = c.basis.T @ t.basis
    assert all(v == 0 for v in vals.reshape(-1))


def test_conormal_of_full_ambient_is_zero():
    spec = SubspaceVarietySpec((2, 2, 2), (2, 2, 2))
    p = sample_point(spec, seed=0)
    c = conormal_basis(tangent_basis(p))
    assert c.dim == 0


def test_conormal_float_mode():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, sampler="complex-gaussian", seed=2)
    t = tangent_basis(p)
    c = conormal_basis(t)
    assert t.dim + c.dim == 32
    assert np.abs(c.basis.conj().T @ t.basis).max() < 1e-10


def test_conormal_contains_slice_covector():
    """The conormal at the first diagonal-slice point contains the covector
    pairing the second mode-1 slot with the off-diagonal matrix unit."""
    p1, _ = rank_two_slice_pair_2x4x4()
    h = np.zeros((2, 4, 4), dtype=object)
    flat = np.empty((2, 4, 4), dtype=object)
    flat[...] = 0
    flat[1, 0, 1] = 1  # pairs a_2 with b_1 c_2
    assert is_tangent_hyperplane(flat.reshape(-1), p1)
    t = tangent_basis(p1)
    c = conormal_basis(t)
    assert exact_in_span(c.basis, flat.reshape(-1))


def test_is_tangent_hyperplane_paper_style_fixture():
    h, psi = tangent_hyperplane_pair_2x4x4((2, 3, 1), (1, 1, 4))
    assert is_tangent_hyperplane(h, psi)
    p1, p2 = rank_two_slice_pair_2x4x4()
    assert is_tangent_hyperplane(h, p1)
    assert is_tangent_hyperplane(h, p2)


def test_is_tangent_hyperplane_rejects_full_tangent():
    spec = SubspaceVarietySpec((2, 2, 2), (2, 2, 2))
    p = sample_point(spec, seed=1)
    h = np.zeros(8, dtype=object)
    for i in range(8):
        h[i] = 0
    h[3] = 1
    assert not is_tangent_hyperplane(h, p)


def test_is_tangent_hyperplane_from_conormal():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=3)
    c = conormal_basis(tangent_basis(p))
    assert is_tangent_hyperplane(c.basis[:, 0], p)


def test_is_tangent_hyperplane_zero_covector_rejected():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=3)
    with pytest.raises(ValueError):
        is_tangent_hyperplane(np.zeros(32, dtype=object), p)


def test_linear_subspace_from_generators_drops_dependent():
    gens = np.array([[1, 2, 3], [0, 0, 0], [1, 2, 3]], dtype=object).T
    # columns: (1,0,1), (2,0,2), (3,0,3) -> rank 1
    sub = LinearSubspace.from_generators(gens.T, "rational")
    assert sub.dim == 1


def test_variety_point_verify_catches_mismatch():
    spec = SubspaceVarietySpec((2, 4, 4), (1, 2, 2))
    p = sample_point(spec, seed=8)
    other = sample_point(spec, seed=9)
    fake = VarietyPoint(spec, other.tensor, p.frames)
    object.__setattr__(fake, "_core", None)
    assert not fake.verify()
