"""Identifiability toolkit for rank-(1, L_r, L_r) block term decompositions.

Decides uniqueness of block-term tensor decompositions three ways and
cross-checks them: exact arithmetic conditions on the sizes, Terracini
dimension counts for joins of subspace varieties at random rational points,
and an alternating-least-squares multistart probe on synthetic instances.
"""

__version__ = "0.1.0"

from .tensor_core import (  # noqa: F401
    BlockTermSpec,
    DenseTensor,
    GroundTruth,
    ModeRanks,
    Shape,
    flatten,
    mode_multiply,
    multilinear_rank,
    synth_block_term,
)
from .variety import (  # noqa: F401
    LinearSubspace,
    SubspaceVarietySpec,
    VarietyPoint,
    affine_cone_dimension,
    conormal_basis,
    is_tangent_hyperplane,
    sample_point,
    tangent_basis,
)
from .join_analysis import (  # noqa: F401
    JoinReport,
    TwdReport,
    defect_two_join_formula,
    expected_join_dim,
    many_join_bounds,
    tangent_containment_probe,
    terracini_join_dim,
    twd_search,
)
from .conditions import (  # noqa: F401
    AmbientFill,
    ConditionVerdict,
    ambient_fill_check,
    evaluate_theorem,
)
from .criterion_probe import (  # noqa: F401
    CriterionReport,
    PencilMember,
    PencilScan,
    delathauwer_check,
    pencil_low_rank_members,
    span_low_rank_search,
)
from .btd_als import (  # noqa: F401
    BTDSolution,
    CanonicalSolution,
    UniquenessReport,
    als_fit,
    canonicalize,
    solutions_equivalent,
    uniqueness_probe,
)
