"""Schreier families, combinatorial p-convexified norms, extreme points,
Cantor-Bendixson ranks, isometry rigidity checks and Orlicz base norms."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    IncompatiblePermutationError,
    NumericError,
    SchreierKitError,
    WindowExceededError,
)
from .family import (
    CardinalityFamily,
    CounterFamily,
    ExplicitFamily,
    Family,
    FiniteSet,
    PredicateFamily,
    SpreadMap,
    hereditary_closure,
    is_spreading,
)
from .schreier import (
    Ordinal,
    SchreierFamily,
    brute_decompose,
    check_head_split,
    check_maximal_block_split,
    greedy_decompose,
    maximal_block_decomposition,
    schreier_family,
    schreier_member,
)
from .topology import (
    CNF,
    ClosedSetSystem,
    check_head_split_in_derivative,
    derivative,
    exact_rank,
    rank,
    rank_table,
    verify_f3,
    verify_singleton_rank_gap,
    verify_rank_monotone,
)
from .norms import NormParams, SparseVector, dual_norm, norm, project, strict_norm_gap
from .extreme import dual_extreme, perturbation_oracle, primal_extreme
from .isometry import (
    SignedPermutation,
    build_signed_permutation,
    check_isometry,
    min_of_maximal,
    permutation_compatibility,
    rigidity_suite,
    rotation_matrix,
    schreier_witness,
    search_isometry,
    star_condition,
)
from .orlicz import (
    LuxemburgBase,
    OrliczBase,
    OrliczFunction,
    conjugate,
    growth_diagnostics,
    is_l2_span,
    luxemburg_norm,
    orlicz_norm,
)
