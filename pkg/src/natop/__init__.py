"""Exact verification of natural vector-field operators of a linear
connection with torsion: group-algebra symbol kernels, jet-level identity
checking, and the decorated graph model of the operator space."""

from .perm_algebra import (
    ENaughtElement,
    GeneratorFamily,
    GroupAlgebraElement,
    Permutation,
    canonical_family,
    check_relation_eq3,
    check_symmetry_tags,
    classical_family,
    custom_family,
    generates_kernel,
    kernel_basis,
    kernel_dimension,
    l_symbol,
    psi_symbol,
    quasi_symmetry_check,
    r_symbol,
    submodule_rank,
    t_symbol,
    theta,
)
from .jets import JetContext, JetPoly, TruncationError
from .terms import (
    Bracket,
    Combo,
    Compose,
    CovD,
    Curv,
    Generic,
    Nabla,
    OrderZeroViolation,
    Permute,
    Product,
    Slot,
    Tor,
    Trace,
    check_zero,
    combo,
    compose,
    context_for,
    eval_components,
    free_slots,
    leading_symbol,
    orders,
    permute,
    trace,
)
from .identities import (
    bianchi1_residual,
    bianchi2_residual,
    build_classical,
    build_ideal,
    deviation,
    identity_registry,
    phi_terms,
    psi_term,
    ricci_residual,
    verify_ideal_suite,
    verify_ricci,
    verify_split,
)
from .multilinear import (
    MultilinearMap,
    in_FL,
    in_FRT,
    phi_map,
    psi_map,
    random_FL,
    random_FRT,
)
from .graph_space import (
    check_theoremB_bound,
    contraction_schemes,
    dim_H0_via_delta_h,
    enumerate_decorated,
    independence_rank,
    to_tensor_term,
    vforder,
)
from .dsl import DslError, parse, print_term

__version__ = "0.1.0"
