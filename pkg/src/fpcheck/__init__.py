"""Fuzzy process algebra, refinement checks and law harness."""

from .algebra import (
    AlgebraError,
    ExecutionUniverse,
    FuzzyProcess,
    MembershipRangeError,
    NonTotalWarning,
    Shadow,
    UniverseMismatchError,
    UnknownLabelError,
    factor,
    fuzzy_refines,
    is_chaotic,
    is_chaotic_support,
    is_robust,
    is_robust_support,
    is_total,
    join,
    make_process,
    meet,
    omega,
    product,
    reflect,
    shadow,
    sum,
    support_refines,
    supports,
)

__version__ = "0.1.0"
