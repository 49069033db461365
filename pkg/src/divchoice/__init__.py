"""Controlled school choice under assignment-dependent weak-order priorities."""

from .choice import ChoiceFunction, TableChoice, canonical_order, choice_functions, choose
from .core import (
    AuditReport,
    AxiomViolation,
    ContractError,
    Instance,
    InstanceError,
    Matching,
    PreferenceProfile,
    School,
    pareto_dominates,
    validate_matching,
)
from .mechanism import phi_bar, spda
from .priority import (
    AdjustedScoringRule,
    Rank,
    TablePriorityRule,
    check_axioms,
    lowest_priority_within,
    preset_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedScoringRule",
    "AuditReport",
    "AxiomViolation",
    "ChoiceFunction",
    "ContractError",
    "Instance",
    "InstanceError",
    "Matching",
    "PreferenceProfile",
    "Rank",
    "School",
    "TableChoice",
    "TablePriorityRule",
    "canonical_order",
    "check_axioms",
    "choice_functions",
    "choose",
    "lowest_priority_within",
    "pareto_dominates",
    "phi_bar",
    "preset_alpha",
    "spda",
    "validate_matching",
]
