from .equivalence import (
    equivalence_reserves_quotas,
    equivalence_soft_bounds,
    fair_under_soft_bounds,
    quotas_choice,
    reserves_choice,
)
from .slots import (
    ObjectiveSpec,
    SlotPriorities,
    SlotScenario,
    default_slot_scenario,
    audit_slot_impossibility,
    optimal_choice_oracle,
    slot_specific_choose,
)
from .stability import (
    StabilityVerdict,
    c_stability_witnesses,
    enumerate_stable,
    is_c_stable,
    is_stable,
    iter_matchings,
    stability_verdict,
    student_optimal_stable,
)
from .strategy import audit_strategy_proofness, phi_bar_mechanism, reports

__all__ = [
    "ObjectiveSpec",
    "SlotPriorities",
    "SlotScenario",
    "StabilityVerdict",
    "default_slot_scenario",
    "audit_slot_impossibility",
    "audit_strategy_proofness",
    "c_stability_witnesses",
    "enumerate_stable",
    "equivalence_reserves_quotas",
    "equivalence_soft_bounds",
    "fair_under_soft_bounds",
    "is_c_stable",
    "is_stable",
    "iter_matchings",
    "optimal_choice_oracle",
    "phi_bar_mechanism",
    "quotas_choice",
    "reserves_choice",
    "slot_specific_choose",
    "stability_verdict",
    "student_optimal_stable",
]
