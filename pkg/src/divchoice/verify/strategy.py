"""Exhaustive misreport audits for (group) strategy-proofness."""

from __future__ import annotations

import itertools
from typing import Callable, Iterator, Optional

from ..choice import choice_functions
from ..core import AuditReport, ContractError, Instance, Matching, PreferenceProfile
from ..mechanism import spda

Mechanism = Callable[[PreferenceProfile], Matching]

AUDIT_MAX_SCHOOLS = 3


def reports(n_schools: int) -> Iterator[tuple[int, ...]]:
    """Every strict order over schools and the outside option, cut at the outside option.

    Only the acceptable prefix reaches the mechanism, so each ordered
    selection of distinct schools stands for all orders sharing it.
    """
    for k in range(n_schools + 1):
        yield from itertools.permutations(range(n_schools), k)


def phi_bar_mechanism(inst: Instance) -> Mechanism:
    C = choice_functions(inst)
    return lambda Q: spda(inst, Q, C)[0]


def audit_strategy_proofness(
    inst: Instance,
    P: PreferenceProfile,
    max_group: int = 2,
    mechanism: Optional[Mechanism] = None,
    max_witnesses: int = 5,
    max_schools: int = AUDIT_MAX_SCHOOLS,
) -> AuditReport:
    """Search every coalition up to ``max_group`` for a joint misreport under
    which every member gets a strictly preferred seat."""
    if inst.n_schools > max_schools:
        raise ContractError(f"strategy-proofness audit guard: |S|={inst.n_schools} > {max_schools}")
    mech = mechanism or phi_bar_mechanism(inst)
    truth = mech(P)
    menu = list(reports(inst.n_schools))
    rep = AuditReport(f"group_sp[{max_group}]", details={"reports_per_student": len(menu)})
    for size in range(1, max_group + 1):
        for group in itertools.combinations(range(inst.n_students), size):
            for lies in itertools.product(menu, repeat=size):
                if all(lie == P.lists[i] for i, lie in zip(group, lies)):
                    continue
                rep.checked += 1
                out = mech(P.replace(dict(zip(group, lies))))
                if all(P.prefers(i, out.assignment[i], truth.assignment[i]) for i in group):
                    rep.fail({
                        "group": group,
                        "misreports": dict(zip(group, lies)),
                        "gains": {i: (truth.assignment[i], out.assignment[i]) for i in group},
                    })
                    if len(rep.witnesses) >= max_witnesses:
                        return rep
    return rep
