"""Stability taxonomy, choice-stability and brute-force stable-set enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from ..choice import Choice
from ..core import ContractError, Instance, Matching, PreferenceProfile, pareto_dominates
from ..priority import Rank

ENUM_MAX_STUDENTS = 8
ENUM_MAX_SCHOOLS = 4


@dataclass
class StabilityVerdict:
    non_wasteful: bool = True
    individually_rational: bool = True
    fair: bool = True
    waste: list = field(default_factory=list)  # (student, school)
    irrational: list = field(default_factory=list)  # (student, school or None)
    envy: list = field(default_factory=list)  # (envious, envied, school)

    @property
    def stable(self) -> bool:
        return self.non_wasteful and self.individually_rational and self.fair


def stability_verdict(inst: Instance, P: PreferenceProfile, m: Matching, first_only: bool = False) -> StabilityVerdict:
    """Check non-wastefulness, individual rationality and fairness of ``m``.

    ``first_only`` stops at the first failure (enough for filtering).
    """
    v = StabilityVerdict()
    n = inst.n_students
    for i in range(n):
        here = m.assignment[i]
        if P.prefers(i, None, here):
            v.individually_rational = False
            v.irrational.append((i, here))
            if first_only:
                return v
    for s, school in enumerate(inst.schools):
        members = m.roster[s]
        for i in members:
            if school.compare(members - {i}, i, None) is Rank.LOWER:
                v.individually_rational = False
                v.irrational.append((i, s))
                if first_only:
                    return v
        full = len(members) >= school.capacity
        for i in range(n):
            if i in members or not P.prefers(i, s, m.assignment[i]):
                continue
            if not full and school.compare(members, None, i) is not Rank.HIGHER:
                v.non_wasteful = False
                v.waste.append((i, s))
                if first_only:
                    return v
            for j in members:
                if school.compare(members - {j}, i, j) is Rank.HIGHER:
                    v.fair = False
                    v.envy.append((i, j, s))
                    if first_only:
                        return v
    return v


def is_stable(inst: Instance, P: PreferenceProfile, m: Matching) -> bool:
    return stability_verdict(inst, P, m, first_only=True).stable


def c_stability_witnesses(inst: Instance, P: PreferenceProfile, C: Sequence[Choice], m: Matching) -> list:
    """Failures of choice-stability: an unacceptable seat, a roster the school
    would trim, or a student the school would take who wants to come."""
    out = []
    for i in range(inst.n_students):
        if P.prefers(i, None, m.assignment[i]):
            out.append(("individually_rational", i))
    for s in range(inst.n_schools):
        members = m.roster[s]
        if frozenset(C[s](members)) != members:
            out.append(("roster_not_fixed_point", s))
        for i in range(inst.n_students):
            if i in members or not P.prefers(i, s, m.assignment[i]):
                continue
            if i in C[s](members | {i}):
                out.append(("blocking", i, s))
    return out


def is_c_stable(inst: Instance, P: PreferenceProfile, C: Sequence[Choice], m: Matching) -> bool:
    return not c_stability_witnesses(inst, P, C, m)


def _guard(inst: Instance) -> None:
    if inst.n_students > ENUM_MAX_STUDENTS or inst.n_schools > ENUM_MAX_SCHOOLS:
        raise ContractError(
            f"enumeration guard: |I|={inst.n_students} (max {ENUM_MAX_STUDENTS}), "
            f"|S|={inst.n_schools} (max {ENUM_MAX_SCHOOLS})"
        )


def iter_matchings(inst: Instance, P: Optional[PreferenceProfile] = None) -> Iterator[Matching]:
    """Every capacity-feasible matching, student by student.

    With ``P`` each student only ranges over their acceptable schools plus
    the outside option (other seats can never be individually rational).
    """
    n, k = inst.n_students, inst.n_schools
    caps = [inst.capacity(s) for s in range(k)]
    load = [0] * k
    assign: list[Optional[int]] = [None] * n
    options = [
        [None] + (sorted(P.lists[i]) if P is not None else list(range(k))) for i in range(n)
    ]

    def rec(i):
        if i == n:
            yield Matching.from_assignment(assign, k)
            return
        for s in options[i]:
            if s is not None:
                if load[s] >= caps[s]:
                    continue
                load[s] += 1
            assign[i] = s
            yield from rec(i + 1)
            if s is not None:
                load[s] -= 1
        assign[i] = None

    yield from rec(0)


def enumerate_stable(inst: Instance, P: PreferenceProfile) -> list[Matching]:
    _guard(inst)
    return [m for m in iter_matchings(inst, P) if is_stable(inst, P, m)]


def student_optimal_stable(inst: Instance, P: PreferenceProfile, stable: Optional[list] = None) -> list[Matching]:
    stable = enumerate_stable(inst, P) if stable is None else stable
    return [m for m in stable if not any(pareto_dominates(P, o, m) for o in stable)]
