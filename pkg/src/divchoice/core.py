"""Problem-instance model: students, schools, types, preferences and matchings.

Students and schools are addressed by dense internal indices; the external
string ids are kept on the :class:`Instance` so reports can translate back.
The outside option is ``None`` throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

if TYPE_CHECKING:
    from .priority import PriorityRule, Rank

OUTSIDE = None


class InstanceError(ValueError):
    """Malformed instance data or an unknown id."""


class ContractError(RuntimeError):
    """A query outside an operation's domain, or a component breaking its contract."""


class AxiomViolation(ValueError):
    """A priority rule fails PD, WO or DC; ``report`` carries the witnesses."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


def natural_key(label: str):
    """Sort key putting numeric ids in numeric order ("2" < "10")."""
    parts = re.split(r"(\d+)", label)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


@dataclass(frozen=True)
class School:
    """One school: its capacity, the per-student type map and its priority rule.

    ``types[i]`` is the internal type id of student ``i`` at this school
    (ids start at 1; 0 is reserved for the outside option).
    """

    name: str
    capacity: int
    types: tuple[int, ...]
    rule: "PriorityRule"
    type_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.capacity < 1:
            raise InstanceError(f"school {self.name!r}: capacity must be >= 1")
        if any(t < 1 for t in self.types):
            raise InstanceError(f"school {self.name!r}: student type ids start at 1")
        self.rule.validate(self)

    @property
    def n_students(self) -> int:
        return len(self.types)

    def type_of(self, i: Optional[int]) -> int:
        return 0 if i is None else self.types[i]

    def count_type(self, J: Iterable[int], t: int) -> int:
        types = self.types
        return sum(1 for x in J if types[x] == t)

    def compare(self, J: frozenset, a: Optional[int], b: Optional[int]) -> "Rank":
        return self.rule.compare(self, J, a, b)

    def acceptable(self, J: frozenset, i: int) -> bool:
        from .priority import Rank

        return self.rule.compare(self, J, i, None) is not Rank.LOWER


@dataclass(frozen=True)
class Instance:
    students: tuple[str, ...]
    schools: tuple[School, ...]

    def __post_init__(self):
        if len(set(self.students)) != len(self.students):
            raise InstanceError("duplicate student ids")
        names = [s.name for s in self.schools]
        if len(set(names)) != len(names):
            raise InstanceError("duplicate school ids")
        if set(names) & set(self.students):
            raise InstanceError("student and school ids must be disjoint")
        for s in self.schools:
            if s.n_students != len(self.students):
                raise InstanceError(f"school {s.name!r}: type map is not total")

    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def n_schools(self) -> int:
        return len(self.schools)

    def capacity(self, s: int) -> int:
        return self.schools[s].capacity

    def student_index(self, sid: str) -> int:
        try:
            return self.students.index(sid)
        except ValueError:
            raise InstanceError(f"unknown student id {sid!r}") from None

    def school_index(self, name: str) -> int:
        for k, s in enumerate(self.schools):
            if s.name == name:
                return k
        raise InstanceError(f"unknown school id {name!r}")

    def student_name(self, i: Optional[int]) -> Optional[str]:
        return None if i is None else self.students[i]

    def school_name(self, s: Optional[int]) -> Optional[str]:
        return None if s is None else self.schools[s].name

    def ordered(self, members: Iterable[int]) -> list[int]:
        """Members sorted by natural order of their external ids."""
        return sorted(members, key=lambda i: natural_key(self.students[i]))

    def names(self, members: Iterable[int]) -> list[str]:
        return [self.students[i] for i in self.ordered(members)]


@dataclass(frozen=True)
class PreferenceProfile:
    """Per-student acceptable prefixes, most preferred first.

    Schools missing from a list rank below the outside option.
    """

    lists: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for i, lst in enumerate(self.lists):
            if len(set(lst)) != len(lst):
                raise InstanceError(f"student {i}: duplicate school in preference list")

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> "PreferenceProfile":
        return cls(tuple(tuple(x) for x in lists))

    def check(self, inst: Instance) -> None:
        if len(self.lists) != inst.n_students:
            raise InstanceError("preference profile does not cover every student")
        for lst in self.lists:
            for s in lst:
                if not 0 <= s < inst.n_schools:
                    raise InstanceError(f"preference lists unknown school index {s}")

    def rank(self, i: int, s: Optional[int]) -> int:
        lst = self.lists[i]
        if s is None:
            return len(lst)
        try:
            return lst.index(s)
        except ValueError:
            # unlisted schools sit below the outside option, in index order
            return len(lst) + 1 + s

    def prefers(self, i: int, a: Optional[int], b: Optional[int]) -> bool:
        """Strict preference ``a P_i b``."""
        return self.rank(i, a) < self.rank(i, b)

    def weakly_prefers(self, i: int, a: Optional[int], b: Optional[int]) -> bool:
        return self.rank(i, a) <= self.rank(i, b)

    def acceptable(self, i: int, s: int) -> bool:
        return s in self.lists[i]

    def replace(self, updates: dict[int, tuple[int, ...]]) -> "PreferenceProfile":
        lists = list(self.lists)
        for i, lst in updates.items():
            lists[i] = tuple(lst)
        return PreferenceProfile(tuple(lists))


@dataclass(frozen=True)
class Matching:
    """Assignment and roster views of a matching.

    Build with :meth:`from_assignment` for a consistent pair; the raw
    constructor accepts arbitrary views so that :func:`validate_matching`
    can report on inconsistent input.
    """

    assignment: tuple[Optional[int], ...]
    roster: tuple[frozenset, ...] = field(default=())

    @classmethod
    def from_assignment(cls, assignment: Sequence[Optional[int]], n_schools: int) -> "Matching":
        roster = [set() for _ in range(n_schools)]
        for i, s in enumerate(assignment):
            if s is not None:
                roster[s].add(i)
        return cls(tuple(assignment), tuple(frozenset(r) for r in roster))

    @classmethod
    def from_roster(cls, roster: Sequence[Iterable[int]], n_students: int) -> "Matching":
        assignment: list[Optional[int]] = [None] * n_students
        for s, members in enumerate(roster):
            for i in members:
                assignment[i] = s
        return cls(tuple(assignment), tuple(frozenset(r) for r in roster))

    @classmethod
    def empty(cls, n_students: int, n_schools: int) -> "Matching":
        return cls.from_assignment([None] * n_students, n_schools)

    def of(self, i: int) -> Optional[int]:
        return self.assignment[i]

    def at(self, s: int) -> frozenset:
        return self.roster[s]


def validate_matching(inst: Instance, m: Matching) -> list[str]:
    """Return the violated matching conditions; an empty list means valid.

    Conditions: (1) every student holds at most one seat or the outside
    option, (2) rosters only contain students, (3) the two views agree,
    (4) no roster exceeds its capacity.  Unknown ids raise
    :class:`InstanceError` instead of producing a violation.
    """
    n, k = inst.n_students, inst.n_schools
    if len(m.assignment) != n:
        raise InstanceError(f"assignment covers {len(m.assignment)} students, expected {n}")
    if len(m.roster) != k:
        raise InstanceError(f"roster covers {len(m.roster)} schools, expected {k}")
    for s in m.assignment:
        if s is not None and not 0 <= s < k:
            raise InstanceError(f"unknown school index {s}")
    for members in m.roster:
        for i in members:
            if not 0 <= i < n:
                raise InstanceError(f"unknown student index {i}")

    out = []
    seen: dict[int, int] = {}
    for s, members in enumerate(m.roster):
        for i in members:
            if i in seen:
                out.append(
                    f"condition (1): student {inst.students[i]} on rosters of "
                    f"{inst.schools[seen[i]].name} and {inst.schools[s].name}"
                )
            seen[i] = s
    for i, s in enumerate(m.assignment):
        if s is not None and i not in m.roster[s]:
            out.append(
                f"condition (3): student {inst.students[i]} assigned to "
                f"{inst.schools[s].name} but missing from its roster"
            )
    for s, members in enumerate(m.roster):
        for i in members:
            if m.assignment[i] != s:
                out.append(
                    f"condition (2): school {inst.schools[s].name} lists student "
                    f"{inst.students[i]} whose assignment is {inst.school_name(m.assignment[i])}"
                )
        if len(members) > inst.schools[s].capacity:
            out.append(
                f"condition (4): school {inst.schools[s].name} holds {len(members)} "
                f"students, capacity {inst.schools[s].capacity}"
            )
    return out


def pareto_dominates(P: PreferenceProfile, a: Matching, b: Matching) -> bool:
    """True iff every student weakly prefers ``a`` and someone strictly does."""
    strict = False
    for i in range(len(a.assignment)):
        ra, rb = P.rank(i, a.assignment[i]), P.rank(i, b.assignment[i])
        if ra > rb:
            return False
        if ra < rb:
            strict = True
    return strict


@dataclass
class AuditReport:
    """Pass/fail evidence from an exhaustive (or sampled) check."""

    name: str
    passed: bool = True
    checked: int = 0
    witnesses: list = field(default_factory=list)
    sampled: bool = False
    details: dict = field(default_factory=dict)

    def fail(self, witness) -> None:
        self.passed = False
        self.witnesses.append(witness)

    def merge(self, other: "AuditReport") -> None:
        self.passed = self.passed and other.passed
        self.checked += other.checked
        self.witnesses.extend(other.witnesses)
        self.sampled = self.sampled or other.sampled

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        mode = " (sampled)" if self.sampled else ""
        return f"{self.name}: {status}{mode}, {self.checked} checked, {len(self.witnesses)} witnesses"
