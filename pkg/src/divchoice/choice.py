"""Choice functions derived from priority rules, plus their property audits."""

from __future__ import annotations

import functools
import itertools
from typing import Callable, Iterable, Optional, Sequence

from .core import AuditReport, AxiomViolation, ContractError, Instance, School, natural_key
from .priority import Rank, subsets_upto, tiebreak_most_recent

Choice = Callable[[frozenset], frozenset]


def canonical_order(school: School, names: Optional[Sequence[str]] = None) -> tuple[int, ...]:
    """Students by type id, then within-type priority, then external id.

    Within-type priority is read at ``J = {}``; WO makes it J-independent.
    """
    n = school.n_students
    names = names if names is not None else [str(i) for i in range(n)]

    def cmp(a, b):
        if school.types[a] != school.types[b]:
            return school.types[a] - school.types[b]
        r = school.compare(frozenset(), a, b)
        if r is not Rank.TIED:
            return -int(r)
        ka, kb = natural_key(names[a]), natural_key(names[b])
        return (ka > kb) - (ka < kb)

    order = tuple(sorted(range(n), key=functools.cmp_to_key(cmp)))
    for a, b in zip(order, order[1:]):
        if school.types[a] == school.types[b] and school.compare(frozenset(), a, b) is Rank.LOWER:
            raise AxiomViolation(
                f"school {school.name}: within-type priority is not a weak order near students {a}, {b}"
            )
    return order


class ChoiceFunction:
    """The deterministic choice ``C_s`` built from a school's priority rule.

    Applicants are admitted one at a time in canonical order.  Below capacity
    an applicant enters iff acceptable at the current set; at capacity the
    pool of current holders plus the applicant drops its most recent
    lowest-priority member.  Values are memoized per set; the memo is not
    locked, so share an instance across threads only for reads of warm
    entries or use one instance per thread.
    """

    def __init__(self, school: School, names: Optional[Sequence[str]] = None, memoize: bool = True):
        self.school = school
        self.order = canonical_order(school, names)
        self.label = {i: k for k, i in enumerate(self.order)}
        self.memoize = memoize
        self._memo: dict[frozenset, frozenset] = {}

    def __call__(self, J: Iterable[int]) -> frozenset:
        return self.choose(J)

    def choose(self, J: Iterable[int]) -> frozenset:
        J = frozenset(J)
        if self.memoize:
            hit = self._memo.get(J)
            if hit is not None:
                return hit
        out = frozenset(self.steps(J)[-1] if J else ())
        if self.memoize:
            self._memo[J] = out
        return out

    def steps(self, J: Iterable[int]) -> list[tuple[int, ...]]:
        """Running chosen set after each applicant (arrival order kept)."""
        school = self.school
        n, q = school.n_students, school.capacity
        seq = sorted(J, key=self.label.__getitem__)
        if seq and not (0 <= seq[0] < n and 0 <= seq[-1] < n):
            raise ContractError(f"school {school.name}: applicant outside the student set")
        chosen: list[int] = []
        trail = []
        for a in seq:
            if len(chosen) < q:
                if school.acceptable(frozenset(chosen), a):
                    chosen.append(a)
            else:
                pool = chosen + [a]
                r = tiebreak_most_recent(school, pool)
                chosen = [x for x in pool if x != r]
            trail.append(tuple(chosen))
        return trail

    def cache_size(self) -> int:
        return len(self._memo)


def choice_functions(inst: Instance, memoize: bool = True) -> list[ChoiceFunction]:
    return [ChoiceFunction(s, inst.students, memoize) for s in inst.schools]


def choose(inst: Instance, s: int, J: Iterable[int]) -> frozenset:
    return ChoiceFunction(inst.schools[s], inst.students).choose(J)


def _scope(n: int, sets: Optional[Iterable[frozenset]]):
    return list(subsets_upto(n, n)) if sets is None else [frozenset(J) for J in sets]


def check_consistent(C: Choice, school: School, sets: Optional[Iterable[frozenset]] = None) -> AuditReport:
    """Chosen students never rank below the unchosen (or the outside option)
    at the chosen set minus themselves; spare capacity with leftovers means
    every leftover is unacceptable."""
    rep = AuditReport(f"consistent[{school.name}]")
    q = school.capacity
    for J in _scope(school.n_students, sets):
        chosen = frozenset(C(J))
        rep.checked += 1
        if not chosen <= J or len(chosen) > q:
            rep.fail({"J": J, "contract": sorted(chosen)})
            continue
        rejected = J - chosen
        for i in chosen:
            base = chosen - {i}
            for j in list(rejected) + [None]:
                if school.compare(base, i, j) is Rank.LOWER:
                    rep.fail({"clause": 1, "J": J, "i": i, "j": j})
        if len(chosen) < q and rejected:
            for j in rejected:
                if school.compare(chosen, None, j) is not Rank.HIGHER:
                    rep.fail({"clause": 2, "J": J, "j": j})
    return rep


def check_substitutable(C: Choice, n: int, sets: Optional[Iterable[frozenset]] = None, name: str = "") -> AuditReport:
    """No student is chosen from ``J + {j}`` but rejected from ``J``."""
    rep = AuditReport(f"substitutable[{name}]" if name else "substitutable")
    for J in _scope(n, sets):
        base = frozenset(C(J))
        for j in range(n):
            if j in J:
                continue
            rep.checked += 1
            for i in frozenset(C(J | {j})) - {j}:
                if i not in base:
                    rep.fail({"J": J, "i": i, "j": j})
    return rep


def check_size_monotonic(C: Choice, n: int, sets: Optional[Iterable[frozenset]] = None, name: str = "") -> AuditReport:
    """``|C(J)| <= |C(J + {j})|`` on every covering pair; chaining covers all ``J <= J'``."""
    rep = AuditReport(f"size_monotonic[{name}]" if name else "size_monotonic")
    for J in _scope(n, sets):
        size = len(C(J))
        for j in range(n):
            if j in J:
                continue
            rep.checked += 1
            bigger = J | {j}
            if len(C(bigger)) < size:
                rep.fail({"J": J, "J2": bigger, "sizes": (size, len(C(bigger)))})
    return rep


def check_tie_structure(cf: ChoiceFunction, sets: Optional[Iterable[frozenset]] = None) -> AuditReport:
    """A chosen student tied with an unchosen one never has the larger type id."""
    school = cf.school
    rep = AuditReport(f"tie_structure[{school.name}]")
    for J in _scope(school.n_students, sets):
        chosen = cf(J)
        for i, j in itertools.product(chosen, J - chosen):
            rep.checked += 1
            if school.compare(chosen - {i}, i, j) is Rank.TIED and school.types[i] > school.types[j]:
                rep.fail({"J": J, "i": i, "j": j})
    return rep


class TableChoice:
    """A choice function given as an explicit lookup (for counterexamples)."""

    def __init__(self, table: dict, name: str = "table"):
        self.table = {frozenset(k): frozenset(v) for k, v in table.items()}
        self.name = name

    def __call__(self, J: Iterable[int]) -> frozenset:
        return self.table.get(frozenset(J), frozenset())
