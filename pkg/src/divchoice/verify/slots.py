"""Diversity objective, its exhaustive optimizer, and slot-specific priorities."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ..core import AuditReport


@dataclass(frozen=True)
class ObjectiveSpec:
    """``v(S) = |S| - sum(1 - sigma_j) + diversity * sqrt(|S & favored|)``."""

    sigma: Mapping[int, float]
    favored: frozenset
    diversity: float = 0.5

    def value(self, S: Iterable[int]) -> float:
        S = list(S)
        base = len(S) - sum(1 - self.sigma[j] for j in S)
        return base + self.diversity * math.sqrt(sum(1 for j in S if j in self.favored))


def optimal_choice_oracle(obj: ObjectiveSpec, applicants: Iterable[int], q: int, tol: float = 1e-12) -> frozenset:
    """Best subset of at most ``q`` applicants; ties go to the lexicographically
    smallest sorted member list."""
    pool = sorted(applicants)
    if len(pool) > 20:
        raise ValueError("exhaustive subset scan is limited to 20 applicants")
    best, best_v = (), -math.inf
    for k in range(min(q, len(pool)) + 1):
        for S in itertools.combinations(pool, k):
            v = obj.value(S)
            if v > best_v + tol or (abs(v - best_v) <= tol and list(S) < list(best)):
                best, best_v = S, v
    return frozenset(best)


@dataclass(frozen=True)
class SlotPriorities:
    """One strict order per seat; ``orders[k]`` lists students best first."""

    orders: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for o in self.orders:
            if len(set(o)) != len(o):
                raise ValueError("slot priority must be a strict order")


def slot_specific_choose(slots: SlotPriorities, J: Iterable[int]) -> frozenset:
    """Fill seats in sequence; each takes its best remaining applicant."""
    left = set(J)
    chosen = []
    for order in slots.orders[: len(left)]:
        pick = next(x for x in order if x in left)
        chosen.append(pick)
        left.discard(pick)
    return frozenset(chosen)


@dataclass(frozen=True)
class SlotScenario:
    students: tuple[int, ...]
    objective: ObjectiveSpec
    q: int
    cases: tuple[frozenset, ...]
    expected: tuple[frozenset, ...] = ()


def default_slot_scenario() -> SlotScenario:
    """The shipped six-student, two-seat scenario with its printed optima."""
    from ..io import fixture_text, parse_slot_scenario

    return parse_slot_scenario(fixture_text("appendixE"))


@dataclass
class SlotAuditResult:
    report: AuditReport
    total_pairs: int = 0
    satisfying_pairs: int = 0
    max_cases_satisfied: int = 0
    histogram: Counter = field(default_factory=Counter)
    optima: tuple = ()


def audit_slot_impossibility(scenario: Optional[SlotScenario] = None, cases: Optional[Sequence[int]] = None) -> SlotAuditResult:
    """Try every tuple of strict seat orders against the optimal choices.

    Optima are recomputed by :func:`optimal_choice_oracle` and compared with
    any printed ones before the search.  ``cases`` restricts the search to
    a subset of case indices.  Only two-seat scenarios are supported.
    """
    sc = scenario or default_slot_scenario()
    if sc.q != 2:
        raise ValueError("slot search supports two seats")
    rep = AuditReport("slot_impossibility")
    optima = tuple(optimal_choice_oracle(sc.objective, J, sc.q) for J in sc.cases)
    if sc.expected:
        for k, (got, want) in enumerate(zip(optima, sc.expected)):
            if got != want:
                rep.fail({"case": k + 1, "oracle": sorted(got), "printed": sorted(want)})
    idx = list(range(len(sc.cases))) if cases is None else list(cases)
    cases_J = [sc.cases[k] for k in idx]
    targets = [optima[k] for k in idx]

    perms = list(itertools.permutations(sc.students))
    # seat-1 pick per case, and seat-2 pick per case given the seat-1 pick
    first = [tuple(next(x for x in p if x in J) for J in cases_J) for p in perms]
    second = [
        tuple({f: next(x for x in p if x in J and x != f) for f in J} for J in cases_J)
        for p in perms
    ]
    hist: Counter = Counter()
    for f in first:
        for sec in second:
            hits = 0
            for c, (J_star, f_c) in enumerate(zip(targets, f)):
                if f_c in J_star and sec[c][f_c] in J_star:
                    hits += 1
            hist[hits] += 1
    res = SlotAuditResult(rep, optima=optima, histogram=hist)
    res.total_pairs = len(perms) ** 2
    res.satisfying_pairs = hist.get(len(idx), 0)
    res.max_cases_satisfied = max(hist)
    rep.checked = res.total_pairs
    if res.satisfying_pairs:
        rep.passed = False
    rep.details.update(cases=[k + 1 for k in idx], satisfying_pairs=res.satisfying_pairs,
                       max_cases_satisfied=res.max_cases_satisfied)
    return res
