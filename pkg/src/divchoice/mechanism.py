"""Student-proposing deferred acceptance over school choice functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .choice import Choice, choice_functions
from .core import AxiomViolation, ContractError, Instance, Matching, PreferenceProfile
from .priority import check_axioms


@dataclass(frozen=True)
class Round:
    proposer: int
    school: int
    before: frozenset
    after: frozenset
    rejected: tuple[int, ...]


@dataclass
class SpdaTrace:
    rounds: list[Round] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rounds)


def lowest_id(eligible: Sequence[int]) -> int:
    return eligible[0]


def spda(
    inst: Instance,
    P: PreferenceProfile,
    C: Sequence[Choice],
    trace: bool = False,
    pick: Callable[[Sequence[int]], int] = lowest_id,
) -> tuple[Matching, Optional[SpdaTrace]]:
    """Run SPDA; ``pick`` selects the next proposer from the sorted eligible list.

    Each round one unheld student with schools left proposes to the best
    school that has not rejected them, and the school keeps ``C_s`` of its
    holders plus the proposer.  Anyone dropped moves past that school.
    """
    n, k = inst.n_students, inst.n_schools
    nxt = [0] * n  # position in each preference list
    held: list[frozenset] = [frozenset()] * k
    where: list[Optional[int]] = [None] * n
    log = SpdaTrace() if trace else None

    while True:
        eligible = [i for i in range(n) if where[i] is None and nxt[i] < len(P.lists[i])]
        if not eligible:
            break
        i = pick(eligible)
        s = P.lists[i][nxt[i]]
        before = held[s]
        pool = before | {i}
        after = frozenset(C[s](pool))
        if not after <= pool or len(after) > inst.capacity(s):
            raise ContractError(
                f"choice of school {inst.schools[s].name} returned {sorted(after)} "
                f"from {sorted(pool)} (capacity {inst.capacity(s)})"
            )
        dropped = tuple(sorted(pool - after))
        for j in dropped:
            where[j] = None
            nxt[j] += 1
        for j in after:
            where[j] = s
        held[s] = after
        if log is not None:
            log.rounds.append(Round(i, s, before, after, dropped))

    return Matching.from_roster(held, n), log


def phi_bar(
    inst: Instance,
    P: PreferenceProfile,
    validate: bool = True,
    trace: bool = False,
    C: Optional[Sequence[Choice]] = None,
) -> tuple[Matching, Optional[SpdaTrace]]:
    """SPDA over the derived choice functions of every school.

    With ``validate`` each rule is audited for PD/WO/DC first and a failing
    rule raises :class:`AxiomViolation` carrying the audit.  Pass prebuilt
    ``C`` to reuse memoized choice values across calls.
    """
    if validate:
        for school in inst.schools:
            rep = check_axioms(school)
            if not rep.passed:
                w = rep.witnesses[0]
                raise AxiomViolation(
                    f"school {school.name} fails {w['axiom']}: {_describe(inst, w)}", rep
                )
    if C is None:
        C = choice_functions(inst)
    return spda(inst, P, C, trace=trace)


def _describe(inst: Instance, w: dict) -> str:
    def name(x):
        if isinstance(x, str):
            return x
        if isinstance(x, frozenset):
            return "{" + ",".join(inst.names(x)) + "}"
        return "∅" if x is None else inst.students[x]

    return ", ".join(f"{k}={name(v)}" for k, v in w.items() if k != "axiom")
