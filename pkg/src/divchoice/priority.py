"""Assignment-dependent weak-order priority rules.

A rule answers ``compare(J, a, b)``: how ``a`` ranks against ``b`` for the
next seat when the students ``J`` already hold seats.  Queries are defined
only for ``|J| <= q - 1`` and ``a, b`` outside ``J``; ``None`` is the outside
option.  Two realizations share that contract:

* :class:`AdjustedScoringRule` scores ``sigma_i + alpha_t(|J & I^t|)`` and
  compares scores, with the threshold ``sigma_floor`` scoring the outside
  option.
* :class:`TablePriorityRule` stores every order explicitly as indifference
  classes.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .core import AuditReport, ContractError, InstanceError, School

# stands in for an infinitely low acceptance threshold
NEG_INF_FLOOR = -(10**6)

# equality tolerance for float-valued scores; exact scores compare exactly
SCORE_TOLERANCE = 1e-9

# exhaustive axiom audits above this size switch to sampling
EXHAUSTIVE_MAX_STUDENTS = 12
EXHAUSTIVE_MAX_CAPACITY = 4


class Rank(IntEnum):
    LOWER = -1
    TIED = 0
    HIGHER = 1

    def flip(self) -> "Rank":
        return Rank(-int(self))


class ConsistencyError(ContractError):
    """An internal cross-check disagreed with its brute-force oracle."""


def rank_scores(fa, fb) -> Rank:
    d = fa - fb
    if isinstance(d, float):
        if abs(d) <= SCORE_TOLERANCE:
            return Rank.TIED
    elif d == 0:
        return Rank.TIED
    return Rank.HIGHER if d > 0 else Rank.LOWER


class PriorityRule:
    """Base class; subclasses implement :meth:`_compare` and :meth:`validate`."""

    def compare(self, school: School, J: frozenset, a: Optional[int], b: Optional[int]) -> Rank:
        if len(J) > school.capacity - 1:
            raise ContractError(
                f"school {school.name}: priority undefined for |J|={len(J)} >= q={school.capacity}"
            )
        if a in J or b in J:
            raise ContractError(f"school {school.name}: compared student already in J")
        if a == b:
            return Rank.TIED
        return self._compare(school, J, a, b)

    def _compare(self, school: School, J: frozenset, a, b) -> Rank:
        raise NotImplementedError

    def validate(self, school: School) -> None:
        pass


@dataclass(frozen=True, eq=True)
class AdjustedScoringRule(PriorityRule):
    """Priority by adjusted score ``sigma_i + alpha[type](count of that type in J)``.

    ``alpha`` maps each internal type id to its bonus table on counts
    ``0..q``.  Scores may be exact (``int``/``Fraction``) or ``float``.
    """

    sigma: tuple
    sigma_floor: object
    alpha: Mapping[int, tuple] = field(default_factory=dict)

    def score(self, school: School, J: Iterable[int], i: Optional[int]):
        if i is None:
            return self.sigma_floor
        t = school.types[i]
        table = self.alpha[t]
        c = school.count_type(J, t)
        if c >= len(table):
            raise ContractError(
                f"school {school.name}: type {t} count {c} outside alpha domain 0..{len(table) - 1}"
            )
        return self.sigma[i] + table[c]

    def _compare(self, school, J, a, b):
        return rank_scores(self.score(school, J, a), self.score(school, J, b))

    def validate(self, school: School) -> None:
        if len(self.sigma) != school.n_students:
            raise InstanceError(f"school {school.name}: sigma must cover every student")
        for i, v in enumerate(self.sigma):
            if not 0 <= v <= 1:
                raise InstanceError(f"school {school.name}: sigma of student {i} is {v}, outside [0,1]")
        for t in set(school.types):
            if t not in self.alpha:
                raise InstanceError(f"school {school.name}: no alpha table for type {t}")
        for t, table in self.alpha.items():
            if len(table) < school.capacity + 1:
                raise InstanceError(
                    f"school {school.name}: alpha for type {t} covers {len(table)} counts, "
                    f"need 0..{school.capacity}"
                )
            for x in range(len(table) - 1):
                if table[x + 1] > table[x]:
                    raise InstanceError(
                        f"school {school.name}: alpha for type {t} increases between "
                        f"counts {x} and {x + 1} ({table[x]} < {table[x + 1]})"
                    )


@dataclass(frozen=True, eq=True)
class TablePriorityRule(PriorityRule):
    """Explicit orders: ``orders[J]`` lists indifference classes, best first.

    Classes hold student indices and ``None`` for the outside option.  Every
    ``J`` with ``|J| <= q - 1`` must be present.
    """

    orders: Mapping[frozenset, tuple]

    def __post_init__(self):
        pos = {}
        for J, classes in self.orders.items():
            m = {}
            for k, cls in enumerate(classes):
                for x in cls:
                    if x in m:
                        raise InstanceError(f"priority table at {sorted(J)}: {x} listed twice")
                    m[x] = k
            pos[frozenset(J)] = m
        object.__setattr__(self, "_pos", pos)

    def _compare(self, school, J, a, b):
        try:
            m = self._pos[J]
        except KeyError:
            raise ContractError(f"school {school.name}: no priority order stored for J={sorted(J)}") from None
        try:
            pa, pb = m[a], m[b]
        except KeyError as e:
            raise ContractError(f"school {school.name}: {e.args[0]} missing from order at J={sorted(J)}") from None
        if pa == pb:
            return Rank.TIED
        return Rank.HIGHER if pa < pb else Rank.LOWER

    def validate(self, school: School) -> None:
        n, q = school.n_students, school.capacity
        everyone = frozenset(range(n))
        for J in self.orders:
            if len(J) > q - 1:
                raise InstanceError(f"school {school.name}: order stored for |J|={len(J)} >= q")
            if not J <= everyone:
                raise InstanceError(f"school {school.name}: order keyed by unknown students {sorted(J)}")
        for J in subsets_upto(n, q - 1):
            if J not in self._pos:
                raise InstanceError(f"school {school.name}: missing priority order for J={sorted(J)}")
            ground = set(everyone - J) | {None}
            if set(self._pos[J]) != ground:
                raise InstanceError(
                    f"school {school.name}: order at J={sorted(J)} does not partition the remaining students and the outside option"
                )

    @classmethod
    def from_rule(cls, school: School) -> "TablePriorityRule":
        """Tabulate any rule (used to freeze adjusted-score rules for inspection)."""
        orders = {}
        for J in subsets_upto(school.n_students, school.capacity - 1):
            ground = [x for x in range(school.n_students) if x not in J] + [None]
            orders[J] = weak_order_classes(school, J, ground)
        return cls(orders)


def weak_order_classes(school: School, J: frozenset, ground: Sequence) -> tuple:
    """Group ``ground`` into indifference classes, best first."""
    import functools

    def cmp(a, b):
        return -int(school.compare(J, a, b))

    items = sorted(ground, key=functools.cmp_to_key(cmp))
    classes: list[list] = []
    for x in items:
        if classes and school.compare(J, classes[-1][0], x) is Rank.TIED:
            classes[-1].append(x)
        else:
            classes.append([x])
    return tuple(frozenset(c) for c in classes)


def subsets_upto(n: int, k: int, pool: Optional[Iterable[int]] = None) -> Iterator[frozenset]:
    items = list(range(n)) if pool is None else list(pool)
    for size in range(0, max(k, -1) + 1):
        for c in itertools.combinations(items, size):
            yield frozenset(c)


def compare(inst, s: int, J: Iterable[int], a: Optional[int], b: Optional[int]) -> Rank:
    return inst.schools[s].compare(frozenset(J), a, b)


def is_acceptable(inst, s: int, J: Iterable[int], i: int) -> bool:
    return inst.schools[s].acceptable(frozenset(J), i)


def adjusted_score(inst, s: int, J: Iterable[int], i: Optional[int]):
    school = inst.schools[s]
    if not isinstance(school.rule, AdjustedScoringRule):
        raise ContractError(f"school {school.name} does not use an adjusted scoring rule")
    J = frozenset(J)
    if i is not None and i in J:
        raise ContractError("adjusted score queried for a student already in J")
    return school.rule.score(school, J, i)


def _axiom_sets(school: School, max_size: int, sample: Optional[int], seed: int):
    """All J up to ``max_size``, or a seeded sample when the school is large."""
    n, q = school.n_students, school.capacity
    if n <= EXHAUSTIVE_MAX_STUDENTS or q <= EXHAUSTIVE_MAX_CAPACITY:
        return list(subsets_upto(n, max_size)), False
    rng = random.Random(seed)
    budget = sample or 2000
    out = {frozenset()}
    while len(out) < budget:
        size = rng.randint(0, max_size)
        out.add(frozenset(rng.sample(range(n), size)))
    return sorted(out, key=lambda J: (len(J), sorted(J))), True


def check_pd(school: School, sets: Sequence[frozenset]) -> AuditReport:
    """PD: fewer own-type and more rival-type peers never hurt ``i`` against ``j``.

    For each ordered pair the J's are bucketed by the two type counts; a
    violation exists iff some bucket dominates another in the hypothesis
    yet shows a strictly better rank than the other's worst.
    """
    rep = AuditReport("PD")
    n = school.n_students
    ground = list(range(n)) + [None]
    for a, b in itertools.permutations(ground, 2):
        ta, tb = school.type_of(a), school.type_of(b)
        cells: dict[tuple[int, int], list] = {}
        for J in sets:
            if a in J or b in J:
                continue
            r = school.compare(J, a, b)
            key = (school.count_type(J, ta), school.count_type(J, tb))
            cell = cells.get(key)
            if cell is None:
                cells[key] = [r, J, r, J]
            else:
                if r < cell[0]:
                    cell[0], cell[1] = r, J
                if r > cell[2]:
                    cell[2], cell[3] = r, J
            rep.checked += 1
        for (ca, cb), (_, _, hi, J_hi) in cells.items():
            for (ca2, cb2), (lo, J_lo, _, _) in cells.items():
                if ca >= ca2 and cb <= cb2 and hi > lo:
                    rep.fail({"axiom": "PD", "J": J_hi, "J2": J_lo, "i": a, "j": b,
                              "rank_J": hi.name, "rank_J2": lo.name})
    return rep


def check_wo(school: School, sets: Sequence[frozenset]) -> AuditReport:
    """WO: same-type students compare identically at every J."""
    rep = AuditReport("WO")
    n = school.n_students
    for a, b in itertools.combinations(range(n), 2):
        if school.types[a] != school.types[b]:
            continue
        first = None
        for J in sets:
            if a in J or b in J:
                continue
            r = school.compare(J, a, b)
            rep.checked += 1
            if first is None:
                first = (r, J)
            elif r != first[0]:
                rep.fail({"axiom": "WO", "J": first[1], "J2": J, "i": a, "j": b,
                          "rank_J": first[0].name, "rank_J2": r.name})
                break
    return rep


def check_dc(school: School, sets: Sequence[frozenset]) -> AuditReport:
    """DC: swapping ``j`` for a weakly better same-type ``i`` never lowers the rank.

    With ``i >= j`` at J: ``rank(J+{j}; i, k) >= rank(J+{i}; j, k)`` for every
    other ``k`` (outside option included).
    """
    rep = AuditReport("DC")
    n, q = school.n_students, school.capacity
    for J in sets:
        if len(J) > q - 2:
            continue
        rest = [x for x in range(n) if x not in J]
        for i, j in itertools.permutations(rest, 2):
            if school.types[i] != school.types[j]:
                continue
            if school.compare(J, i, j) is Rank.LOWER:
                continue
            Ji, Jj = J | {i}, J | {j}
            for k in rest + [None]:
                if k == i or k == j:
                    continue
                rep.checked += 1
                r_i = school.compare(Jj, i, k)
                r_j = school.compare(Ji, j, k)
                if r_i < r_j:
                    rep.fail({"axiom": "DC", "J": J, "i": i, "j": j, "k": k,
                              "rank_i_at_J+j": r_i.name, "rank_j_at_J+i": r_j.name})
    return rep


def check_axioms(school: School, sample: Optional[int] = None, seed: int = 0) -> AuditReport:
    """Audit PD, WO and DC; ``details`` holds one sub-report per axiom."""
    sets, sampled = _axiom_sets(school, school.capacity - 1, sample, seed)
    rep = AuditReport(f"axioms[{school.name}]", sampled=sampled)
    for sub in (check_pd(school, sets), check_wo(school, sets), check_dc(school, sets)):
        sub.sampled = sampled
        rep.details[sub.name] = sub
        rep.merge(sub)
    return rep


def check_cross_set_transitivity(school: School) -> AuditReport:
    """``i > j at J+k`` and ``j > k at J+i`` imply ``i > k at J+j``."""
    rep = AuditReport(f"transitivity[{school.name}]")
    n, q = school.n_students, school.capacity
    for J in subsets_upto(n, q - 2):
        rest = [x for x in range(n) if x not in J]
        for i, j, k in itertools.permutations(rest, 3):
            if school.compare(J | {k}, i, j) is not Rank.HIGHER:
                continue
            rep.checked += 1
            if school.compare(J | {i}, j, k) is Rank.HIGHER and school.compare(J | {j}, i, k) is not Rank.HIGHER:
                rep.fail({"J": J, "i": i, "j": j, "k": k})
    return rep


def check_weak_order(school: School) -> AuditReport:
    """Each fixed-J relation is complete, antisymmetric in rank and transitive."""
    rep = AuditReport(f"weak_order[{school.name}]")
    n, q = school.n_students, school.capacity
    for J in subsets_upto(n, q - 1):
        ground = [x for x in range(n) if x not in J] + [None]
        R = {(a, b): school.compare(J, a, b) for a in ground for b in ground}
        for a in ground:
            if R[a, a] is not Rank.TIED:
                rep.fail({"J": J, "reflexivity": a})
            for b in ground:
                if R[a, b] != R[b, a].flip():
                    rep.fail({"J": J, "symmetry": (a, b)})
                for c in ground:
                    rep.checked += 1
                    if R[a, b] >= 0 and R[b, c] >= 0 and R[a, c] < 0:
                        rep.fail({"J": J, "transitivity": (a, b, c)})
    return rep


def is_linear(school: School) -> bool:
    """True iff no two distinct members of any ground set are tied."""
    n, q = school.n_students, school.capacity
    for J in subsets_upto(n, q - 1):
        ground = [x for x in range(n) if x not in J] + [None]
        for a, b in itertools.combinations(ground, 2):
            if school.compare(J, a, b) is Rank.TIED:
                return False
    return True


def lowest_priority_within(school: School, J: Iterable[int]) -> frozenset:
    """Members ``i`` of ``J`` with ``j >= i at J - {i, j}`` for every other ``j``.

    Requires ``2 <= |J| <= q + 1``.  Non-empty whenever the rule satisfies
    PD, WO and DC; an empty result is evidence that it does not.
    """
    J = frozenset(J)
    if not 2 <= len(J) <= school.capacity + 1:
        raise ContractError(f"lowest priority needs 2 <= |J| <= q+1, got |J|={len(J)}")
    return frozenset(
        i for i in J
        if all(school.compare(J - {i, j}, j, i) is not Rank.LOWER for j in J if j != i)
    )


def is_lowest(school: School, pool: frozenset, i: int) -> bool:
    return all(school.compare(pool - {i, j}, j, i) is not Rank.LOWER for j in pool if j != i)


def tiebreak_most_recent(school: School, pool: Sequence[int]) -> int:
    """Pick the student to reject from a full pool (arrival order, newcomer last).

    Linear scan: the candidate starts at the newcomer and moves to each
    scanned member that ranks weakly below it.  The newcomer comes last in
    the scan, so a final tie resolves to it.
    """
    members = frozenset(pool)
    cand = pool[-1]
    for a in pool:
        if a == cand:
            continue
        if school.compare(members - {cand, a}, cand, a) is not Rank.LOWER:
            cand = a
    if not is_lowest(school, members, cand):
        raise ConsistencyError(
            f"school {school.name}: tie-break picked {cand}, which is not lowest within {sorted(members)}"
        )
    return cand


PRESETS = (
    "linear_reserve",
    "reserves",
    "quotas",
    "soft_bounds",
    "hard_upper_soft_lower",
    "flat",
    "concave_sqrt",
)


def preset_alpha(kind: str, params: Mapping, q: int, type_ids: Iterable[int]):
    """Bonus tables on counts ``0..q`` and the threshold for a named preset.

    ``params`` values are keyed by internal type id:

    * ``linear_reserve`` (``r``): ``2 * (r_t - (x + 1))``, threshold ``NEG_INF_FLOOR``
    * ``reserves`` / ``quotas`` (``r``): 2 below ``r_t`` else 0; threshold -1 / 2
    * ``soft_bounds`` / ``hard_upper_soft_lower`` (``r``, ``rho``): 4 below
      ``r_t``, 2 below ``rho_t``, else 0; threshold -1 / 2
    * ``flat`` (``bonus``): constant per type; threshold ``params["floor"]`` or 0
    * ``concave_sqrt`` (``weight``): ``w_t * (sqrt(x + 1) - sqrt(x))`` as floats;
      threshold ``params["floor"]`` or 0
    """
    type_ids = sorted(set(type_ids))
    counts = range(q + 1)

    def per_type(name, default=None):
        table = params.get(name, {})
        out = {}
        for t in type_ids:
            if t in table:
                out[t] = table[t]
            elif default is not None:
                out[t] = default
            else:
                raise ValueError(f"preset {kind}: parameter {name} missing for type {t}")
        return out

    if kind == "linear_reserve":
        r = per_type("r")
        alpha = {t: tuple(2 * (r[t] - (x + 1)) for x in counts) for t in type_ids}
        floor = NEG_INF_FLOOR
    elif kind in ("reserves", "quotas"):
        r = per_type("r")
        alpha = {t: tuple(2 if r[t] > x else 0 for x in counts) for t in type_ids}
        floor = -1 if kind == "reserves" else 2
    elif kind in ("soft_bounds", "hard_upper_soft_lower"):
        r, rho = per_type("r"), per_type("rho")
        for t in type_ids:
            if rho[t] < r[t]:
                raise ValueError(f"preset {kind}: rho {rho[t]} < r {r[t]} for type {t}")
        alpha = {
            t: tuple(4 if x < r[t] else 2 if x < rho[t] else 0 for x in counts)
            for t in type_ids
        }
        floor = -1 if kind == "soft_bounds" else 2
    elif kind == "flat":
        b = per_type("bonus", default=0)
        alpha = {t: tuple(b[t] for _ in counts) for t in type_ids}
        floor = params.get("floor", 0)
    elif kind == "concave_sqrt":
        w = per_type("weight", default=0)
        alpha = {
            t: tuple(float(w[t]) * (math.sqrt(x + 1) - math.sqrt(x)) for x in counts)
            for t in type_ids
        }
        floor = params.get("floor", 0)
    else:
        raise ValueError(f"unknown preset {kind!r}; expected one of {', '.join(PRESETS)}")

    for t, table in alpha.items():
        if any(table[x + 1] > table[x] for x in range(q)):
            raise ContractError(f"preset {kind}: alpha for type {t} is not non-increasing")
    return alpha, floor


def exact(value) -> Fraction:
    """Parse a decimal string or number into an exact rational."""
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)
