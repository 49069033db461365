"""Seeded random instances for property audits and benchmarks."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .core import Instance, PreferenceProfile, School
from .priority import AdjustedScoringRule, preset_alpha

LABELS = ("A", "B", "C", "D", "E")
COARSE = tuple(Fraction(k, 4) for k in range(5))


def random_alpha(rng: random.Random, q: int, integral: bool = False) -> tuple:
    """A non-increasing bonus table on counts ``0..q``."""
    top = rng.randint(0, 4)
    vals = [top]
    for _ in range(q):
        vals.append(vals[-1] - rng.choice((0, 0, 1, 2)))
    if integral:
        return tuple(vals)
    return tuple(Fraction(v, 2) for v in vals)


def random_sigma(rng: random.Random, n: int, linear: bool) -> tuple:
    if linear:
        # distinct k/997: no sum with an integer bonus can tie another or a half-integer floor
        return tuple(Fraction(k, 997) for k in rng.sample(range(1, 997), n))
    return tuple(rng.choice(COARSE) for _ in range(n))


def random_school(rng: random.Random, name: str, n: int, q: int, n_types: int, linear: bool = False) -> School:
    types = tuple(rng.randint(1, n_types) for _ in range(n))
    sigma = random_sigma(rng, n, linear)
    alpha = {t: random_alpha(rng, q, integral=linear) for t in range(1, n_types + 1)}
    if linear:
        floor = Fraction(2 * rng.randint(-2, 2) + 1, 2)
    else:
        floor = rng.choice((Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1)))
    return School(name, q, types, AdjustedScoringRule(sigma, floor, alpha), LABELS[:n_types])


def random_preferences(rng: random.Random, n: int, k: int, p_accept: float = 0.8) -> PreferenceProfile:
    lists = []
    for _ in range(n):
        lst = [s for s in range(k) if rng.random() < p_accept]
        rng.shuffle(lst)
        lists.append(tuple(lst))
    return PreferenceProfile(tuple(lists))


def random_instance(
    seed: int,
    n_students: Optional[int] = None,
    n_schools: Optional[int] = None,
    max_students: int = 8,
    max_schools: int = 3,
    max_types: int = 3,
    max_capacity: int = 4,
    linear: bool = False,
) -> tuple[Instance, PreferenceProfile]:
    """Adjusted-scoring instance with random types, scores, bonuses and preferences.

    Default scores come from a coarse grid so ties are common; ``linear``
    draws distinct scores and integral bonuses so no two adjusted scores
    (or a score and the threshold) ever coincide.
    """
    rng = random.Random(seed)
    n = n_students or rng.randint(2, max_students)
    k = n_schools or rng.randint(1, max_schools)
    n_types = rng.randint(1, max_types)
    students = tuple(str(i + 1) for i in range(n))
    schools = tuple(
        random_school(rng, f"s{j + 1}", n, rng.randint(1, max_capacity), n_types, linear)
        for j in range(k)
    )
    return Instance(students, schools), random_preferences(rng, n, k)


def random_preset_instance(
    seed: int,
    preset: str,
    n_students: int = 5,
    n_schools: int = 2,
    max_capacity: int = 3,
    n_types: int = 2,
) -> tuple[Instance, PreferenceProfile, list, list]:
    """Instance whose schools use a reserve/quota/soft-bound preset.

    Scores are distinct.  Returns the instance, preferences and per-school
    ``r`` and ``rho`` dicts keyed by type id.
    """
    rng = random.Random(seed)
    students = tuple(str(i + 1) for i in range(n_students))
    schools, rs, rhos = [], [], []
    for j in range(n_schools):
        q = rng.randint(1, max_capacity)
        types = tuple(rng.randint(1, n_types) for _ in range(n_students))
        sigma = tuple(Fraction(k, 97) for k in rng.sample(range(1, 97), n_students))
        r: dict[int, int] = {}
        left = q
        for t in range(1, n_types + 1):
            r[t] = rng.randint(0, left if preset != "quotas" else q)
            if preset != "quotas":
                left -= r[t]
        rho = {t: r[t] + rng.randint(0, 2) for t in r}
        alpha, floor = preset_alpha(preset, {"r": r, "rho": rho}, q, range(1, n_types + 1))
        schools.append(School(f"s{j + 1}", q, types, AdjustedScoringRule(sigma, floor, alpha), LABELS[:n_types]))
        rs.append(r)
        rhos.append(rho)
    return Instance(students, tuple(schools)), random_preferences(rng, n_students, n_schools), rs, rhos
