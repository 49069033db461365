"""Reserve, quota and soft-bound rules checked against direct implementations
of the classical definitions they are meant to reproduce."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..choice import check_consistent
from ..core import AuditReport, Instance, Matching, PreferenceProfile, School
from ..priority import AdjustedScoringRule, is_linear, preset_alpha
from .stability import is_c_stable, is_stable, iter_matchings, stability_verdict


def _require_distinct(sigma: Sequence) -> None:
    if len(set(sigma)) != len(sigma):
        raise ValueError("scores must be pairwise distinct")


def reserves_choice(types: Sequence[int], sigma: Sequence, r: Mapping[int, int], q: int):
    """Seat each type's best ``r_t`` applicants first, then the best of the rest."""

    def C(J):
        ranked = sorted(J, key=lambda i: -sigma[i])
        taken = []
        for t in sorted(set(types[i] for i in ranked)):
            taken += [i for i in ranked if types[i] == t][: r.get(t, 0)]
        for i in ranked:
            if len(taken) >= q:
                break
            if i not in taken:
                taken.append(i)
        return frozenset(taken)

    return C


def quotas_choice(types: Sequence[int], sigma: Sequence, r: Mapping[int, int], q: int):
    """Walk applicants by score, skipping any whose type quota ``r_t`` is full."""

    def C(J):
        taken = []
        load: dict[int, int] = {}
        for i in sorted(J, key=lambda i: -sigma[i]):
            if len(taken) >= q:
                break
            t = types[i]
            if load.get(t, 0) < r.get(t, 0):
                taken.append(i)
                load[t] = load.get(t, 0) + 1
        return frozenset(taken)

    return C


def reserves_clauses_hold(C, types, sigma, r, q, J) -> bool:
    """Clauses (i)-(iii) for a choice generated by reserves."""
    chosen = C(J)
    cnt = lambda S, t: sum(1 for x in S if types[x] == t)
    for t in set(types[i] for i in J):
        if cnt(chosen, t) < min(r.get(t, 0), cnt(J, t)):
            return False
    for i in chosen:
        for j in J - chosen:
            if sigma[j] > sigma[i]:
                if types[i] == types[j] or cnt(chosen, types[i]) > r.get(types[i], 0):
                    return False
    return not (J - chosen) or len(chosen) == q


def quotas_clauses_hold(C, types, sigma, r, q, J) -> bool:
    """Clauses (i)-(iii) for a choice generated by quotas."""
    chosen = C(J)
    cnt = lambda S, t: sum(1 for x in S if types[x] == t)
    if any(cnt(chosen, t) > r.get(t, 0) for t in set(types)):
        return False
    for i in chosen:
        for j in J - chosen:
            if sigma[j] > sigma[i]:
                if types[i] == types[j] or cnt(chosen, types[j]) != r.get(types[j], 0):
                    return False
    for i in J - chosen:
        if len(chosen) != q and cnt(chosen, types[i]) != r.get(types[i], 0):
            return False
    return True


def equivalence_reserves_quotas(inst: Instance, P: PreferenceProfile, r: Sequence[Mapping[int, int]], variant: str) -> AuditReport:
    """Rebuild every school's rule from the reserve/quota preset and check that
    the classical choice is consistent with it, that every order is linear,
    and that choice-stability and stability coincide on all matchings.

    ``r[s]`` holds school ``s``'s per-type parameters; scores come from the
    schools' current adjusted-scoring rules.
    """
    if variant not in ("reserves", "quotas"):
        raise ValueError(f"variant must be reserves or quotas, not {variant!r}")
    rep = AuditReport(f"equivalence[{variant}]")
    schools = []
    choices = []
    for s, school in enumerate(inst.schools):
        sigma = school.rule.sigma
        _require_distinct(sigma)
        rs = {t: dict(r[s]).get(t, 0) for t in set(school.types)}
        if variant == "reserves" and sum(rs.values()) > school.capacity:
            raise ValueError(f"school {school.name}: reserves exceed capacity")
        alpha, floor = preset_alpha(variant, {"r": rs}, school.capacity, school.types)
        preset = School(school.name, school.capacity, school.types,
                        AdjustedScoringRule(tuple(sigma), floor, alpha), school.type_labels)
        schools.append(preset)
        make = reserves_choice if variant == "reserves" else quotas_choice
        C = make(school.types, sigma, rs, school.capacity)
        choices.append(C)

        clause_check = reserves_clauses_hold if variant == "reserves" else quotas_clauses_hold
        for J in _all_sets(school.n_students):
            rep.checked += 1
            if not clause_check(C, school.types, sigma, rs, school.capacity, J):
                rep.fail({"school": s, "definition_clause_broken_at": J})

        if not is_linear(preset):
            rep.fail({"school": s, "not_linear": True})
        cons = check_consistent(C, preset)
        rep.checked += cons.checked
        for w in cons.witnesses:
            rep.fail({"school": s, "consistency": w})

    preset_inst = Instance(inst.students, tuple(schools))
    agree = 0
    for m in iter_matchings(preset_inst):
        a, b = is_c_stable(preset_inst, P, choices, m), is_stable(preset_inst, P, m)
        rep.checked += 1
        if a != b:
            rep.fail({"matching": m.assignment, "c_stable": a, "stable": b})
        agree += a
    rep.details["stable_matchings"] = agree
    rep.details["instance"] = preset_inst
    return rep


def fair_under_soft_bounds(inst: Instance, P: PreferenceProfile, m: Matching, sigma, r, rho) -> bool:
    """Direct test of fairness under soft bounds (per-school ``sigma``, ``r``, ``rho``)."""
    for s, school in enumerate(inst.schools):
        members = m.roster[s]
        types, sg, rs, rh = school.types, sigma[s], r[s], rho[s]
        cnt = lambda t: sum(1 for x in members if types[x] == t)
        for i in range(inst.n_students):
            if i in members or not P.prefers(i, s, m.assignment[i]):
                continue
            t = types[i]
            if any(sg[j] < sg[i] for j in members if types[j] == t):
                return False
            c = cnt(t)
            ok_i = c >= rh[t] and all(sg[j] >= sg[i] for j in members if cnt(types[j]) > rh[types[j]])
            ok_ii = (
                rs[t] <= c < rh[t]
                and all(cnt(u) <= rh[u] for u in set(types) if u != t)
                and all(sg[j] >= sg[i] for j in members if rs[types[j]] < cnt(types[j]) <= rh[types[j]])
            )
            ok_iii = c < rs[t] and all(cnt(types[j]) <= rs[types[j]] and sg[j] >= sg[i] for j in members)
            if not (ok_i or ok_ii or ok_iii):
                return False
    return True


def equivalence_soft_bounds(inst: Instance, P: PreferenceProfile, r: Sequence[Mapping[int, int]], rho: Sequence[Mapping[int, int]]) -> AuditReport:
    """Compare the soft-bound preset's fairness verdict with the direct
    definition on every feasible matching."""
    rep = AuditReport("equivalence[soft_bounds]")
    schools = []
    sigmas = []
    full_r, full_rho = [], []
    for s, school in enumerate(inst.schools):
        rs = {t: dict(r[s]).get(t, 0) for t in set(school.types)}
        rh = {t: dict(rho[s]).get(t, 0) for t in set(school.types)}
        full_r.append(rs)
        full_rho.append(rh)
        if sum(rs.values()) > school.capacity:
            raise ValueError(f"school {school.name}: lower bounds exceed capacity")
        alpha, floor = preset_alpha("soft_bounds", {"r": rs, "rho": rh}, school.capacity, school.types)
        sigma = tuple(school.rule.sigma)
        sigmas.append(sigma)
        schools.append(School(school.name, school.capacity, school.types,
                              AdjustedScoringRule(sigma, floor, alpha), school.type_labels))
    preset_inst = Instance(inst.students, tuple(schools))
    for m in iter_matchings(preset_inst):
        rep.checked += 1
        a = stability_verdict(preset_inst, P, m).fair
        b = fair_under_soft_bounds(preset_inst, P, m, sigmas, full_r, full_rho)
        if a != b:
            rep.fail({"matching": m.assignment, "fair": a, "fair_under_soft_bounds": b})
    return rep


def _all_sets(n: int):
    from ..priority import subsets_upto

    return subsets_upto(n, n)
