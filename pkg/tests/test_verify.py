import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from divchoice.choice import choice_functions
from divchoice.core import ContractError, pareto_dominates, Instance, Matching, PreferenceProfile, School
from divchoice.generators import random_instance, random_preset_instance
from divchoice.mechanism import phi_bar, spda
from divchoice.priority import AdjustedScoringRule, Rank, is_linear
from divchoice.verify import (
    ObjectiveSpec,
    SlotPriorities,
    SlotScenario,
    default_slot_scenario,
    audit_slot_impossibility,
    audit_strategy_proofness,
    c_stability_witnesses,
    enumerate_stable,
    equivalence_reserves_quotas,
    equivalence_soft_bounds,
    fair_under_soft_bounds,
    is_c_stable,
    is_stable,
    iter_matchings,
    optimal_choice_oracle,
    quotas_choice,
    reserves_choice,
    slot_specific_choose,
    stability_verdict,
    student_optimal_stable,
)
from helpers import broken_market, ids, roster, tie_counterexample


def one_school(n, q, sigma=None, floor=-1):
    sigma = sigma or (1,) * n
    return Instance(tuple(str(i + 1) for i in range(n)),
                    (School("s", q, (1,) * n, AdjustedScoringRule(sigma, floor, {1: (0,) * (q + 1)})),))


# stability taxonomy

def test_example1_envy_witness(ex1):
    inst, P = ex1
    v = stability_verdict(inst, P, roster(inst, ("1", "2")))
    assert not v.fair and (2, 0, 0) in v.envy


def test_example2_phi_is_stable(ex2):
    inst, P = ex2
    assert stability_verdict(inst, P, phi_bar(inst, P)[0]).stable


def test_empty_matching_is_wasteful():
    inst = one_school(2, 2)
    v = stability_verdict(inst, PreferenceProfile(((0,), (0,))), Matching.empty(2, 1))
    assert not v.non_wasteful and v.individually_rational and not v.stable


def test_unacceptable_seat_is_irrational():
    inst = one_school(1, 1)
    v = stability_verdict(inst, PreferenceProfile(((),)), Matching.from_assignment([0], 1))
    assert not v.individually_rational


def test_c_stability_counterexample():
    inst, C = tie_counterexample()
    P = PreferenceProfile(((0,), (0,)))
    m = Matching.from_assignment([0, None], 1)
    assert is_stable(inst, P, m)
    assert not is_c_stable(inst, P, [C], m)
    assert ("blocking", 1, 0) in c_stability_witnesses(inst, P, [C], m)


def test_phi_bar_is_c_stable(ex2):
    inst, P = ex2
    C = choice_functions(inst)
    assert is_c_stable(inst, P, C, spda(inst, P, C)[0])


def test_all_unacceptable_empty_matching_c_stable(ex2):
    inst, _ = ex2
    assert is_c_stable(inst, PreferenceProfile(((),) * 4), choice_functions(inst), Matching.empty(4, 2))


# enumeration

def test_example1_has_no_stable_matching(ex1):
    assert enumerate_stable(*ex1) == []


def test_example2_stable_set(ex2):
    inst, P = ex2
    stable = enumerate_stable(inst, P)
    phi = roster(inst, ("2", "3"), ("4",))
    better = roster(inst, ("3", "4"), ("2",))
    assert phi in stable and better in stable
    assert student_optimal_stable(inst, P, stable) == [better]


def test_example2_matching_with_student1_at_s_prime_is_unstable(ex2):
    # the alternative with student 1 seated at s' leaves 2 envying 1
    inst, P = ex2
    literal = roster(inst, ("3", "4"), ("1",))
    v = stability_verdict(inst, P, literal)
    assert not v.stable
    assert (inst.student_index("2"), inst.student_index("1"), 1) in v.envy
    phi = roster(inst, ("2", "3"), ("4",))
    assert not pareto_dominates(P, literal, phi)


def test_single_pair_enumeration():
    inst = one_school(1, 1)
    P = PreferenceProfile(((0,),))
    assert enumerate_stable(inst, P) == [Matching.from_assignment([0], 1)]
    assert student_optimal_stable(inst, P) == [Matching.from_assignment([0], 1)]


def test_enumeration_guard():
    inst = one_school(9, 1)
    with pytest.raises(ContractError, match="enumeration guard"):
        enumerate_stable(inst, PreferenceProfile(((0,),) * 9))


def brute_matchings(inst):
    for a in itertools.product([None] + list(range(inst.n_schools)), repeat=inst.n_students):
        m = Matching.from_assignment(a, inst.n_schools)
        if all(len(m.roster[s]) <= inst.capacity(s) for s in range(inst.n_schools)):
            yield m


@pytest.mark.parametrize("seed", range(10))
def test_iter_matchings_matches_naive_product(seed):
    inst, P = random_instance(seed, max_students=5)
    assert set(iter_matchings(inst)) == set(brute_matchings(inst))
    stable = {m for m in brute_matchings(inst) if is_stable(inst, P, m)}
    assert set(enumerate_stable(inst, P)) == stable


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_c_stable_implies_stable(seed):
    inst, P = random_instance(seed, max_students=5)
    C = choice_functions(inst)
    for m in iter_matchings(inst):
        if is_c_stable(inst, P, C, m):
            assert is_stable(inst, P, m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_linear_priorities_optimal_and_stability_notions_agree(seed):
    inst, P = random_instance(seed, max_students=6, linear=True)
    assert all(is_linear(s) for s in inst.schools)
    C = choice_functions(inst)
    m = spda(inst, P, C)[0]
    assert m in student_optimal_stable(inst, P)
    for mm in iter_matchings(inst):
        assert is_c_stable(inst, P, C, mm) == is_stable(inst, P, mm)


# strategy-proofness

def test_example2_unilateral_audit(ex2):
    assert audit_strategy_proofness(*ex2, max_group=1)


def test_single_student_single_school_audit():
    inst = one_school(1, 1)
    rep = audit_strategy_proofness(inst, PreferenceProfile(((0,),)), max_group=1)
    assert rep and rep.checked == 1


def test_broken_mechanism_has_profitable_misreport():
    inst, C = broken_market()
    mech = lambda Q: spda(inst, Q, C)[0]
    found = None
    menu = [(), (0,), (1,), (0, 1), (1, 0)]
    for lists in itertools.product(menu, repeat=3):
        rep = audit_strategy_proofness(inst, PreferenceProfile(lists), max_group=1, mechanism=mech, max_witnesses=1)
        if not rep:
            found = (lists, rep.witnesses[0])
            break
    assert found is not None
    lists, w = found
    (i,) = w["group"]
    before, after = w["gains"][i]
    assert PreferenceProfile(lists).prefers(i, after, before)


def test_strategy_audit_guard():
    inst = Instance(("1",), tuple(
        School(f"s{k}", 1, (1,), AdjustedScoringRule((1,), -1, {1: (0, 0)})) for k in range(4)))
    with pytest.raises(ContractError):
        audit_strategy_proofness(inst, PreferenceProfile(((0,),)))


# rule equivalences

def test_reserves_and_quotas_choice_examples():
    types, sigma = (1, 1, 2, 2), (Fraction(9, 10), Fraction(8, 10), Fraction(7, 10), Fraction(1, 10))
    assert reserves_choice(types, sigma, {2: 1}, 2)(frozenset(range(4))) == {0, 2}
    assert quotas_choice(types, sigma, {1: 1, 2: 2}, 2)(frozenset(range(4))) == {0, 2}
    assert quotas_choice(types, sigma, {1: 2, 2: 0}, 3)(frozenset(range(4))) == {0, 1}


@pytest.mark.parametrize("variant", ["reserves", "quotas"])
@pytest.mark.parametrize("seed", range(8))
def test_reserve_quota_equivalence(variant, seed):
    inst, P, r, _ = random_preset_instance(seed, variant)
    rep = equivalence_reserves_quotas(inst, P, r, variant)
    assert rep, rep.witnesses[:3]


@pytest.mark.parametrize("variant", ["reserves", "quotas"])
def test_large_bounds_collapse_to_score_order(variant):
    inst, P, _, _ = random_preset_instance(3, variant, n_students=4)
    big = [{1: 9, 2: 9}] * inst.n_schools
    if variant == "reserves":
        with pytest.raises(ValueError):
            equivalence_reserves_quotas(inst, P, big, variant)
        return
    rep = equivalence_reserves_quotas(inst, P, big, variant)
    assert rep
    sc = rep.details["instance"].schools[0]
    sigma = sc.rule.sigma
    for i, j in itertools.permutations(range(4), 2):
        want = Rank.HIGHER if sigma[i] > sigma[j] else Rank.LOWER
        assert sc.compare(frozenset(), i, j) is want


def test_equivalence_rejects_tied_scores():
    inst = one_school(2, 1)
    with pytest.raises(ValueError, match="distinct"):
        equivalence_reserves_quotas(inst, PreferenceProfile(((0,), (0,))), [{1: 1}], "reserves")


@pytest.mark.parametrize("seed", range(8))
def test_soft_bounds_equivalence(seed):
    inst, P, r, rho = random_preset_instance(seed, "soft_bounds")
    assert equivalence_soft_bounds(inst, P, r, rho)
    assert equivalence_soft_bounds(inst, P, r, r)


def test_soft_bounds_overfill_is_unfair():
    # two type-1 students seated beyond rho=1 while a better type-2 student waits
    sigma = (Fraction(1, 2), Fraction(2, 5), Fraction(9, 10))
    from divchoice.priority import preset_alpha

    alpha, floor = preset_alpha("soft_bounds", {"r": {1: 0, 2: 0}, "rho": {1: 1, 2: 1}}, 2, [1, 2])
    inst = Instance(("1", "2", "3"), (School("s", 2, (1, 1, 2), AdjustedScoringRule(sigma, floor, alpha)),))
    P = PreferenceProfile(((0,), (0,), (0,)))
    m = Matching.from_assignment([0, 0, None], 1)
    assert not stability_verdict(inst, P, m).fair
    assert not fair_under_soft_bounds(inst, P, m, [sigma], [{1: 0, 2: 0}], [{1: 1, 2: 1}])


# objective and slot priorities

def example3_objective(s6):
    sigma = {1: 0.8, 2: 0.8, 3: 0.7, 4: 0.6, 5: 0.5, 6: s6}
    return ObjectiveSpec(sigma, frozenset({5, 6}))


@pytest.mark.parametrize("s6,want", [(0.5, {1, 2, 3, 5, 6}), (0.3, {1, 2, 3, 4, 5})])
def test_example3_optimum(s6, want):
    assert optimal_choice_oracle(example3_objective(s6), range(1, 7), 5) == want


def test_oracle_limit():
    with pytest.raises(ValueError):
        optimal_choice_oracle(example3_objective(0.5), range(21), 2)


def test_slot_scenario_case4_optimum():
    sc = default_slot_scenario()
    assert optimal_choice_oracle(sc.objective, {3, 4, 5}, 2) == {4, 5}


def test_example3_bridge(ex3):
    """With the concave bonus, ranking a B above an A agrees with the objective."""
    inst, _ = ex3
    import dataclasses
    from divchoice.priority import subsets_upto

    for s6 in ("0.30", "0.38", "0.42", "0.50"):
        sc = inst.schools[0]
        sigma = list(sc.rule.sigma)
        sigma[5] = Fraction(s6)
        sc = dataclasses.replace(sc, rule=dataclasses.replace(sc.rule, sigma=tuple(sigma)))
        obj = ObjectiveSpec({k: float(v) for k, v in enumerate(sigma)}, frozenset({4, 5}))
        for J in subsets_upto(6, sc.capacity - 1):
            for i in (4, 5):
                for j in range(4):
                    if i in J or j in J:
                        continue
                    higher = sc.compare(J, i, j) is Rank.HIGHER
                    assert higher == (obj.value(J | {i}) > obj.value(J | {j}) + 1e-9)


def test_slot_choose_examples():
    score_order = (1, 2, 3, 4, 5, 6)
    same = SlotPriorities((score_order, score_order))
    assert slot_specific_choose(same, {1, 2, 3}) == {1, 2}
    assert slot_specific_choose(same, set()) == set()
    case1 = SlotPriorities(((1, 6, 3, 2, 4, 5), (6, 3, 1, 2, 4, 5)))
    assert slot_specific_choose(case1, {1, 3, 6}) == {1, 6}
    with pytest.raises(ValueError):
        SlotPriorities(((1, 1),))


def slot_oracle_count(scenario, cases):
    """Naive count: run the seat-filling choice for every pair of orders."""
    perms = list(itertools.permutations(scenario.students))
    optima = [optimal_choice_oracle(scenario.objective, scenario.cases[c], 2) for c in cases]
    hits = 0
    for a in perms:
        for b in perms:
            slots = SlotPriorities((a, b))
            if all(slot_specific_choose(slots, scenario.cases[c]) == o for c, o in zip(cases, optima)):
                hits += 1
    return hits


def test_slot_search_matches_naive_count_on_small_scenario():
    full = default_slot_scenario()
    sigma = {k: full.objective.sigma[k] for k in (1, 3, 4, 6)}
    small = SlotScenario((1, 3, 4, 6), ObjectiveSpec(sigma, frozenset({4, 6})), 2,
                         (frozenset({1, 3, 6}), frozenset({3, 4, 6})))
    for cases in ([0], [1], [0, 1]):
        assert audit_slot_impossibility(small, cases).satisfying_pairs == slot_oracle_count(small, cases)


def test_slot_scenario_first_three_cases_satisfiable():
    res = audit_slot_impossibility(cases=[0, 1, 2])
    assert res.satisfying_pairs > 0 and not res.report.passed
