import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from divchoice.choice import TableChoice, choice_functions
from divchoice.core import AxiomViolation, ContractError, Instance, Matching, PreferenceProfile, School
from divchoice.generators import random_instance, random_preferences
from divchoice.mechanism import phi_bar, spda
from divchoice.priority import AdjustedScoringRule
from divchoice.verify import is_stable
from helpers import ids, roster


def textbook_da(n, caps, P, score, floor):
    """Gale-Shapley with responsive strict priorities, proposals in rounds."""
    nxt = [0] * n
    held = [[] for _ in caps]
    free = list(range(n))
    while free:
        i = free.pop(0)
        while nxt[i] < len(P[i]):
            s = P[i][nxt[i]]
            nxt[i] += 1
            if score[s][i] < floor[s]:
                continue
            held[s].append(i)
            held[s].sort(key=lambda x: -score[s][x])
            if len(held[s]) > caps[s]:
                out = held[s].pop()
                if out == i:
                    continue
                free.append(out)
            break
    return [frozenset(h) for h in held]


def test_example2_phi_bar(ex2):
    inst, P = ex2
    m, tr = phi_bar(inst, P, trace=True)
    assert m == roster(inst, ("2", "3"), ("4",))
    assert m.assignment[inst.student_index("1")] is None
    for r in tr.rounds:
        assert r.after <= r.before | {r.proposer}
    assert m == phi_bar(inst, P)[0]


def test_example1_refused_with_dc_witness(ex1):
    inst, P = ex1
    with pytest.raises(AxiomViolation, match="DC") as e:
        phi_bar(inst, P)
    assert not e.value.report.details["DC"].passed


def test_everyone_unacceptable_gives_empty_matching(ex2):
    inst, _ = ex2
    m, tr = phi_bar(inst, PreferenceProfile(((),) * 4), trace=True)
    assert m == Matching.empty(4, 2) and len(tr) == 0


def test_single_proposal():
    sc = School("s", 1, (1,), AdjustedScoringRule((1,), 0, {1: (0, 0)}))
    inst = Instance(("i",), (sc,))
    m, tr = phi_bar(inst, PreferenceProfile(((0,),)), trace=True)
    assert m.assignment == (0,) and len(tr) == 1


def test_contract_failure_on_bad_choice(ex2):
    inst, P = ex2
    bad = TableChoice({(3,): (0, 3)})
    with pytest.raises(ContractError):
        spda(inst, P, [bad, bad])


@pytest.mark.parametrize("seed", range(30))
def test_matches_textbook_da_for_responsive_scores(seed):
    rng = random.Random(seed)
    n, k = rng.randint(2, 8), rng.randint(1, 3)
    schools, score, floor = [], [], []
    for s in range(k):
        sigma = tuple(Fraction(x, 97) for x in rng.sample(range(97), n))
        f = Fraction(rng.randint(0, 40), 97) + Fraction(1, 194)
        q = rng.randint(1, 3)
        schools.append(School(f"s{s}", q, (1,) * n, AdjustedScoringRule(sigma, f, {1: (0,) * (q + 1)})))
        score.append(sigma)
        floor.append(f)
    inst = Instance(tuple(map(str, range(n))), tuple(schools))
    P = random_preferences(rng, n, k)
    m, _ = phi_bar(inst, P)
    assert list(m.roster) == textbook_da(n, [s.capacity for s in schools], P.lists, score, floor)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_proposal_order_independence(seed):
    inst, P = random_instance(seed, max_students=5)
    C = choice_functions(inst)
    base = spda(inst, P, C)[0]
    for perm in itertools.islice(itertools.permutations(range(inst.n_students)), 24):
        pick = lambda eligible, perm=perm: min(eligible, key=perm.index)
        assert spda(inst, P, C, pick=pick)[0] == base


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_phi_bar_stable_and_terminates(seed):
    inst, P = random_instance(seed)
    m, tr = phi_bar(inst, P, trace=True)
    assert is_stable(inst, P, m)
    assert len(tr) <= inst.n_students * inst.n_schools
    assert phi_bar(inst, P, trace=False)[0] == m
