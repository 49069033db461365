"""Shared builders for tests."""

import itertools

from divchoice.choice import TableChoice
from divchoice.core import Instance, Matching, School
from divchoice.priority import TablePriorityRule, subsets_upto


def ids(inst, *names):
    return frozenset(inst.student_index(x) for x in names)


def roster(inst, *groups):
    return Matching.from_roster([ids(inst, *g) for g in groups], inst.n_students)


def indifferent_school(name, n, q, types=None):
    """Every student and the outside option tied at every J (rule never consulted by tables)."""
    orders = {J: (frozenset(set(range(n)) - J | {None}),) for J in subsets_upto(n, q - 1)}
    return School(name, q, types or (1,) * n, TablePriorityRule(orders))


def strict_table(n, q, order, types=None, name="s"):
    """Responsive strict priority ``order`` (best first), outside option last."""
    orders = {
        J: tuple(frozenset({x}) for x in order if x not in J) + (frozenset({None}),)
        for J in subsets_upto(n, q - 1)
    }
    return School(name, q, types or (1,) * n, TablePriorityRule(orders))


def responsive(order, q):
    return lambda J: frozenset(sorted(J, key=list(order).index)[:q])


def broken_market():
    """Capacity-2 school whose table choice drops 1 from {1,2} yet keeps it from {1,2,3}."""
    table = TableChoice({
        (0,): (0,), (1,): (1,), (2,): (2,),
        (0, 1): (1,), (0, 2): (0, 2), (1, 2): (2,),
        (0, 1, 2): (0, 1),
    })
    inst = Instance(("1", "2", "3"), (indifferent_school("a", 3, 2), indifferent_school("b", 3, 1)))
    return inst, [table, responsive((1, 2, 0), 1)]


def tie_counterexample():
    """Two students tied at a one-seat school; the choice always keeps student 2."""
    orders = {frozenset(): (frozenset({0, 1}), frozenset({None}))}
    inst = Instance(("1", "2"), (School("s", 1, (1, 2), TablePriorityRule(orders)),))
    C = TableChoice({(0,): (0,), (1,): (1,), (0, 1): (1,)})
    return inst, C


def nonsubstitutable_counterexample():
    """Three singleton types, one seat, 1 ~ 2 > 3 at the empty set."""
    orders = {frozenset(): (frozenset({0, 1}), frozenset({2}), frozenset({None}))}
    school = School("s", 1, (1, 2, 3), TablePriorityRule(orders))
    table = {(i,): (i,) for i in range(3)}
    table.update({(0, 1): (0,), (0, 2): (0,), (1, 2): (1,), (0, 1, 2): (1,)})
    return school, TableChoice(table)


def all_sets(n):
    return list(subsets_upto(n, n))


def pairs(n):
    return itertools.permutations(range(n), 2)
