"""JSON documents for instances and reports.

Instance document (``schema_version`` 1)::

    {
      "schema_version": 1,
      "students": [{"id": "1", "type": "A", "score": "0.8"}, ...],
      "schools": [
        {"id": "s", "capacity": 2, "type_order": ["A", "B"],
         "rule": {"adjusted_scoring": {"alpha": {"A": ["0", "0", "0"]}, "sigma_floor": "-1"}}},
        {"id": "t", "capacity": 1,
         "rule": {"priority_table": [{"J": [], "order": [["1", "2"], ["3"], [null]]}]}}
      ],
      "preferences": {"1": ["s", "t"], ...}
    }

``type`` and ``score`` may be a single value or an object keyed by school id.
An adjusted-scoring rule gives either ``alpha`` or ``preset`` plus ``params``
(per-type parameter objects); ``sigma_floor`` overrides the preset threshold.
Scores written as strings are read as exact rationals; JSON floats stay floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Optional

from .core import Instance, InstanceError, Matching, PreferenceProfile, School, natural_key
from .priority import AdjustedScoringRule, PRESETS, TablePriorityRule, preset_alpha, subsets_upto

SCHEMA_VERSION = 1


class DocumentError(InstanceError):
    """User input fault in a document (syntax or semantics)."""


class DocumentSyntaxError(DocumentError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


class DocumentSemanticError(DocumentError):
    def __init__(self, invariant: str, where: str, msg: str):
        super().__init__(f"{invariant} ({where}): {msg}")
        self.invariant, self.where = invariant, where


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(e.msg, e.lineno, e.colno) from None


def number(v, where: str):
    """Decimal string or integer to ``Fraction``; JSON floats pass through."""
    if isinstance(v, bool):
        raise DocumentSemanticError("numeric value", where, f"expected a number, got {v!r}")
    if isinstance(v, float):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise DocumentSemanticError("numeric value", where, f"cannot read {v!r} as a number")


def format_number(v):
    if isinstance(v, float):
        return v
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        # terminating decimal: write it exactly
        digits = 0
        x = v
        while x.denominator != 1:
            x *= 10
            digits += 1
        s = f"{abs(x.numerator):0{digits + 1}d}"
        return ("-" if v < 0 else "") + s[:-digits] + "." + s[-digits:]
    return f"{v.numerator}/{v.denominator}"


def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise DocumentSemanticError("required field", where, f"missing {key!r}")
    return obj[key]


def _per_school(value, school: str, where: str):
    if isinstance(value, dict):
        if school not in value:
            raise DocumentSemanticError("total type/score map", where, f"no entry for school {school!r}")
        return value[school]
    return value


def parse_instance(text: str) -> tuple[Instance, PreferenceProfile]:
    return instance_from_dict(_loads(text))


def instance_from_dict(doc: dict) -> tuple[Instance, PreferenceProfile]:
    if not isinstance(doc, dict):
        raise DocumentSemanticError("document shape", "root", "expected an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentSemanticError("schema version", "schema_version", f"unsupported version {version!r}")
    students = _need(doc, "students", "root")
    schools = _need(doc, "schools", "root")
    ids = []
    for k, st in enumerate(students):
        sid = _need(st, "id", f"students[{k}]")
        ids.append(str(sid))
    if len(set(ids)) != len(ids):
        dup = next(x for x in ids if ids.count(x) > 1)
        raise DocumentSemanticError("unique ids", f"student {dup}", "declared twice")
    school_ids = [str(_need(sc, "id", f"schools[{k}]")) for k, sc in enumerate(schools)]
    if len(set(school_ids)) != len(school_ids):
        dup = next(x for x in school_ids if school_ids.count(x) > 1)
        raise DocumentSemanticError("unique ids", f"school {dup}", "declared twice")
    for x in set(ids) & set(school_ids):
        raise DocumentSemanticError("unique ids", f"id {x}", "used for a student and a school")

    built = []
    for sc, name in zip(schools, school_ids):
        built.append(_parse_school(sc, name, students, ids))
    try:
        inst = Instance(tuple(ids), tuple(built))
    except InstanceError as e:
        raise DocumentSemanticError("instance", "root", str(e)) from None

    prefs = doc.get("preferences", {})
    if not isinstance(prefs, dict):
        raise DocumentSemanticError("document shape", "preferences", "expected an object keyed by student id")
    lists = []
    for sid in ids:
        lst = prefs.get(sid, [])
        out = []
        for s in lst:
            if str(s) not in school_ids:
                raise DocumentSemanticError("referential integrity", f"preferences of {sid}", f"undeclared school {s!r}")
            if school_ids.index(str(s)) in out:
                raise DocumentSemanticError("strict preferences", f"preferences of {sid}", f"school {s!r} listed twice")
            out.append(school_ids.index(str(s)))
        lists.append(tuple(out))
    for sid in prefs:
        if sid not in ids:
            raise DocumentSemanticError("referential integrity", "preferences", f"undeclared student {sid!r}")
    return inst, PreferenceProfile(tuple(lists))


def _parse_school(sc: dict, name: str, students: list, ids: list) -> School:
    where = f"school {name}"
    q = _need(sc, "capacity", where)
    if not isinstance(q, int) or isinstance(q, bool) or q < 1:
        raise DocumentSemanticError("positive capacity", where, f"capacity {q!r}")
    labels = [str(_per_school(_need(st, "type", f"student {sid}"), name, f"student {sid}"))
              for st, sid in zip(students, ids)]
    order = [str(x) for x in sc.get("type_order", [])]
    for lab in sorted(set(labels) - set(order), key=natural_key):
        order.append(lab)
    tid = {lab: k + 1 for k, lab in enumerate(order)}
    types = tuple(tid[lab] for lab in labels)

    rule_doc = _need(sc, "rule", where)
    if not isinstance(rule_doc, dict) or len(rule_doc) != 1:
        raise DocumentSemanticError("single rule", where, "rule must hold exactly one of adjusted_scoring, priority_table")
    (kind, body), = rule_doc.items()
    if kind == "adjusted_scoring":
        rule = _parse_scoring(body, name, q, students, ids, tid)
    elif kind == "priority_table":
        rule = _parse_table(body, name, q, ids)
    else:
        raise DocumentSemanticError("single rule", where, f"unknown rule kind {kind!r}")
    try:
        return School(name, q, types, rule, tuple(order))
    except InstanceError as e:
        raise DocumentSemanticError("rule validity", where, str(e)) from None


def _parse_scoring(body: dict, name: str, q: int, students, ids, tid) -> AdjustedScoringRule:
    where = f"school {name}"
    sigma = tuple(
        number(_per_school(_need(st, "score", f"student {sid}"), name, f"student {sid}"), f"score of student {sid}")
        for st, sid in zip(students, ids)
    )
    for sid, v in zip(ids, sigma):
        if not 0 <= v <= 1:
            raise DocumentSemanticError("score in [0,1]", f"student {sid} at {name}", f"score {v}")
    if "alpha" in body and "preset" in body:
        raise DocumentSemanticError("single rule", where, "give alpha or preset, not both")
    if "preset" in body:
        kind = body["preset"]
        if kind not in PRESETS:
            raise DocumentSemanticError("known preset", where, f"unknown preset {kind!r}")
        params = {}
        for pname, per in body.get("params", {}).items():
            if isinstance(per, dict):
                unknown = set(map(str, per)) - set(tid)
                if unknown:
                    raise DocumentSemanticError("referential integrity", where,
                                                f"params.{pname} names unknown type {sorted(unknown)[0]!r}")
                params[pname] = {tid[str(t)]: _preset_param(v, f"{where} params.{pname}") for t, v in per.items()}
            else:
                params[pname] = _preset_param(per, f"{where} params.{pname}")
        try:
            alpha, floor = preset_alpha(kind, params, q, tid.values())
        except ValueError as e:
            raise DocumentSemanticError("preset parameters", where, str(e)) from None
        if "sigma_floor" in body:
            floor = number(body["sigma_floor"], f"{where} sigma_floor")
        return AdjustedScoringRule(sigma, floor, alpha)

    alpha_doc = _need(body, "alpha", where)
    floor = number(_need(body, "sigma_floor", where), f"{where} sigma_floor")
    alpha = {}
    for lab, t in tid.items():
        if lab not in alpha_doc:
            raise DocumentSemanticError("alpha coverage", where, f"no alpha table for type {lab!r}")
        table = tuple(number(v, f"{where} alpha[{lab}]") for v in alpha_doc[lab])
        if len(table) < q + 1:
            raise DocumentSemanticError("alpha coverage", f"{where} type {lab}",
                                        f"table covers counts 0..{len(table) - 1}, need 0..{q}")
        for x in range(len(table) - 1):
            if table[x + 1] > table[x]:
                raise DocumentSemanticError(
                    "non-increasing alpha", f"{where} type {lab}",
                    f"alpha increases from count {x} to count {x + 1} ({table[x]} < {table[x + 1]})",
                )
        alpha[t] = table
    for lab in alpha_doc:
        if lab not in tid:
            raise DocumentSemanticError("referential integrity", where, f"alpha for unknown type {lab!r}")
    return AdjustedScoringRule(sigma, floor, alpha)


def _preset_param(v, where):
    n = number(v, where)
    if isinstance(n, Fraction) and n.denominator == 1:
        return int(n)
    return n


def _parse_table(body: list, name: str, q: int, ids: list) -> TablePriorityRule:
    where = f"school {name}"
    pos = {sid: k for k, sid in enumerate(ids)}

    def idx(x, at):
        if x is None:
            return None
        if str(x) not in pos:
            raise DocumentSemanticError("referential integrity", at, f"undeclared student {x!r}")
        return pos[str(x)]

    orders = {}
    for k, entry in enumerate(body):
        at = f"{where} priority_table[{k}]"
        J = frozenset(idx(x, at) for x in _need(entry, "J", at))
        if None in J:
            raise DocumentSemanticError("table keys", at, "J lists only students")
        if J in orders:
            raise DocumentSemanticError("table keys", at, f"J={sorted(map(str, _need(entry, 'J', at)))} given twice")
        orders[J] = tuple(frozenset(idx(x, at) for x in cls) for cls in _need(entry, "order", at))
    for J in subsets_upto(len(ids), q - 1):
        if J not in orders:
            key = sorted((ids[i] for i in J), key=natural_key)
            raise DocumentSemanticError("complete priority table", where, f"missing order for J={key}")
    try:
        return TablePriorityRule(orders)
    except InstanceError as e:
        raise DocumentSemanticError("weak order per J", where, str(e)) from None


def instance_to_dict(inst: Instance, P: Optional[PreferenceProfile] = None) -> dict:
    students = []
    for i, sid in enumerate(inst.students):
        types = {sc.name: _label(sc, sc.types[i]) for sc in inst.schools}
        entry: dict[str, Any] = {"id": sid}
        entry["type"] = _collapse(types)
        scores = {sc.name: format_number(sc.rule.sigma[i]) for sc in inst.schools
                  if isinstance(sc.rule, AdjustedScoringRule)}
        if scores:
            entry["score"] = _collapse(scores) if len(scores) == inst.n_schools else scores
        students.append(entry)
    schools = []
    for sc in inst.schools:
        order = list(sc.type_labels) or [str(t) for t in range(1, max(sc.types, default=0) + 1)]
        d: dict[str, Any] = {"id": sc.name, "capacity": sc.capacity, "type_order": order}
        if isinstance(sc.rule, AdjustedScoringRule):
            d["rule"] = {"adjusted_scoring": {
                "alpha": {_label(sc, t): [format_number(v) for v in table] for t, table in sorted(sc.rule.alpha.items())},
                "sigma_floor": format_number(sc.rule.sigma_floor),
            }}
        elif isinstance(sc.rule, TablePriorityRule):
            rows = []
            for J in sorted(sc.rule.orders, key=lambda J: (len(J), sorted(natural_key(inst.students[i]) for i in J))):
                rows.append({
                    "J": inst.names(J),
                    "order": [
                        sorted((None if x is None else inst.students[x] for x in cls),
                               key=lambda v: (v is None, natural_key(v) if v else ()))
                        for cls in sc.rule.orders[J]
                    ],
                })
            d["rule"] = {"priority_table": rows}
        else:
            raise TypeError(f"cannot serialize rule {type(sc.rule).__name__}")
        schools.append(d)
    doc = {"schema_version": SCHEMA_VERSION, "students": students, "schools": schools}
    if P is not None:
        doc["preferences"] = {sid: [inst.schools[s].name for s in P.lists[i]] for i, sid in enumerate(inst.students)}
    return doc


def _label(sc: School, t: int) -> str:
    if sc.type_labels and t <= len(sc.type_labels):
        return sc.type_labels[t - 1]
    return str(t)


def _collapse(per_school: dict):
    vals = list(per_school.values())
    if vals and all(v == vals[0] for v in vals) and all(type(v) is type(vals[0]) for v in vals):
        return vals[0]
    return per_school


def emit_instance(inst: Instance, P: Optional[PreferenceProfile] = None) -> str:
    return json.dumps(instance_to_dict(inst, P), indent=2, ensure_ascii=False) + "\n"


def matching_to_dict(inst: Instance, m: Matching) -> dict:
    return {sid: inst.school_name(m.assignment[i]) for i, sid in enumerate(inst.students)}


def matching_from_dict(inst: Instance, d: dict) -> Matching:
    assignment = []
    for sid in d:
        inst.student_index(str(sid))
    for sid in inst.students:
        s = d.get(sid)
        assignment.append(None if s is None else inst.school_index(str(s)))
    return Matching.from_assignment(assignment, inst.n_schools)


def parse_matching(inst: Instance, text: str) -> Matching:
    doc = _loads(text)
    if isinstance(doc, dict) and "matching" in doc:
        doc = doc["matching"]
    if not isinstance(doc, dict):
        raise DocumentSemanticError("document shape", "matching", "expected an object of student -> school")
    try:
        return matching_from_dict(inst, doc)
    except InstanceError as e:
        raise DocumentSemanticError("referential integrity", "matching", str(e)) from None


@dataclass
class ReportDocument:
    """Machine-readable result of one command."""

    command: str
    matching: Optional[dict] = None
    verdicts: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    trace: Optional[list] = None
    timing: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "command": self.command,
             "matching": self.matching, "verdicts": self.verdicts, "witnesses": self.witnesses}
        if self.trace is not None:
            d["trace"] = self.trace
        if self.timing is not None:
            d["timing"] = self.timing
        return d

    def emit(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ReportDocument":
        d = _loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DocumentSemanticError("schema version", "schema_version", f"unsupported version {d.get('schema_version')!r}")
        return cls(d["command"], d.get("matching"), d.get("verdicts", {}), d.get("witnesses", []),
                   d.get("trace"), d.get("timing"))


def jsonable(x, inst: Optional[Instance] = None):
    """Witness payloads (sets, indices, enums) rendered with external ids."""
    if isinstance(x, dict):
        return {str(k): jsonable(v, inst) for k, v in x.items()}
    if isinstance(x, frozenset) or isinstance(x, set):
        if inst is not None and all(isinstance(i, int) for i in x):
            return inst.names(x)
        return sorted((jsonable(v, inst) for v in x), key=str)
    if isinstance(x, (list, tuple)):
        return [jsonable(v, inst) for v in x]
    if isinstance(x, Rational) and not isinstance(x, int):
        return format_number(x)
    if hasattr(x, "name") and hasattr(x, "value"):
        return x.name
    return x


FIXTURES = ("example1", "example2", "example3", "appendixE")


def fixture_text(name: str) -> str:
    from importlib.resources import files

    if name not in FIXTURES:
        raise DocumentError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURES)}")
    return files("divchoice.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> tuple[Instance, PreferenceProfile]:
    return parse_instance(fixture_text(name))


def parse_slot_scenario(text: str):
    """A fixed slot-priority scenario: students, one school's capacity and cases."""
    from .verify.slots import ObjectiveSpec, SlotScenario

    d = _loads(text)
    if d.get("kind") != "slot_scenario":
        raise DocumentSemanticError("document kind", "kind", "expected slot_scenario")
    students = _need(d, "students", "root")
    ids = tuple(int(_need(st, "id", f"students[{k}]")) for k, st in enumerate(students))
    sigma = {i: float(number(_need(st, "score", f"student {i}"), f"score of {i}")) for i, st in zip(ids, students)}
    fav = str(_need(d, "favored_type", "root"))
    favored = frozenset(i for i, st in zip(ids, students) if str(_need(st, "type", f"student {i}")) == fav)
    obj = ObjectiveSpec(sigma, favored, float(number(d.get("diversity", "0.5"), "diversity")))
    cases, expected = [], []
    for k, c in enumerate(_need(d, "cases", "root")):
        J = frozenset(int(x) for x in _need(c, "J", f"cases[{k}]"))
        if not J <= set(ids):
            raise DocumentSemanticError("referential integrity", f"cases[{k}]", "undeclared student")
        cases.append(J)
        if "optimal" in c:
            expected.append(frozenset(int(x) for x in c["optimal"]))
    return SlotScenario(ids, obj, int(_need(d, "capacity", "root")), tuple(cases), tuple(expected))
