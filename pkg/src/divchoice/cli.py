"""Command-line interface.

Exit codes: 0 success, 1 failed verdict or reproduction diff, 2 usage or
input error, 3 internal contract failure.  Set ``DIVCHOICE_LOG`` (e.g.
``DEBUG``) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .choice import ChoiceFunction
from .core import AxiomViolation, ContractError, Instance, Matching, PreferenceProfile, pareto_dominates, validate_matching
from .io import (
    DocumentError,
    ReportDocument,
    jsonable,
    load_fixture,
    matching_to_dict,
    parse_instance,
    parse_matching,
)
from .mechanism import phi_bar
from .priority import check_axioms

log = logging.getLogger("divchoice")

OK, VERDICT, USAGE, CONTRACT = 0, 1, 2, 3

STUDENT_KEYS = {"i", "j", "k", "proposer"}
SET_KEYS = {"J", "J2", "before", "after"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _witness(inst: Instance, w):
    """Witness payload with external ids in place of indices."""
    if not isinstance(w, dict):
        return jsonable(w, inst)
    out = {}
    for k, v in w.items():
        if k in STUDENT_KEYS and (v is None or isinstance(v, int)):
            out[k] = inst.student_name(v)
        elif k in SET_KEYS and isinstance(v, frozenset):
            out[k] = inst.names(v)
        elif k == "school" and isinstance(v, int):
            out[k] = inst.school_name(v)
        else:
            out[k] = jsonable(v, inst)
    return out


def _roster_text(inst: Instance, m: Matching, alias: Optional[dict] = None) -> str:
    alias = alias or {}
    parts = []
    for s, sc in enumerate(inst.schools):
        parts.append(f"{alias.get(sc.name, sc.name)}:{{{','.join(inst.names(m.roster[s]))}}}")
    return "{" + ", ".join(parts) + "}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from None


def _load(path: str) -> tuple[Instance, PreferenceProfile]:
    return parse_instance(_read(path))


def _emit(doc: ReportDocument) -> None:
    sys.stdout.write(doc.emit())


def cmd_match(args) -> int:
    inst, P = _load(args.file)
    t0 = time.perf_counter()
    try:
        m, tr = phi_bar(inst, P, validate=not args.no_validate, trace=args.trace)
    except AxiomViolation as e:
        doc = ReportDocument("match", verdicts={"axioms": False},
                             witnesses=[_witness(inst, w) for w in e.report.witnesses[:10]])
        _emit(doc)
        print(f"error: {e}", file=sys.stderr)
        return VERDICT
    elapsed = time.perf_counter() - t0
    trace = None
    if tr is not None:
        trace = [
            {"proposer": inst.student_name(r.proposer), "school": inst.school_name(r.school),
             "held": inst.names(r.after), "rejected": inst.names(r.rejected)}
            for r in tr.rounds
        ]
    doc = ReportDocument("match", matching_to_dict(inst, m), verdicts={} if args.no_validate else {"axioms": True},
                         trace=trace, timing={"seconds": elapsed} if args.timing else None)
    _emit(doc)
    return OK


def cmd_check_rule(args) -> int:
    inst, _ = _load(args.file)
    verdicts, witnesses = {}, []
    for sc in inst.schools:
        rep = check_axioms(sc, sample=args.sample, seed=args.seed)
        for ax, sub in rep.details.items():
            verdicts[f"{sc.name}.{ax}"] = sub.passed
        witnesses += [dict(_witness(inst, w), school=sc.name) for w in rep.witnesses[: args.max_witnesses]]
        if not args.json:
            for ax, sub in rep.details.items():
                print(f"school {sc.name}: {ax} {'pass' if sub.passed else 'FAIL'}"
                      f"{' (sampled)' if sub.sampled else ''} ({sub.checked} comparisons)")
            for w in rep.witnesses[: args.max_witnesses]:
                print(f"  witness: {_witness(inst, w)}")
    if args.json:
        _emit(ReportDocument("check-rule", verdicts=verdicts, witnesses=witnesses))
    return OK if all(verdicts.values()) else VERDICT


def cmd_verify(args) -> int:
    from .verify import stability_verdict

    inst, P = _load(args.file)
    m = parse_matching(inst, _read(args.matching))
    bad = validate_matching(inst, m)
    if bad:
        for b in bad:
            print(f"invalid matching: {b}", file=sys.stderr)
        return VERDICT
    v = stability_verdict(inst, P, m)
    verdicts = {"non_wasteful": v.non_wasteful, "individually_rational": v.individually_rational,
                "fair": v.fair, "stable": v.stable}
    witnesses = (
        [{"kind": "waste", "student": inst.student_name(i), "school": inst.school_name(s)} for i, s in v.waste]
        + [{"kind": "irrational", "student": inst.student_name(i), "school": inst.school_name(s)} for i, s in v.irrational]
        + [{"kind": "justified_envy", "student": inst.student_name(i), "envied": inst.student_name(j),
            "school": inst.school_name(s)} for i, j, s in v.envy]
    )
    if args.json:
        _emit(ReportDocument("verify", matching_to_dict(inst, m), verdicts, witnesses))
    else:
        for k, val in verdicts.items():
            print(f"{k}: {str(val).lower()}")
        for w in witnesses:
            if w["kind"] == "justified_envy":
                print(f"  {w['student']} has justified envy toward {w['envied']} at {w['school']}")
            else:
                print(f"  {w['kind']}: student {w['student']} at {w['school']}")
    return OK if v.stable else VERDICT


def cmd_enumerate(args) -> int:
    from .verify import enumerate_stable, student_optimal_stable

    inst, P = _load(args.file)
    stable = enumerate_stable(inst, P)
    optimal = student_optimal_stable(inst, P, stable)
    if args.json:
        _emit(ReportDocument("enumerate-stable", verdicts={"stable_count": len(stable), "optimal_count": len(optimal)},
                             witnesses=[{"matching": matching_to_dict(inst, m), "student_optimal": m in optimal}
                                        for m in stable]))
        return OK
    if not stable:
        print("stable set empty")
    for m in stable:
        print(_roster_text(inst, m) + ("  [student-optimal]" if m in optimal else ""))
    return OK


def cmd_audit_sp(args) -> int:
    from .verify import audit_strategy_proofness

    inst, P = _load(args.file)
    rep = audit_strategy_proofness(inst, P, max_group=args.group)
    ws = []
    for w in rep.witnesses:
        ws.append({
            "group": [inst.student_name(i) for i in w["group"]],
            "misreports": {inst.student_name(i): [inst.school_name(s) for s in lst] for i, lst in w["misreports"].items()},
            "gains": {inst.student_name(i): [inst.school_name(a), inst.school_name(b)] for i, (a, b) in w["gains"].items()},
        })
    if args.json:
        _emit(ReportDocument("audit-sp", verdicts={"group_strategy_proof": rep.passed, "checked": rep.checked}, witnesses=ws))
    else:
        print(f"group size <= {args.group}: {'pass' if rep.passed else 'FAIL'} ({rep.checked} misreport profiles)")
        for w in ws:
            print(f"  deviation: {w}")
    return OK if rep.passed else VERDICT


# reproductions of the worked examples

EX2_ALIAS = {"5": "s", "6": "s′"}


def repro_example1(args) -> int:
    from .verify import enumerate_stable, stability_verdict

    inst, P = load_fixture("example1")
    t0 = time.perf_counter()
    stable = enumerate_stable(inst, P)
    rep = check_axioms(inst.schools[0])
    print("stable set empty" if not stable else f"stable set has {len(stable)} matchings")
    m = Matching.from_assignment([0, 0, None], 1)
    v = stability_verdict(inst, P, m)
    for i, j, _ in v.envy:
        print(f"mu(s) = {{1,2}}: {inst.students[i]} has justified envy toward {inst.students[j]}")
    if not rep.passed:
        print(f"rule check: {', '.join(k for k, sub in rep.details.items() if not sub.passed)} fails")
    if args.timing:
        print(f"elapsed: {time.perf_counter() - t0:.4f} s")
    return OK if not stable else VERDICT


def repro_example2(args) -> int:
    from .verify import is_stable, student_optimal_stable

    inst, P = load_fixture("example2")
    m, _ = phi_bar(inst, P)
    want = Matching.from_roster([{inst.student_index("2"), inst.student_index("3")}, {inst.student_index("4")}], 4)
    better = Matching.from_roster([{inst.student_index("3"), inst.student_index("4")}, {inst.student_index("2")}], 4)
    unmatched = [inst.students[i] for i, s in enumerate(m.assignment) if s is None]
    print(f"φ̄ = {_roster_text(inst, m, EX2_ALIAS)}; unmatched: {','.join(unmatched) or 'none'}")
    ok = m == want
    dom_stable = is_stable(inst, P, better)
    dom = pareto_dominates(P, better, m)
    print(f"dominating matching {_roster_text(inst, better, EX2_ALIAS)}: "
          f"stable={str(dom_stable).lower()}, pareto_dominates_phi={str(dom).lower()}")
    optimal = student_optimal_stable(inst, P)
    print(f"φ̄ student-optimal: {str(m in optimal).lower()}")
    return OK if ok and dom_stable and dom and m not in optimal else VERDICT


EX3_SIGMA6 = {"0.30": {"1", "2", "3", "4", "5"}, "0.38": {"1", "2", "3", "4", "5"},
              "0.42": {"1", "2", "3", "5", "6"}, "0.50": {"1", "2", "3", "5", "6"}}


def example3_choices(sigma6: str):
    """Choice from all six applicants and the objective's optimum at a given score of student 6."""
    from .verify import ObjectiveSpec, optimal_choice_oracle

    inst, _ = load_fixture("example3")
    sc = inst.schools[0]
    sigma = list(sc.rule.sigma)
    sigma[5] = Fraction(sigma6)
    sc = dataclasses.replace(sc, rule=dataclasses.replace(sc.rule, sigma=tuple(sigma)))
    chosen = set(inst.names(ChoiceFunction(sc, inst.students)(frozenset(range(inst.n_students)))))
    b = sc.type_labels.index("B") + 1
    obj = ObjectiveSpec({k + 1: float(v) for k, v in enumerate(sigma)},
                        frozenset(k + 1 for k, t in enumerate(sc.types) if t == b))
    best = {str(x) for x in optimal_choice_oracle(obj, range(1, inst.n_students + 1), sc.capacity)}
    return chosen, best


def repro_example3(args) -> int:
    ok = True
    for s6, want in EX3_SIGMA6.items():
        chosen, best = example3_choices(s6)
        good = chosen == best == want
        ok &= good
        print(f"sigma_6 = {s6}: choice {{{','.join(sorted(chosen))}}}, "
              f"optimum {{{','.join(sorted(best))}}} {'ok' if good else 'MISMATCH'}")
    return OK if ok else VERDICT


def repro_slots(args) -> int:
    from .verify import audit_slot_impossibility

    res = audit_slot_impossibility()
    mismatches = [w for w in res.report.witnesses if "oracle" in w]
    print(f"optimal choices re-derived: {'match table' if not mismatches else f'{len(mismatches)} mismatches'}")
    n = len(res.optima)
    print(f"{res.satisfying_pairs} of {res.total_pairs} slot-priority pairs satisfy all six cases")
    print(f"most cases satisfied by one pair: {res.max_cases_satisfied} of {n}")
    if args.out:
        from .plotting import plot_case_histogram, write_csv

        out = Path(args.out)
        write_csv(out / "appendixE_cases.csv", ["cases_satisfied", "pairs"],
                  [(k, res.histogram.get(k, 0)) for k in range(n + 1)])
        plot_case_histogram(out / "appendixE_cases.png", res.histogram, n)
        print(f"wrote {out / 'appendixE_cases.csv'} and {out / 'appendixE_cases.png'}")
    return OK if res.satisfying_pairs == 0 and not mismatches else VERDICT


REPROS = {"example1": repro_example1, "example2": repro_example2,
          "example3": repro_example3, "appendixE": repro_slots}


def cmd_repro(args) -> int:
    return REPROS[args.name](args)


def cmd_bench(args) -> int:
    from .bench import FUDGE, run_bench

    res = run_bench(args.sizes, args.schools, args.capacity, args.reps, args.seed)
    for n, t in zip(res.sizes, res.seconds):
        print(f"|I| = {n}: {t:.4f} s")
    for (n1, n2), r in zip(zip(res.sizes, res.sizes[1:]), res.ratios):
        print(f"{n1} -> {n2}: growth / quartic envelope = {r:.3f} (limit {FUDGE})")
    print(f"within envelope: {str(res.within_envelope).lower()} (informational)")
    if args.out:
        from .plotting import plot_scaling, write_csv

        out = Path(args.out)
        write_csv(out / "bench.csv", ["students", "schools", "capacity", "seconds"],
                  [(n, res.n_schools, res.capacity, f"{t:.6f}") for n, t in zip(res.sizes, res.seconds)])
        plot_scaling(out / "bench.png", res.sizes, res.seconds, res.n_schools)
        print(f"wrote {out / 'bench.csv'} and {out / 'bench.png'}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    common.add_argument("--json", action="store_true", help="emit a JSON report document")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings")

    p = _Parser(prog="divchoice", description="Controlled school choice with assignment-dependent priorities.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("match", parents=[common], help="run the mechanism and emit the matching")
    m.add_argument("file")
    m.add_argument("--trace", action="store_true", help="include every proposal round")
    m.add_argument("--no-validate", action="store_true", help="skip the rule audit")
    m.set_defaults(func=cmd_match)

    c = sub.add_parser("check-rule", parents=[common], help="audit each school's priority rule")
    c.add_argument("file")
    c.add_argument("--sample", type=int, default=None, help="sample size for large schools")
    c.add_argument("--max-witnesses", type=int, default=5)
    c.set_defaults(func=cmd_check_rule)

    v = sub.add_parser("verify", parents=[common], help="stability verdict for a matching")
    v.add_argument("file")
    v.add_argument("matching", help="JSON object of student id -> school id or null")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate-stable", parents=[common], help="list every stable matching")
    e.add_argument("file")
    e.set_defaults(func=cmd_enumerate)

    a = sub.add_parser("audit-sp", parents=[common], help="search for profitable (group) misreports")
    a.add_argument("file")
    a.add_argument("--group", type=int, default=1, help="largest coalition size")
    a.set_defaults(func=cmd_audit_sp)

    r = sub.add_parser("repro", parents=[common], help="reproduce a worked example")
    r.add_argument("name", choices=sorted(REPROS))
    r.add_argument("--out", help="directory for CSV and PNG output")
    r.set_defaults(func=cmd_repro)

    b = sub.add_parser("bench", parents=[common], help="runtime scaling smoke test")
    b.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 80])
    b.add_argument("--schools", type=int, default=3)
    b.add_argument("--capacity", type=int, default=5)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--out", help="directory for CSV and PNG output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("DIVCHOICE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    log.debug("command %s", args.command)
    try:
        return args.func(args)
    except DocumentError as e:
        print(f"input error: {e}", file=sys.stderr)
        return USAGE
    except ContractError as e:
        print(f"contract failure: {e}", file=sys.stderr)
        return CONTRACT


if __name__ == "__main__":
    sys.exit(main())
