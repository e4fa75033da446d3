"""Command-line interface over a records file.

Subcommands mirror the computation pipeline: density and positivity for
one record and one (or a sweep of) j, coincidence listing, empirical
finite-field comparison, and the corpus-wide conjecture scan.  Reports go
to stdout as plain tables and optionally to --json / --csv files; every
report echoes the budgets and parameters it ran with, and the assumptions
declared by the record, so runs are reproducible.

Exit codes: 0 success, 2 usage, 3 validation/data failure, 4 budget
exhaustion, 5 conjecture counterexample found by scan.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__, coincidence, density, ffcurve, glgroup, records as rec_mod
from .glgroup import BudgetExceededError
from .numtheory import divisors

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_COUNTEREXAMPLE = 5


class CliDataError(Exception):
    """Input data is unusable for the requested command (exit 3)."""


def _load(args) -> list[rec_mod.CurveRecord]:
    try:
        recs, issues = rec_mod.parse_records(args.records)
    except (rec_mod.RecordFormatError, FileNotFoundError) as exc:
        raise CliDataError(str(exc)) from exc
    if issues:
        raise CliDataError(
            "records file has validation failures:\n  "
            + "\n  ".join(str(i) for i in issues)
        )
    return recs


def _pick(recs, label: str) -> rec_mod.CurveRecord:
    for r in recs:
        if r.label == label:
            return r
    raise CliDataError(f"no record with label {label!r} in the file")


def _need_image(rec: rec_mod.CurveRecord) -> glgroup.SubgroupClosure:
    if not rec.has_level_scoped_image():
        raise CliDataError(
            f"record {rec.label} lacks level-scoped image data; density and "
            "positivity need generators at a declared level multiple"
        )
    return rec.closure()


def _j_values(spec: str, m: int) -> list[int]:
    if spec == "all":
        return list(range(1, m + 1))
    if spec == "divisors":
        return divisors(m)
    try:
        return [int(tok) for tok in spec.split(",")]
    except ValueError:
        raise CliDataError(f"--j must be an integer list, 'all' or 'divisors'; got {spec!r}")


def _write_outputs(args, report: dict, csv_rows: list[dict]):
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    if args.csv and csv_rows:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(csv_rows[0].keys()))
            writer.writeheader()
            writer.writerows(csv_rows)


def _report_envelope(args, command: str, result, parameters: dict, assumptions=()):
    return {
        "tool": f"invfactors {__version__}",
        "command": command,
        "records_file": str(args.records),
        "parameters": parameters,
        "assumptions": list(assumptions),
        "result": result,
    }


def _criteria_block(rec: rec_mod.CurveRecord, H, j: int) -> dict:
    out = {}
    m = H.modulus
    if m % j == 0:
        out["T4b"] = density.criterion_T4b(H, j).status.value
    else:
        out["T4b"] = "SKIPPED: j does not divide the declared level"
    if j % 2 == 1 and m % j == 0:
        out["abelianisation"] = density.criterion_abelianisation(H, j).status.value
    else:
        out["abelianisation"] = "SKIPPED: needs odd j dividing the declared level"
    if rec.a_serre is not None:
        mod2 = glgroup.order_mod_extended(H, 2)
        out["coprime"] = density.criterion_coprime(j, rec.a_serre, mod2).status.value
    else:
        out["coprime"] = "SKIPPED: A(E) not recorded"
    dsf = rec.metadata.get("serre_delta_sf")
    if dsf is not None:
        out["serre"] = density.serre_positivity(dsf, j).verdict.value
    else:
        out["serre"] = "SKIPPED: record is not flagged as a Serre curve"
    return out


def cmd_density(args) -> int:
    recs = _load(args)
    rec = _pick(recs, args.label)
    H = _need_image(rec)
    rows = []
    for j in _j_values(args.j, H.modulus):
        res = density.cej(H, j, trunc=args.trunc)
        row = res.to_report()
        row["label"] = rec.label
        row["criteria"] = _criteria_block(rec, H, j)
        rows.append(row)
        print(
            f"{rec.label}  j={j:<4d} verdict={res.verdict.value:<8s} "
            f"finite_part={res.finite_part}  value=[{float(res.value_interval[0]):.9g}, "
            f"{float(res.value_interval[1]):.9g}]"
        )
    params = {"label": rec.label, "j": args.j, "trunc": args.trunc, "budget": args.budget}
    report = _report_envelope(args, "density", rows, params, rec.assumptions())
    csv_rows = [
        {
            "label": r["label"],
            "j": r["j"],
            "verdict": r["verdict"],
            "finite_part": r["finite_part"],
            "value_lo": r["value_lo"],
            "value_hi": r["value_hi"],
        }
        for r in rows
    ]
    _write_outputs(args, report, csv_rows)
    return EXIT_OK


def cmd_positivity(args) -> int:
    recs = _load(args)
    rec = _pick(recs, args.label)
    H = _need_image(rec)
    rows = []
    for j in _j_values(args.j, H.modulus):
        res = density.positivity(H, density.reduce_j(j, H.modulus))
        cert = res.certificate()
        rows.append(
            {
                "label": rec.label,
                "j": j,
                "reduced_j": res.j,
                "verdict": res.verdict.value,
                "certificate": json.dumps(cert, sort_keys=True),
            }
        )
        print(f"{rec.label}  j={j:<4d} -> gcd(j,m)={res.j:<4d} {res.verdict.value}  {cert}")
    params = {"label": rec.label, "j": args.j, "budget": args.budget}
    report = _report_envelope(args, "positivity", rows, params, rec.assumptions())
    _write_outputs(args, report, rows)
    return EXIT_OK


def cmd_coincidences(args) -> int:
    recs = _load(args)
    if args.label:
        recs = [_pick(recs, args.label)]
    rows = []
    result = []
    for rec in recs:
        if not rec.has_level_scoped_image():
            result.append({"label": rec.label, "skipped": "no level-scoped image data"})
            print(f"{rec.label}: skipped (no level-scoped image data)")
            continue
        H = rec.closure()
        found = coincidence.all_coincidences(H, args.j_bound, source=rec.label)
        result.append(
            {
                "label": rec.label,
                "coincidences": [
                    {
                        "j": c.j,
                        "p": c.p,
                        "primitive": c.primitive,
                        "witness_divisor": c.witness_divisor,
                    }
                    for c in found
                ],
            }
        )
        listing = ", ".join(c.as_row() for c in found) or "none"
        print(f"{rec.label}: {listing}")
        for c in found:
            rows.append(
                {
                    "label": rec.label,
                    "j": c.j,
                    "p": c.p,
                    "primitive": c.primitive,
                    "witness_divisor": c.witness_divisor if c.witness_divisor else "",
                }
            )
    params = {"j_bound": args.j_bound, "budget": args.budget}
    report = _report_envelope(args, "coincidences", result, params)
    _write_outputs(args, report, rows)
    return EXIT_OK


def cmd_empirical(args) -> int:
    recs = _load(args)
    rec = _pick(recs, args.label)
    curve = rec.curve()
    try:
        emp = ffcurve.empirical_density(curve, args.j, args.x, budget=args.x_budget)
    except ValueError as exc:
        raise CliDataError(str(exc)) from exc
    row = {
        "label": rec.label,
        "j": emp.j,
        "x": emp.x,
        "hits": emp.hits,
        "good_count": emp.good_count,
        "li_x": emp.li_x,
        "ratio": emp.ratio,
        "value_lo": "",
        "value_hi": "",
    }
    if rec.has_level_scoped_image():
        res = density.cej(rec.closure(), args.j, trunc=args.trunc)
        row["value_lo"] = float(res.value_interval[0])
        row["value_hi"] = float(res.value_interval[1])
    print(
        f"{rec.label}  j={emp.j} x={emp.x}: hits={emp.hits} good={emp.good_count} "
        f"li(x)={emp.li_x:.3f} ratio={emp.ratio:.6f}"
        + (
            f"  density=[{row['value_lo']:.6g}, {row['value_hi']:.6g}]"
            if row["value_lo"] != ""
            else ""
        )
    )
    rows = [row]
    if args.histogram:
        hist = ffcurve.empirical_table(curve, args.x, budget=args.x_budget)
        print("d-histogram:", hist)
        row["histogram"] = hist
    params = {
        "label": rec.label,
        "j": args.j,
        "x": args.x,
        "x_budget": args.x_budget,
        "trunc": args.trunc,
        "good_reduction_policy": ffcurve.GOOD_REDUCTION_POLICY,
    }
    report = _report_envelope(args, "empirical", rows, params, rec.assumptions())
    _write_outputs(args, report, [{k: v for k, v in r.items() if k != "histogram"} for r in rows])
    return EXIT_OK


def cmd_scan(args) -> int:
    recs = _load(args)
    report_obj = coincidence.conjecture_scan(recs, j_bound=args.j_bound, budget=args.budget)
    rows = []
    for e in report_obj.entries:
        if e.skipped:
            print(f"{e.label}: skipped ({e.skipped})")
        elif e.error:
            print(f"{e.label}: error ({e.error})")
        else:
            coincs = ", ".join(c.as_row() for c in e.coincidences) or "none"
            zeros = ",".join(map(str, e.zeros)) or "none"
            flag = " COUNTEREXAMPLE" if e.counterexample else ""
            print(f"{e.label}: zeros [{zeros}]  coincidences [{coincs}]{flag}")
        rows.append(
            {
                "label": e.label,
                "skipped": e.skipped or "",
                "error": e.error or "",
                "zeros": ";".join(map(str, e.zeros)),
                "coincidences": ";".join(f"{c.j}:{c.p}:{int(c.primitive)}" for c in e.coincidences),
                "zeros_without_coincidence": ";".join(map(str, e.zeros_without_coincidence)),
                "large_p_coincidences": ";".join(f"{c.j}:{c.p}" for c in e.large_p_coincidences),
            }
        )
    params = {"j_bound": args.j_bound, "budget": args.budget}
    report = _report_envelope(args, "scan", report_obj.to_dict(), params)
    _write_outputs(args, report, rows)
    total = report_obj.counterexamples
    print(f"scan complete: {total} counterexample record(s)")
    return EXIT_COUNTEREXAMPLE if total else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invfactors",
        description="Invariant-factor densities of elliptic curves from mod-m Galois images.",
        epilog=(
            "exit codes: 0 ok, 2 usage, 3 validation/data failure, "
            "4 budget exhaustion, 5 scan counterexample. "
            f"Closure budget default {glgroup.DEFAULT_BUDGET} (env {glgroup._BUDGET_ENV})."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, label=True, j=False):
        p.add_argument("--records", required=True, help="records JSON file")
        if label:
            p.add_argument("--label", required=True, help="record label")
        if j:
            p.add_argument("--j", required=True, help="j value(s): int list, 'all' or 'divisors'")
        p.add_argument("--budget", type=int, default=None, help="closure element budget")
        p.add_argument("--json", default=None, help="write JSON report to this file")
        p.add_argument("--csv", default=None, help="write CSV rows to this file")

    p = sub.add_parser("density", help="exact density value and verdict at j")
    common(p, j=True)
    p.add_argument("--trunc", type=int, default=density.DEFAULT_TRUNCATION,
                   help="Euler product truncation prime bound")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("positivity", help="exact positivity verdict at j")
    common(p, j=True)
    p.set_defaults(func=cmd_positivity)

    p = sub.add_parser("coincidences", help="list p-coincidences up to a bound")
    common(p, label=False)
    p.add_argument("--label", default=None, help="restrict to one record")
    p.add_argument("--j-bound", type=int, default=24)
    p.set_defaults(func=cmd_coincidences)

    p = sub.add_parser("empirical", help="finite-field counts of d = j against li(x)")
    common(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--x", type=int, required=True, help="prime bound")
    p.add_argument("--x-budget", type=int, default=ffcurve.DEFAULT_PRIME_BUDGET)
    p.add_argument("--trunc", type=int, default=density.DEFAULT_TRUNCATION)
    p.add_argument("--histogram", action="store_true", help="also print the full d histogram")
    p.set_defaults(func=cmd_empirical)

    p = sub.add_parser("scan", help="conjecture scan over the whole records file")
    common(p, label=False)
    p.add_argument("--j-bound", type=int, default=24)
    p.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
