"""Command-line front end.

Subcommands: ``region`` (bounds, vertices, notable points of a source),
``examples`` (reproduction checks for the two built-in worked sources),
``simulate`` (binning-protocol trials plus audits), ``audit`` (secrecy
report and compliance verdict for a protocol descriptor).

Exit codes: 0 success, 1 input/validation error, 2 reproduction or
compliance failure.  Every command is deterministic given its full flag
set (seeds never default from time), and reruns produce byte-identical
output files: floats are rendered with 12 significant digits in both CSV
and JSON, so the two formats are value-equivalent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import capacity_region as cr
from . import info_measures as im
from . import protocol_engine as pe
from . import secrecy_audit as sa
from . import source_model as sm
from .errors import TrikeyError
from .kernels import backend_name

_EXACT_TOL = 1e-12
_FORM_TOL = 1e-9


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def _canon(obj):
    """Round floats to their printed precision so CSV and JSON agree."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: str, obj):
    _write_text(path, json.dumps(_canon(obj), indent=2, sort_keys=True) + "\n")


def _write_csv(path: str, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def resolve_source(text: str) -> sm.JointPmf3:
    """Inline source builders mirroring the source-spec file format."""
    if text == "xor":
        return sm.xor_source()
    if text == "point_mass":
        return sm.point_mass_source()
    if text.startswith("cascade_bsc:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise sm.SourceSpecError(f"expected cascade_bsc:p,q, got {text!r}")
        try:
            p, q = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise sm.SourceSpecError(f"bad cascade parameters in {text!r}") from exc
        return sm.cascade_bsc_source(p, q)
    if text.startswith("table@"):
        return sm.load_source_spec(text[len("table@"):])
    if os.path.exists(text):
        return sm.load_source_spec(text)
    raise sm.SourceSpecError(
        f"unrecognized source {text!r} (try xor, point_mass, cascade_bsc:p,q, table@path, or a spec file)"
    )


def _resolve_protocol(text: str, pmf: sm.JointPmf3) -> pe.Protocol:
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            try:
                record = json.load(fh)
            except json.JSONDecodeError as exc:
                raise pe.ProtocolSpecError(f"{text[1:]}: not valid JSON ({exc})") from exc
    elif text.lstrip().startswith("{"):
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise pe.ProtocolSpecError(f"inline protocol descriptor is not valid JSON ({exc})") from exc
    else:
        record = {"type": text}
    return pe.protocol_from_descriptor(record, pmf)


# ---------------------------------------------------------------- region


def cmd_region(args) -> int:
    pmf = resolve_source(args.source)
    abc = cr.compute_abc(pmf)
    scalars = {
        "a": abc.a,
        "b": abc.b,
        "c": abc.c,
        "sk_capacity": cr.sk_capacity(pmf),
        "pk_capacity": cr.pk_capacity(pmf),
    }
    outer = cr.outer_bound(pmf)
    inner = cr.inner_bound(pmf)
    exact = cr.exact_region(pmf)
    points, case = cr.notable_points(pmf)
    regions = [("outer", outer), ("inner", inner)]
    if exact is not None:
        regions.append(("exact", exact))

    if args.format == "json":
        obj = {
            "scalars": scalars,
            "case": case,
            "halfplanes": [
                {
                    "region": name,
                    "label": h.label,
                    "coef_rs": h.coef_rs,
                    "coef_rp": h.coef_rp,
                    "bound": h.bound,
                }
                for name, region in regions
                for h in region.halfplanes
            ],
            "vertices": {
                **{name: [[v.rs, v.rp] for v in cr.vertices(region)] for name, region in regions},
                **({} if exact is not None else {"exact": None}),
            },
            "points": [
                {"label": p.label, "rs": p.point.rs, "rp": p.point.rp, "clamped": p.clamped}
                for p in points
            ],
        }
        _write_json(f"{args.out}.json", obj)
        written = [f"{args.out}.json"]
    else:
        _write_csv(
            f"{args.out}_scalars.csv",
            ("name", "value"),
            [*scalars.items(), ("case", case)],
        )
        _write_csv(
            f"{args.out}_halfplanes.csv",
            ("label", "coef_rs", "coef_rp", "bound"),
            [
                (f"{name}.{h.label}", h.coef_rs, h.coef_rp, h.bound)
                for name, region in regions
                for h in region.halfplanes
            ],
        )
        _write_csv(
            f"{args.out}_vertices.csv",
            ("label", "rs", "rp"),
            [(name, v.rs, v.rp) for name, region in regions for v in cr.vertices(region)],
        )
        _write_csv(
            f"{args.out}_points.csv",
            ("label", "rs", "rp", "clamped"),
            [(p.label, p.point.rs, p.point.rp, p.clamped) for p in points],
        )
        written = [
            f"{args.out}_{suffix}.csv" for suffix in ("scalars", "halfplanes", "vertices", "points")
        ]
    print(f"case: {case}; wrote {', '.join(written)}")
    return 0


# -------------------------------------------------------------- examples


def _vertex_sets_match(left, right, tol) -> bool:
    if len(left) != len(right):
        return False
    remaining = list(right)
    for v in left:
        for i, w in enumerate(remaining):
            if abs(v.rs - w[0]) <= tol and abs(v.rp - w[1]) <= tol:
                del remaining[i]
                break
        else:
            return False
    return True


def _example1_checks(inject_fault: bool):
    xor = sm.xor_source()
    checks = []
    checks.append(
        (
            "example1.sk_capacity",
            abs(cr.sk_capacity(xor) - 0.5) <= _EXACT_TOL,
            "min{a,b,c} = 1/2",
        )
    )
    checks.append(
        ("example1.pk_capacity", abs(cr.pk_capacity(xor) - 1.0) <= _EXACT_TOL, "I(X;Y|Z) = 1")
    )
    expected = [(0.0, 0.0), (0.5, 0.0), (0.0, 1.0)]
    inner_v = cr.vertices(cr.inner_bound(xor))
    outer_v = cr.vertices(cr.outer_bound(xor))
    checks.append(
        (
            "example1.region_coincides",
            _vertex_sets_match(inner_v, expected, _EXACT_TOL)
            and _vertex_sets_match(outer_v, expected, _EXACT_TOL),
            "inner and outer both the 2rs+rp <= 1 triangle",
        )
    )
    sk_proto = pe.example1_sk_protocol()
    if inject_fault:
        sk_proto = pe.with_corrupted_slot(sk_proto, 3)
    rep = sa.exact_audit(sk_proto, xor)
    checks.append(
        (
            "example1.sk_scheme_perfect",
            rep.sk_error == 0.0
            and rep.sk_leak_rate == 0.0
            and rep.sk_unif_deficit == 0.0
            and (rep.sk_rate, rep.pk_rate) == (0.5, 0.0),
            "1 key bit at n=2, zero error/leak/deficit",
        )
    )
    rep = sa.exact_audit(pe.example1_pk_protocol(), xor)
    checks.append(
        (
            "example1.pk_scheme_perfect",
            rep.pk_error == 0.0
            and rep.pk_leak_rate == 0.0
            and rep.pk_unif_deficit == 0.0
            and (rep.sk_rate, rep.pk_rate) == (0.0, 1.0),
            "1 private bit at n=1, zero error/leak/deficit",
        )
    )
    combo = pe.time_share(pe.example1_sk_protocol(), pe.example1_pk_protocol(), 1, 2)
    rep = sa.exact_audit(combo, xor)
    checks.append(
        (
            "example1.timeshare_boundary",
            (rep.sk_rate, rep.pk_rate) == (0.25, 0.5)
            and rep.sk_error == 0.0
            and rep.pk_error == 0.0
            and rep.sk_leak_rate == 0.0
            and rep.pk_leak_rate == 0.0
            and rep.cross_key_rate == 0.0,
            "(0.25, 0.5) sits on 2rs+rp = 1",
        )
    )
    return checks


def _example2_checks(p: float, q: float):
    h = im.binary_entropy
    pmf = sm.cascade_bsc_source(p, q)
    abc = cr.compute_abc(pmf)
    expect = (1 - h(q), 1 - h(p), 1 - (h(p) + h(q)) / 2)
    checks = [
        (
            "example2.closed_form_abc",
            max(abs(abc.a - expect[0]), abs(abc.b - expect[1]), abs(abc.c - expect[2]))
            <= _FORM_TOL,
            f"(a,b,c) = (1-h(q), 1-h(p), 1-(h(p)+h(q))/2) at p={p}, q={q}",
        )
    ]
    _, case = cr.notable_points(pmf)
    exact = cr.exact_region(pmf)
    checks.append(
        (
            "example2.theorem3_case",
            case == cr.CASE_THEOREM3 and exact is not None,
            "min{a,b,c} = b, region known exactly",
        )
    )
    rbar = h(p + q - 2 * p * q) - h(p)
    planes_ok = exact is not None and _planes_match(
        exact.halfplanes, [(0.0, 1.0, rbar), (1.0, 1.0, 1 - h(p))], _FORM_TOL
    )
    checks.append(
        ("example2.exact_region_planes", planes_ok, "rp <= h(p+q-2pq)-h(p); rs+rp <= 1-h(p)")
    )
    checks.append(
        (
            "example2.markov_check",
            im.conditional_mutual_information(pmf, "Y", "Z", "X") <= _EXACT_TOL,
            "I(Y;Z|X) = 0",
        )
    )
    checks.append(
        (
            "example2.pk_capacity_form",
            abs(cr.pk_capacity(pmf) - rbar) <= _FORM_TOL,
            "I(X;Y|Z) = h(p+q-2pq) - h(p)",
        )
    )
    return checks


def _planes_match(halfplanes, expected, tol) -> bool:
    if len(halfplanes) != len(expected):
        return False
    remaining = list(expected)
    for hp in halfplanes:
        for i, (ca, cb, bound) in enumerate(remaining):
            if (
                abs(hp.coef_rs - ca) <= tol
                and abs(hp.coef_rp - cb) <= tol
                and abs(hp.bound - bound) <= tol
            ):
                del remaining[i]
                break
        else:
            return False
    return True


def cmd_examples(args) -> int:
    checks = []
    if args.only in (None, "example1"):
        checks.extend(_example1_checks(args.inject_fault))
    if args.only in (None, "example2"):
        checks.extend(_example2_checks(args.p, args.q))
    width = max(len(name) for name, _, _ in checks)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
        return 2
    print(f"all {len(checks)} checks passed")
    return 0


# -------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    pmf = resolve_source(args.source)
    protocol = pe.binning_protocol(
        pmf, args.n, args.slack, args.sk_rate, args.pk_rate, args.seed
    )
    mc = sa.mc_audit(protocol, pmf, args.trials, args.seed)
    cx, cy, cz = pmf.card
    full_space = (cx * cy * cz) ** args.n
    if full_space <= sa.DEFAULT_STATE_BUDGET:
        exact = sa.exact_audit(protocol, pmf)
        modes = "mc+exact"
        skipped = None
    else:
        exact = None
        modes = "mc_only"
        skipped = (
            f"state space {full_space} exceeds audit budget {sa.DEFAULT_STATE_BUDGET}"
        )
    best = exact if exact is not None else mc
    achieved = sa.achieved_rate_pair(best)
    contained = cr.contains(cr.outer_bound(pmf), achieved, _FORM_TOL)
    obj = {
        "protocol": protocol.descriptor,
        "backend": backend_name(),
        "audit_modes": modes,
        "exact_skipped": skipped,
        "mc_report": mc.to_record(),
        "exact_report": exact.to_record() if exact is not None else None,
        "achieved_rate_pair": {"rs": achieved.rs, "rp": achieved.rp},
        "outer_bound_contains": contained,
    }
    if args.format == "json":
        _write_json(f"{args.out}.json", obj)
        written = f"{args.out}.json"
    else:
        rows = [("audit_modes", modes), ("backend", backend_name())]
        rows += [(f"mc_{k}", v) for k, v in mc.to_record().items()]
        if exact is not None:
            rows += [(f"exact_{k}", v) for k, v in exact.to_record().items()]
        else:
            rows.append(("exact_skipped", skipped))
        rows += [
            ("achieved_rs", achieved.rs),
            ("achieved_rp", achieved.rp),
            ("outer_bound_contains", contained),
        ]
        _write_csv(f"{args.out}.csv", ("name", "value"), rows)
        written = f"{args.out}.csv"
    print(
        f"{modes}: achieved (rs, rp) = ({_fmt(achieved.rs)}, {_fmt(achieved.rp)}), "
        f"outer-bound containment: {contained}; wrote {written}"
    )
    return 0


# ----------------------------------------------------------------- audit


def cmd_audit(args) -> int:
    pmf = resolve_source(args.source)
    protocol = _resolve_protocol(args.protocol, pmf)
    try:
        report = sa.exact_audit(protocol, pmf)
    except sa.StateSpaceTooLargeError:
        if args.trials is None or args.seed is None:
            print(
                "error: state space too large for the exact audit; "
                "pass --trials and --seed for a Monte Carlo audit",
                file=sys.stderr,
            )
            return 1
        report = sa.mc_audit(protocol, pmf, args.trials, args.seed)
    verdict = sa.check_definition(report, args.eps)
    obj = {"report": report.to_record(), "verdict": verdict.to_record()}
    if args.format == "json":
        _write_json(f"{args.out}.json", obj)
        written = f"{args.out}.json"
    else:
        rows = list(report.to_record().items())
        rows.append(("eps", verdict.eps))
        rows.append(("passed", verdict.passed))
        rows += [(f"flag_{k}", v) for k, v in verdict.flags.items()]
        rows += [(f"margin_{k}", v) for k, v in verdict.margins.items()]
        _write_csv(f"{args.out}.csv", ("name", "value"), rows)
        written = f"{args.out}.csv"
    print(f"verdict: {'pass' if verdict.passed else 'FAIL'} at eps={_fmt(args.eps)}; wrote {written}")
    if args.enforce and not verdict.passed:
        return 2
    return 0


# ----------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trikey",
        description="Rate-region bounds, protocols and secrecy audits for three-terminal sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_region = sub.add_parser("region", help="compute and export rate-region data for a source")
    p_region.add_argument("--source", required=True, help="xor | point_mass | cascade_bsc:p,q | table@path | spec file")
    p_region.add_argument("--format", choices=("csv", "json"), default="csv")
    p_region.add_argument("--out", default="region", help="output path prefix")
    p_region.set_defaults(func=cmd_region)

    p_ex = sub.add_parser("examples", help="run the built-in reproduction checks")
    p_ex.add_argument("--only", choices=("example1", "example2"))
    p_ex.add_argument("--p", type=float, default=0.25, help="cascade flip probability X->Y")
    p_ex.add_argument("--q", type=float, default=0.1, help="cascade flip probability X->Z")
    p_ex.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p_ex.set_defaults(func=cmd_examples)

    p_sim = sub.add_parser("simulate", help="run binning-protocol trials and audit them")
    p_sim.add_argument("--source", required=True)
    p_sim.add_argument("--n", type=int, required=True, help="blocklength")
    p_sim.add_argument("--seed", type=int, required=True, help="codebook and sampling seed")
    p_sim.add_argument("--slack", type=float, required=True, help="extra bin rate per terminal, bits/symbol")
    p_sim.add_argument("--sk-rate", type=float, required=True, dest="sk_rate")
    p_sim.add_argument("--pk-rate", type=float, default=0.0, dest="pk_rate")
    p_sim.add_argument("--trials", type=int, default=10000)
    p_sim.add_argument("--format", choices=("csv", "json"), default="json")
    p_sim.add_argument("--out", default="simulate")
    p_sim.set_defaults(func=cmd_simulate)

    p_audit = sub.add_parser("audit", help="secrecy report and compliance verdict for a protocol")
    p_audit.add_argument("--protocol", required=True, help="example1_sk | example1_pk | inline JSON | @file")
    p_audit.add_argument("--source", required=True)
    p_audit.add_argument("--eps", type=float, required=True)
    p_audit.add_argument("--enforce", action="store_true", help="exit 2 when the verdict fails")
    p_audit.add_argument("--trials", type=int, help="Monte Carlo fallback when the exact audit is infeasible")
    p_audit.add_argument("--seed", type=int)
    p_audit.add_argument("--format", choices=("csv", "json"), default="json")
    p_audit.add_argument("--out", default="audit")
    p_audit.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except TrikeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
