"""Command line front end.

Every command prints one JSON report on stdout (or a text rendering of it)
and diagnostics on stderr.  Exit codes: 0 success, 1 validation failure,
2 unsupported or malformed input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import io
from .complex import homology_barcode, validate
from .completion import brute_force_telescope_homology, truncated_homology, visibility
from .errors import InvariantViolation, ResourceCapExceeded, UnsupportedInput, ValidationError
from .limits import caps, check_slices
from .neck import (apply_phi, build_neck, check_bounds, ellipsoid_orbits, index_bounded_check,
                   phi_extends, valuation_shifts)
from .novikov import as_fraction
from .unital import check_realization, unit_class, validate_unit, visibility_via_unit

EXIT_OK, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_CAP = 0, 1, 2, 3


class UsageError(UnsupportedInput):
    pass


def parse_rational(text: str) -> Fraction:
    try:
        return as_fraction(text.strip())
    except (ValueError, TypeError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def parse_schedule(text: Optional[str], default: Sequence = (1,)) -> List[Fraction]:
    if text is None:
        vals = [as_fraction(x) for x in default]
    else:
        vals = [parse_rational(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise UsageError("empty schedule")
    if any(v <= 0 for v in vals):
        raise UsageError("schedule values must be positive")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError("schedule must be strictly increasing")
    return vals


def _lambdas(args) -> List[Fraction]:
    raw = ",".join(args.lam) if args.lam else None
    return parse_schedule(raw)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> dict:
    data = io.read_json(args.file)
    kind = io.kind_of(data)
    src = args.file
    if kind == "complex":
        validate(io.complex_from(data, src))
    elif kind == "ray":
        R = io.ray_from(data, src)
        check_slices(R.N)
        R.validate()
    elif kind == "neck":
        io.neck_from(data, src)
    elif kind == "bundle":
        b = io.Bundle(data, src)
        for R in (b.C, b.Cprime, b.D):
            R.validate()
        check_realization(b.f, b.p, b.u, b.E)
    elif kind == "orbits":
        io.stream_from(data, src)
    else:
        raise io.InputError("cannot tell what kind of object this file holds", src)
    return {"command": "validate", "file": src, "kind": kind, "valid": True}


def cmd_homology(args) -> dict:
    C = io.complex_from(io.read_json(args.complex), args.complex)
    validate(C)
    out = {"command": "homology", "exact": homology_barcode(C).to_json()}
    if args.lam:
        out["truncated"] = {str(l): homology_barcode(C, l).to_json() for l in _lambdas(args)}
    return out


def _load_ray(path):
    R = io.ray_from(io.read_json(path), path)
    check_slices(R.N)
    R.validate()
    return R


def cmd_tel_homology(args) -> dict:
    R = _load_ray(args.ray)
    lams = _lambdas(args)
    return {"command": "tel-homology", "tail": R.tail_kind(),
            "barcodes": [{"lambda": str(l), "barcode": truncated_homology(R, l).to_json()} for l in lams]}


def cmd_visibility(args) -> dict:
    R = _load_ray(args.ray)
    v = visibility(R, parse_schedule(args.schedule, (1, 2, 4)))
    return {"command": "visibility", **v.to_json()}


def cmd_unit_check(args) -> dict:
    R = _load_ray(args.ray)
    u = io.unit_from(io.read_json(args.unit), R, args.unit)
    validate_unit(R, u)
    lams = parse_schedule(args.schedule, (1,))
    classes = [{"lambda": str(l), "order": str(unit_class(R, u, l).order())} for l in lams]
    return {"command": "unit-check", "valid": True, "unit_classes": classes}


def cmd_realize_check(args) -> dict:
    b = io.Bundle(io.read_json(args.bundle), args.bundle)
    for R in (b.C, b.Cprime, b.D):
        check_slices(R.N)
        R.validate()
    check_realization(b.f, b.p, b.u, b.E)
    out = {"command": "realize-check", "realization": "valid"}
    sched = args.schedule if args.schedule is not None else (
        ",".join(str(x) for x in b.schedule) if b.schedule else None)
    if sched is not None:
        out["unit_visibility"] = visibility_via_unit(b.f, b.p, b.u, b.E, parse_schedule(sched)).to_json()
    return out


def cmd_neck_check(args) -> dict:
    data = io.read_json(args.neck)
    p = io.neck_from(data, args.neck)
    C = parse_rational(args.C) if args.C else as_fraction(data.get("C", 1))
    sweep = [parse_rational(k) for k in args.K] if args.K else \
        [as_fraction(k) for k in data.get("K_sweep", [p.K])]
    rep = check_bounds(p, C, sweep)
    return {"command": "neck-check", "params": p.to_json(),
            "constants": {k: str(v) for k, v in sorted(p.constants().items())}, "bounds": rep.to_json()}


def cmd_ellipsoid(args) -> dict:
    if not args.a:
        raise UsageError("give at least one --a")
    a = [parse_rational(x) for x in args.a]
    cap = parse_rational(args.cap)
    res = ellipsoid_orbits(a, cap)
    out = {"command": "ellipsoid", "a": [str(x) for x in a], "cap": str(cap),
           "orbits": [{"label": o.label, "period": str(o.period), "cz": o.cz} for o in res.orbits],
           "warnings": res.warnings}
    if args.cap_high:
        hi = parse_rational(args.cap_high)
        table = index_bounded_check(res.orbits, cap, ellipsoid_orbits(a, hi).orbits, hi)
        out["index_table"] = table.to_json()
    return out


def cmd_index_check(args) -> dict:
    stream = io.stream_from(io.read_json(args.stream), args.stream)
    cap = parse_rational(args.cap)
    hi = parse_rational(args.cap_high) if args.cap_high else None
    table = index_bounded_check(stream, cap, stream if hi else None, hi)
    out = {"command": "index-check", **table.to_json()}
    if not table.bounded:
        raise _Reported(out, ValidationError(
            "unbounded index classes: " + ", ".join(f"CZ {k}" for k in table.flagged)))
    return out


def cmd_phi_apply(args) -> dict:
    rdata = io.read_json(args.ray)
    ndata = io.read_json(args.neck)
    R = io.ray_from(rdata, args.ray)
    check_slices(R.N)
    R.validate()
    p = io.neck_from(ndata, args.neck)
    if "orbits" in rdata:
        orbits = io.orbits_from(rdata["orbits"], args.ray)
    elif "orbits" in ndata:
        orbits = io.orbits_from(ndata["orbits"], args.neck)
    else:
        raise io.InputError("no orbit data: add an 'orbits' object to the ray or neck file", args.ray)
    res = apply_phi(R, p, orbits)
    shifts = valuation_shifts(R, res)
    out = {"command": "phi-apply",
           "deltas": [{str(k): [str(x) for x in v] for k, v in sorted(d.items())} for d in res.deltas],
           "shifts_match": all(a == b for *_, a, b in shifts),
           "rescaled_ray": res.ray.to_json()}
    if "stream" in ndata:
        stream = io.stream_from(ndata["stream"], args.neck)
        cap = as_fraction(ndata.get("cap", max((s[0] for s in stream), default=1)))
        hi = as_fraction(ndata["cap_high"]) if "cap_high" in ndata else None
        table = index_bounded_check(stream, cap, stream if hi else None, hi)
        a = parse_rational(args.bound_a) if args.bound_a else p.s
        verdict = phi_extends(R, p, orbits, a, table, parse_schedule(args.schedule, (1, 10)))
        out["extends"] = verdict.to_json()
        if not verdict.extends:
            raise _Reported(out, ValidationError(verdict.reason))
    return out


def cmd_oracle(args) -> dict:
    R = _load_ray(args.ray)
    M = args.M
    if M < R.N:
        raise UsageError(f"--M must be at least the prefix length {R.N}")
    check_slices(M, "telescope length")
    lams = _lambdas(args)
    rows = []
    for l in lams:
        brute = brute_force_telescope_homology(R, M, l)
        fast = truncated_homology(R, l)
        rows.append({"lambda": str(l), "oracle": brute.to_json(), "colimit": fast.to_json(),
                     "agree": brute == fast})
    out = {"command": "oracle", "M": M, "levels": rows}
    if not all(r["agree"] for r in rows):
        raise _Reported(out, InvariantViolation("oracle and colimit barcodes differ"))
    return out


class _Reported(Exception):
    """Carries a report together with the error that fails the command."""

    def __init__(self, report: dict, error: Exception):
        super().__init__(str(error))
        self.report = report
        self.error = error


# ---------------------------------------------------------------------------
# parser and driver


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="novtel", description="Telescopes over the Novikov ring.")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--max-slices", type=int, default=None)
    ap.add_argument("--max-terms", type=int, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a complex, ray, neck, bundle or orbit stream")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("homology", help="barcode of a complex")
    p.add_argument("complex")
    p.add_argument("--lambda", dest="lam", action="append")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("tel-homology", help="truncated telescope homology")
    p.add_argument("ray")
    p.add_argument("--lambda", dest="lam", action="append")
    p.set_defaults(func=cmd_tel_homology)

    p = sub.add_parser("visibility", help="visibility verdict over a schedule")
    p.add_argument("ray")
    p.add_argument("--schedule")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("unit-check", help="validate unit data on a ray")
    p.add_argument("ray")
    p.add_argument("unit")
    p.add_argument("--schedule")
    p.set_defaults(func=cmd_unit_check)

    p = sub.add_parser("realize-check", help="validate a realization bundle")
    p.add_argument("bundle")
    p.add_argument("--schedule")
    p.set_defaults(func=cmd_realize_check)

    p = sub.add_parser("neck-check", help="profile/matching bounds for a neck")
    p.add_argument("neck")
    p.add_argument("--C")
    p.add_argument("--K", action="append")
    p.set_defaults(func=cmd_neck_check)

    p = sub.add_parser("ellipsoid", help="Reeb orbits of an ellipsoid boundary")
    p.add_argument("--a", action="append")
    p.add_argument("--cap", required=True)
    p.add_argument("--cap-high")
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("index-check", help="index-boundedness of an orbit stream")
    p.add_argument("stream")
    p.add_argument("--cap", required=True)
    p.add_argument("--cap-high")
    p.set_defaults(func=cmd_index_check)

    p = sub.add_parser("phi-apply", help="rescale an orbit-labelled ray across a neck")
    p.add_argument("ray")
    p.add_argument("neck")
    p.add_argument("--bound-a")
    p.add_argument("--schedule")
    p.set_defaults(func=cmd_phi_apply)

    p = sub.add_parser("oracle", help="brute-force telescope homology")
    p.add_argument("ray")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--lambda", dest="lam", action="append")
    p.set_defaults(func=cmd_oracle)
    return ap


def render_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def _emit(report: dict, fmt: str, out) -> None:
    out.write(io.dump(report) if fmt == "json" else render_text(report) + "\n")


def _code(exc: Exception) -> int:
    if isinstance(exc, ResourceCapExceeded):
        return EXIT_CAP
    if isinstance(exc, (ValidationError, InvariantViolation)):
        return EXIT_INVALID
    return EXIT_UNSUPPORTED


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_UNSUPPORTED
    for name in ("max_slices", "max_terms"):
        v = getattr(args, name)
        if v is not None and v <= 0:
            stderr.write(f"error: --{name.replace('_', '-')} must be positive\n")
            return EXIT_UNSUPPORTED
    try:
        with caps(max_slices=args.max_slices, max_terms=args.max_terms):
            report = args.func(args)
    except _Reported as exc:
        code = _code(exc.error)
        _emit({**exc.report, "status": "error", "error": str(exc.error), "exit_code": code}, args.format, stdout)
        stderr.write(f"error: {exc.error}\n")
        return code
    except (ValidationError, InvariantViolation, UnsupportedInput, ResourceCapExceeded, ValueError) as exc:
        code = _code(exc)
        _emit({"command": args.command, "status": "error", "error_type": type(exc).__name__,
               "error": str(exc), "exit_code": code}, args.format, stdout)
        stderr.write(f"error: {exc}\n")
        return code
    _emit({**report, "status": "ok"}, args.format, stdout)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
