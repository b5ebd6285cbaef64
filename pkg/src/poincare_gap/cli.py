"""Command-line front end: ``poincare-gap gap|sweep|verify``.

Exit codes: 0 success, 1 verification failure, 2 bad arguments or model
string, 3 numerical failure, 4 output path not writable.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import closed_form as cf
from . import intertwining as it
from . import rayleigh as ry
from . import spectral
from . import suites
from .models import FAMILY_PARAMETERS, DiffusionModel, build_model, parse_model
from .quadrature import QuadratureError

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_UNWRITABLE = 4

QUALITY_ENV = "POINCARE_GAP_QUALITY"
DEFAULT_QUALITY = "standard"
QUALITIES = tuple(spectral.QUALITY_CELLS)

NUMERIC_ERRORS = (spectral.AssemblyError, spectral.KernelViolation, QuadratureError,
                  FloatingPointError, ArithmeticError)


class UsageError(Exception):
    pass


def resolve_quality(flag: str | None) -> str:
    """Flag beats environment beats default."""
    if flag is not None:
        return flag
    env = os.environ.get(QUALITY_ENV)
    if env is None or env == "":
        return DEFAULT_QUALITY
    if env not in QUALITIES:
        raise UsageError(f"{QUALITY_ENV}={env!r} is not one of {', '.join(QUALITIES)}")
    return env


# ---------------------------------------------------------------------------
# estimates for one model
# ---------------------------------------------------------------------------

@dataclass
class GapReport:
    model: DiffusionModel
    theorem: cf.TheoremValue | None
    lower: object  # GapEstimate
    lower_epsilon: float
    upper: object | None
    numeric: object

    def as_dict(self) -> dict:
        def est(e):
            if e is None:
                return None
            return {"value": e.value, "kind": e.kind.value, "method": e.method,
                    "error": e.error, "flags": list(e.flags)}

        th = None
        if self.theorem is not None:
            th = {"value": self.theorem.value, "lower": self.theorem.lower,
                  "upper": self.theorem.upper, "regime": self.theorem.regime}
        lower = est(self.lower)
        lower["epsilon"] = None if math.isnan(self.lower_epsilon) else self.lower_epsilon
        return {"model": self.model.label, "param": self.model.param, "closed_form": th,
                "intertwining": lower, "rayleigh": est(self.upper), "numeric": est(self.numeric)}


def estimate(model: DiffusionModel, quality: str) -> GapReport:
    eps, lower = it.best_lower(model)
    upper = ry.best_upper(model)
    numeric = spectral.spectral_gap_numeric(model, quality)
    return GapReport(model, cf.theorem_for(model), lower, eps, upper, numeric)


def _fmt(v):
    return "n/a" if v is None else f"{v:.10g}"


def render_text(report: GapReport) -> str:
    lines = [f"model        {report.model.label}"]
    th = report.theorem
    if th is not None:
        if th.value is not None:
            lines.append(f"closed form  {_fmt(th.value)}  (regime {th.regime})")
        else:
            lines.append(f"closed form  bounds [{_fmt(th.lower)}, {_fmt(th.upper)}]  (regime {th.regime})")
    else:
        lines.append("closed form  none for custom models")
    lo = report.lower
    lines.append(f"lower        {_fmt(lo.value)}  [{lo.kind.value}: {lo.method}]")
    up = report.upper
    if up is None:
        lines.append("upper        n/a")
    else:
        lines.append(f"upper        {_fmt(up.value)}  [{up.method}]")
    nu = report.numeric
    flags = f"  flags: {', '.join(nu.flags)}" if nu.flags else ""
    lines.append(f"numeric      {_fmt(nu.value)} ± {nu.error:.2g}  [{nu.method}]{flags}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# sweep rows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    model: str
    param: float
    closed_form: float | None
    lower: float
    upper: float | None
    numeric: float
    numeric_err: float
    inside_bounds: bool
    matches_closed_form: bool | None
    regime: str = ""


CSV_FIELDS = ("model", "param", "closed_form", "lower", "upper", "numeric", "numeric_err",
              "inside_bounds", "matches_closed_form")

BOUND_SLACK = 1e-6


def sweep_row(report: GapReport) -> SweepRow:
    model, th = report.model, report.theorem
    exact = th.value if th is not None else None
    lower = report.lower.value
    upper = report.upper.value if report.upper is not None else None
    if th is not None:
        lower = max(lower, th.lower)
        upper = th.upper if upper is None else min(upper, th.upper)
    v = report.numeric.value
    # rows with a closed form use the acceptance tolerance; pure sandwiches get only the slack
    tol = suites.acceptance_tolerance(model) if exact is not None else 0.0
    inside = lower * (1.0 - tol) - BOUND_SLACK <= v
    if upper is not None:
        inside = inside and v <= upper * (1.0 + tol) + BOUND_SLACK
    matches = None if exact is None else abs(v - exact) <= tol * abs(exact)
    return SweepRow(model.label, float(model.param), exact, float(lower), upper, float(v),
                    float(report.numeric.error), bool(inside), matches,
                    th.regime if th is not None else "")


def _row_worker(args):
    family, value, quality = args
    return sweep_row(estimate(build_model(family, value), quality))


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    if not step > 0.0:
        raise UsageError("--step must be positive")
    if stop < start:
        raise UsageError("--stop must not be below --start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps 0.1 + 2*0.1 from printing as 0.30000000000000004
    return [float(np.round(start + k * step, 12)) for k in range(count)]


def run_sweep(family: str, values, quality: str, jobs: int = 1) -> list[SweepRow]:
    tasks = [(family, v, quality) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_worker, tasks))
    else:
        rows = [_row_worker(t) for t in tasks]
    return sorted(rows, key=lambda r: r.param)


def _num(v) -> str:
    return "" if v is None else format(v, ".17g")


def _bool(v) -> str:
    return "" if v is None else ("true" if v else "false")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([r.model, _num(r.param), _num(r.closed_form), _num(r.lower), _num(r.upper),
                    _num(r.numeric), _num(r.numeric_err), _bool(r.inside_bounds),
                    _bool(r.matches_closed_form)])
    return buf.getvalue()


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return json.dumps(v)


def rows_to_json(rows) -> str:
    names = [f.name for f in fields(SweepRow)]
    body = ",\n".join(
        "    {" + ", ".join(f"{json.dumps(n)}: {_json_scalar(getattr(r, n))}" for n in names) + "}"
        for r in rows)
    return '{\n  "rows": [\n' + body + "\n  ]\n}\n"


def _parse_num(s):
    return None if s == "" else float(s)


def _parse_bool(s):
    return None if s == "" else s == "true"


def rows_from_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for d in reader:
        out.append(SweepRow(d["model"], float(d["param"]), _parse_num(d["closed_form"]),
                            float(d["lower"]), _parse_num(d["upper"]), float(d["numeric"]),
                            float(d["numeric_err"]), bool(_parse_bool(d["inside_bounds"])),
                            _parse_bool(d["matches_closed_form"])))
    return out


_FLOAT_FIELDS = ("param", "closed_form", "lower", "upper", "numeric", "numeric_err")


def rows_from_json(text: str) -> list[SweepRow]:
    out = []
    for d in json.loads(text)["rows"]:
        # "1" is written for 1.0, which json reads back as an int
        d.update({k: float(d[k]) for k in _FLOAT_FIELDS if d[k] is not None})
        out.append(SweepRow(**d))
    return out


def read_sweep(path: str) -> list[SweepRow]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return rows_from_json(text) if text.lstrip().startswith("{") else rows_from_csv(text)


def rows_to_text(rows) -> str:
    head = f"{'model':<26} {'closed':>12} {'lower':>12} {'upper':>12} {'numeric':>12} {'err':>9}  in  match  regime"
    lines = [head]
    for r in rows:
        lines.append(f"{r.model:<26} {_fmt(r.closed_form):>12} {_fmt(r.lower):>12} "
                     f"{_fmt(r.upper):>12} {_fmt(r.numeric):>12} {r.numeric_err:>9.2g}  "
                     f"{_bool(r.inside_bounds):<3} {_bool(r.matches_closed_form) or '-':<5}  {r.regime}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _open_output(path):
    try:
        return open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise PermissionError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with _open_output(path) as fh:
        fh.write(text)


def _stamp():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def cmd_gap(args) -> int:
    try:
        model = parse_model(args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    quality = resolve_quality(args.quality)
    if args.output is not None:
        _open_output(args.output).close()
    report = estimate(model, quality)
    if args.format == "json":
        text = json.dumps(report.as_dict(), indent=2) + "\n"
    elif args.format == "csv":
        text = rows_to_csv([sweep_row(report)])
    else:
        text = render_text(report) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.family not in FAMILY_PARAMETERS:
        raise UsageError(f"unknown family {args.family!r}; choose from "
                         f"{', '.join(sorted(FAMILY_PARAMETERS))}")
    values = sweep_values(args.start, args.stop, args.step)
    for v in values:
        try:
            build_model(args.family, v)
        except ValueError as exc:
            raise UsageError(f"range leaves the family's domain: {exc}") from None
    quality = resolve_quality(args.quality)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    fmt = args.format or ("csv" if args.output else "text")
    out = None
    if args.output is not None:
        out = _open_output(args.output)
    started = _stamp()
    try:
        rows = run_sweep(args.family, values, quality, args.jobs)
    except BaseException:
        if out is not None:
            out.close()
        raise
    text = {"csv": rows_to_csv, "json": rows_to_json, "text": rows_to_text}[fmt](rows)
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    with out:
        out.write(text)
    junctions = [r.model for r in rows if "both" in r.regime]
    with open(args.output + ".log", "w", encoding="utf-8") as log:
        log.write(f"started {started}\nfinished {_stamp()}\n")
        log.write(f"family {args.family} values {len(values)} quality {quality} "
                  f"jobs {args.jobs} backend {spectral.BACKEND}\n")
        for name in junctions:
            log.write(f"junction row {name}: both regimes apply\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(suites.SUITES) if "all" in args.suite else list(dict.fromkeys(args.suite))
    quality = resolve_quality(args.quality)
    results = [suites.run_suite(n, quality) for n in names]
    ok = all(r.passed for r in results)
    if args.format == "json":
        text = json.dumps({"passed": ok, "suites": [
            {"name": r.name, "passed": r.passed, "seconds": r.seconds,
             "cases": [asdict(c) for c in r.cases]} for r in results]}, indent=2) + "\n"
    else:
        parts = []
        for r in results:
            parts.append(r.summary())
            parts.extend("  " + c.line() for c in r.cases)
        parts.append("ALL PASS" if ok else "FAILURES")
        text = "\n".join(parts) + "\n"
    _emit(text, args.output)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quality", choices=QUALITIES, default=None,
                        help=f"mesh size (default: ${QUALITY_ENV} or {DEFAULT_QUALITY})")
    common.add_argument("--output", default=None, help="write to PATH instead of stdout")

    parser = argparse.ArgumentParser(prog="poincare-gap",
                                     description="Spectral gaps of weighted 1D diffusions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", parents=[common], help="all estimates for one model")
    p.add_argument("model", help="e.g. cauchy:beta=2, gauss-weighted:b=0.5, exp-power:alpha=1.5, uniform")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("sweep", parents=[common], help="tabulate a parameter range")
    p.add_argument("family", help=", ".join(sorted(FAMILY_PARAMETERS)))
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--format", choices=("text", "json", "csv"), default=None,
                   help="default: csv with --output, text otherwise")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", nargs="+", choices=(*suites.SUITES, "all"))
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
