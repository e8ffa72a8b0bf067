"""Command-line front end.

JSON and CSV go to standard output and diagnostics to standard error.
Exit codes: 0 success or certified, 1 undetermined / not found / hypothesis
failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .certify import (
    STRATEGIES,
    THEOREMS,
    HypothesisFailed,
    ThresholdNotFound,
    certify,
    configuration_theorem_check,
    isoparametric_sweep,
    min_copies,
    rough_arithmetic_holds,
    thc_existence_dimension,
    uniform_dimension_threshold,
)
from .links import (
    InvalidCatalogEntry,
    InvalidLink,
    Link,
    SpectraUnavailable,
    catalog_enumerate,
    classify,
    resolve_catalog_id,
)
from .product import DEFAULT_RESOLUTION, minimal_product
from .vanishing import RTOL_ENV, BoundEvaluator, vanishing_angle, vanishing_angle_gform

REPORT_SCHEMA = "report/v1"
TABLE_SCHEMA = "table/v1"
TRACE_SCHEMA = "trace/v1"
CATALOG_SCHEMA = "catalog/v1"
TABLE_HEADER = ["m", "alpha", "bound", "theta_deg", "tan_theta", "outcome"]


class InputError(Exception):
    """Bad user input; reported with exit code 2."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


# ----------------------------------------------------------------------------
# input parsing
# ----------------------------------------------------------------------------

_SQRT = re.compile(r"^(?:sqrt\((.+)\)|√(.+))$")


def parse_real(text: str) -> float:
    """A float, or sqrt(x) / √x for exact-looking square roots."""
    text = text.strip()
    m = _SQRT.match(text)
    try:
        val = math.sqrt(float(m.group(1) or m.group(2))) if m else float(text)
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise InputError(f"not finite: {text!r}")
    return val


def parse_list(text: str, kind=parse_real) -> list:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise InputError("empty list")
    return [kind(s) for s in items]


def parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"not an integer: {text!r}") from None


def load_link(ref: str) -> Link:
    """A link from a JSON file path, or a catalog id such as sphere:3."""
    path = Path(ref)
    if path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{ref}: malformed JSON at line {exc.lineno} column {exc.colno}") from None
        try:
            return Link.from_dict(data)
        except InvalidLink as exc:
            raise InputError(f"{ref}: {exc}", field=exc.field) from None
    if ":" in ref:
        try:
            return resolve_catalog_id(ref)
        except InvalidCatalogEntry as exc:
            raise InputError(str(exc)) from None
    raise InputError(f"{ref}: no such file and not a catalog id")


def load_links(refs: Sequence[str]) -> list[Link]:
    out = []
    for ref in refs:
        # REF*N repeats a link N times
        base, _, count = ref.rpartition("*") if "*" in ref else (ref, "", "1")
        n = parse_int(count)
        if n < 1:
            raise InputError(f"{ref}: repeat count must be >= 1")
        out.extend([load_link(base)] * n)
    return out


# ----------------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------------

def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def report(inputs: dict, results: Any, started: float) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "inputs": inputs,
        "results": results,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }


def write_json(obj: Any, out) -> None:
    json.dump(_jsonable(obj), out, indent=2, sort_keys=False)
    out.write("\n")


def fmt_deg(theta: float | None) -> str:
    return "" if theta is None else f"{math.degrees(theta):.4f}"


def fmt_real(x: float | None) -> str:
    return "" if x is None else f"{x:.12g}"


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_catalog(args, out) -> int:
    started = time.perf_counter()
    links = catalog_enumerate(args.max_dim)
    rows = []
    for link in links:
        cls = classify(link)
        rows.append(
            {
                "id": link.provenance.removeprefix("catalog:"),
                "name": link.name,
                "k": link.k,
                "alpha_sq": link.alpha_sq,
                "normal_radius": link.normal_radius,
                "slope": cls.slope,
                "class": cls.letter,
            }
        )
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", "name", "k", "alpha_sq", "normal_radius_deg", "slope", "class"])
        for r in rows:
            w.writerow([r["id"], r["name"], r["k"], fmt_real(r["alpha_sq"]), fmt_deg(r["normal_radius"]), fmt_real(r["slope"]), r["class"]])
        out.write(f"# schema={CATALOG_SCHEMA}\n")
    else:
        write_json(report({"max_dim": args.max_dim}, {"schema": CATALOG_SCHEMA, "links": rows}, started), out)
    return 0


def cmd_product(args, out) -> int:
    factors = load_links(args.links)
    link = minimal_product(factors, resolution=args.resolution, with_spectra=not args.no_spectra)
    write_json(link.to_dict(), out)
    return 0


def _target_link(args) -> Link:
    links = load_links(args.link)
    return links[0] if len(links) == 1 else minimal_product(links, resolution=args.resolution)


def cmd_certify(args, out) -> int:
    started = time.perf_counter()
    link = _target_link(args)
    try:
        cert = certify(link, args.bound)
    except SpectraUnavailable as exc:
        raise InputError(str(exc)) from None
    inputs = {"link": args.link, "bound": args.bound}
    write_json(report(inputs, cert.to_dict(), started), out)
    return 0 if cert.certified else 1


def _evaluator(kind: str, m: int, alpha: float) -> BoundEvaluator:
    return BoundEvaluator.c(m, alpha) if kind == "c" else BoundEvaluator.F(m, alpha)


def table_rows(ms: Sequence[int], alphas: Sequence[float], bound: str, form: str = "w") -> list[dict]:
    solve = vanishing_angle if form == "w" else vanishing_angle_gform
    rows = []
    for m in ms:
        for a in alphas:
            res = solve(_evaluator(bound, m, a))
            rows.append(
                {
                    "m": m,
                    "alpha": a,
                    "bound": bound,
                    "theta_deg": res.theta0_deg,
                    "theta": res.theta0,
                    "tan_theta": res.tan_theta0,
                    "outcome": res.outcome.value,
                }
            )
    return rows


def emit_vanishing_table(ms: Sequence[int], alphas: Sequence[float], bound: str, out, form: str = "w") -> list[dict]:
    rows = table_rows(ms, alphas, bound, form)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for r in rows:
        w.writerow([r["m"], f"{r['alpha']:.6g}", r["bound"], fmt_deg(r["theta"]), fmt_real(r["tan_theta"]), r["outcome"]])
    out.write(f"# schema={TABLE_SCHEMA}\n")
    return rows


def cmd_table(args, out) -> int:
    ms = parse_list(args.m, parse_int)
    if any(m < 2 for m in ms):
        raise InputError("--m values must be >= 2")
    alphas = parse_list(args.alphas)
    if any(a < 0 for a in alphas):
        raise InputError("--alphas must be >= 0")
    rows = emit_vanishing_table(ms, alphas, args.bound, out, args.form)
    if args.figure:
        from .plotting import table_figure

        table_figure(rows, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_trace(args, out) -> int:
    if args.link:
        link = _target_link(args)
        if args.bound != "det":
            bound = _evaluator(args.bound, link.k + 1, math.sqrt(link.alpha_sq))
        else:
            try:
                bound = BoundEvaluator.det(link)
            except SpectraUnavailable as exc:
                raise InputError(str(exc)) from None
    else:
        if args.m is None or args.alpha is None:
            raise InputError("trace needs --link or both --m and --alpha")
        if args.bound == "det":
            raise InputError("the det bound needs --link")
        m = parse_int(args.m)
        if m < 2:
            raise InputError("--m must be >= 2")
        bound = _evaluator(args.bound, m, parse_real(args.alpha))
    res = vanishing_angle(bound, trajectory_points=args.points)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["theta", "w"])
    traj = res.trajectory if res.trajectory is not None else np.empty((0, 2))
    for theta, wv in traj:
        w.writerow([f"{theta:.12g}", f"{wv:.12g}"])
    stop = res.theta0 if res.found else res.stop_theta
    out.write(f"# schema={TRACE_SCHEMA} bound={res.kind} m={res.m} outcome={res.outcome.value} theta={fmt_real(stop)}\n")
    if args.figure and traj.size:
        from .plotting import trace_figure

        grid = traj[:, 0]
        env = np.array([[th, _envelope(bound, th)] for th in grid])
        trace_figure(traj, env, args.figure, title=f"{res.kind}-bound, m={res.m}: {res.outcome.value}")
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0 if res.found else 1


def _envelope(bound: BoundEvaluator, theta: float) -> float:
    t = math.tan(theta)
    if theta >= math.pi / 2 or t >= bound.t_max:
        return 0.0
    return math.cos(theta) ** (bound.m - 1) * math.exp(bound.log_value(t))


def _parse_base(items: Sequence[str]) -> list[tuple[Link, int]]:
    base = []
    for item in items:
        ref, _, count = item.rpartition("*") if "*" in item else (item, "", "1")
        n = parse_int(count)
        if n < 1:
            raise InputError(f"{item}: count must be >= 1")
        base.append((load_link(ref), n))
    return base


def cmd_search_copies(args, out) -> int:
    started = time.perf_counter()
    if args.n_max < 1 or args.window < 0:
        raise InputError("--n-max must be >= 1 and --window >= 0")
    rep = min_copies(_parse_base(args.link), args.n_max, args.window, args.bound)
    inputs = {"base": args.link, "n_max": args.n_max, "window": args.window, "bound": args.bound}
    write_json(report(inputs, rep.to_dict(), started), out)
    if not rep.found:
        print(f"no certified copy count up to n_max={args.n_max}", file=sys.stderr)
        return 1
    return 0 if rep.window_complete else 1


def cmd_sweep(args, out) -> int:
    started = time.perf_counter()
    try:
        samples = isoparametric_sweep(args.min_dim, args.max_dim, args.samples, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    failures = [s for s in samples if not s.certificate.certified]
    results = {
        "schema": "sweep/v1",
        "samples": len(samples),
        "certified": len(samples) - len(failures),
        "failures": [s.to_dict() for s in failures],
        "min_margin": min((s.certificate.margin for s in samples if s.certificate.margin is not None), default=None),
        "items": [
            {
                "factors": list(s.factors),
                "k": s.certificate.k,
                "verdict": s.certificate.verdict.value,
                "theta0_rad": s.certificate.theta0,
                "half_R_rad": s.certificate.half_normal_radius,
                "margin": s.certificate.margin,
            }
            for s in samples
        ],
    }
    inputs = {"min_dim": args.min_dim, "max_dim": args.max_dim, "samples": args.samples, "seed": args.seed}
    write_json(report(inputs, results, started), out)
    return 0 if not failures else 1


def cmd_threshold(args, out) -> int:
    started = time.perf_counter()
    if not (math.isfinite(args.max_slope) and args.max_slope >= 1):
        raise InputError("--max-slope must be finite and >= 1")
    if not (math.isfinite(args.min_gap) and args.min_gap > 0):
        raise InputError("--min-gap must be finite and > 0")
    inputs = {"max_slope": args.max_slope, "min_gap": args.min_gap}
    try:
        k = uniform_dimension_threshold(args.max_slope, args.min_gap)
    except ThresholdNotFound as exc:
        write_json(report(inputs, {"schema": "threshold/v1", "k": None, "error": str(exc)}, started), out)
        return 1
    results = {
        "schema": "threshold/v1",
        "k": k,
        "cone_dimension": k + 1,
        "rough_arithmetic_14_2k_lt_k1_sq": rough_arithmetic_holds(k),
        "theta_c_existence_dimension": thc_existence_dimension("c"),
        "theta_F_existence_dimension": thc_existence_dimension("F"),
    }
    write_json(report(inputs, results, started), out)
    return 0


def cmd_theorem(args, out) -> int:
    started = time.perf_counter()
    links = load_links(args.link)
    inputs = {"theorem": args.name, "links": args.link}
    try:
        rep = configuration_theorem_check(links, args.name)
    except HypothesisFailed as exc:
        body = exc.report.to_dict()
        body["failed"] = exc.which
        write_json(report(inputs, body, started), out)
        print(f"hypothesis failed: {exc.which}", file=sys.stderr)
        return 1
    write_json(report(inputs, rep.to_dict(), started), out)
    return 0 if rep.confirmed else 1


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conecert", description="Certify area-minimizing cones by Lawlor's curvature criterion.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--rtol", type=float, default=None, help=f"integrator relative tolerance (env {RTOL_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("catalog", help="list catalog links")
    s.add_argument("--max-dim", type=int, default=8)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_catalog)

    link_help = "link JSON file or catalog id (sphere:3, iso:4:1:2, focal:6:1:1:plus); REF*N repeats"

    s = sub.add_parser("product", help="minimal product of links, as link JSON")
    s.add_argument("links", nargs="+", help=link_help)
    s.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    s.add_argument("--no-spectra", action="store_true")
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("certify", help="apply the criterion to a link (several --link: their minimal product)")
    s.add_argument("--link", action="append", required=True, help=link_help)
    s.add_argument("--bound", choices=STRATEGIES, default="auto")
    s.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("table", help="vanishing-angle table as CSV")
    s.add_argument("--m", required=True, help="comma-separated cone dimensions")
    s.add_argument("--alphas", required=True, help="comma-separated alphas; sqrt(x) allowed")
    s.add_argument("--bound", choices=("c", "F"), default="c")
    s.add_argument("--form", choices=("w", "g"), default="w", help="ODE formulation")
    s.add_argument("--figure", help="also render a figure to this path")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("trace", help="(theta, w) trajectory as CSV")
    s.add_argument("--m")
    s.add_argument("--alpha")
    s.add_argument("--link", action="append", help=link_help)
    s.add_argument("--bound", choices=("c", "F", "det"), default="c")
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    s.add_argument("--figure", help="also render a figure to this path")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("search-copies", help="smallest certified copy count")
    s.add_argument("--link", action="append", required=True, help="base link, REF*COUNT for a block count")
    s.add_argument("--n-max", type=int, default=64)
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--bound", choices=STRATEGIES, default="auto")
    s.set_defaults(func=cmd_search_copies)

    s = sub.add_parser("sweep", help="certify random catalog products with the c-bound")
    s.add_argument("--min-dim", type=int, default=37)
    s.add_argument("--max-dim", type=int, default=60)
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("threshold", help="uniform dimension threshold")
    s.add_argument("--max-slope", type=float, default=5.0)
    s.add_argument("--min-gap", type=float, default=0.8)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("theorem", help="check a configuration theorem")
    s.add_argument("--name", choices=THEOREMS, required=True)
    s.add_argument("--link", action="append", required=True, help=link_help)
    s.set_defaults(func=cmd_theorem)
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.rtol is not None:
        if not (0 < args.rtol < 1e-3):
            print("error: --rtol must lie in (0, 1e-3)", file=sys.stderr)
            return 2
        os.environ[RTOL_ENV] = repr(args.rtol)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (InputError, InvalidLink, InvalidCatalogEntry) as exc:
        field = getattr(exc, "field", None)
        where = f" (field '{field}')" if field else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())
