"""Command-line front end: ``banach-lab <group> <command> [options]``.

Every command builds a JSON report (sorted keys, rationals as strings,
schema version on top).  It goes to ``--out`` when given, otherwise to
stdout.  Exit codes: 0 for a computed result (inconclusive included), 2 for
usage errors, 3 when an exact computation refuses its budget.

Examples:
  banach-lab tsirelson norm --vector '[[3,"1"],[4,"1"],[5,"1"]]'
  banach-lab table summing-basis --m 5 --n 5
  banach-lab certify type --p 1 --eps 0.1 --ambient tsirelson --vectors e1,e2
  banach-lab witness independence --family c0 --r 7/4 --s 5/4 --depth 6
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import certify, convolution, dividing, plotting, typespace
from .parallel import JOBS_ENV, resolve_jobs
from .report import render_csv, render_report, write_atomic
from .tsirelson import (
    DEFAULT_MAX_SPAN,
    DEFAULT_MAX_SUPPORT,
    admissible_families,
    evaluate,
    tsirelson_iterates,
)
from .vectors import BudgetExceeded, FiniteVector, NormSpace, VectorError, basis, summing, vector_from_json

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3
MAX_FAMILIES = 100_000


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def ambient(text: str) -> NormSpace:
    try:
        return NormSpace.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load_text(text: str) -> str:
    if text.startswith("@"):
        try:
            return Path(text[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {text[1:]}: {exc}") from exc
    return text


def _json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _shorthand(token: str, integers: bool) -> FiniteVector:
    """``e<k>``, ``s<k>`` (summing vector); on the integers also ``d<k>`` and ``b<i>``."""
    token = token.strip()
    kind, num = token[:1], token[1:]
    try:
        k = int(num)
    except ValueError as exc:
        raise UsageError(f"unknown vector shorthand {token!r}") from exc
    if integers and kind == "d":
        return convolution.delta(k)
    if integers and kind == "b":
        return convolution.binomial_kernel(k)
    if not integers and kind == "e" and k >= 1:
        return basis(k)
    if not integers and kind == "s" and k >= 1:
        return summing(k)
    raise UsageError(f"unknown vector shorthand {token!r}")


def parse_vector(text: str, *, integers: bool = False) -> FiniteVector:
    """A vector from JSON (``[[i, "v"], ...]`` or ``{"entries": ...}``), ``@file``, or a shorthand."""
    text = _load_text(text)
    stripped = text.strip()
    if stripped[:1] in "[{":
        try:
            return vector_from_json(_json(stripped, "vector"), allow_nonpositive=integers)
        except VectorError as exc:
            raise UsageError(f"bad vector: {exc}") from exc
    parts = [p for p in stripped.split("+") if p.strip()]
    if not parts:
        raise UsageError("empty vector")
    out = _shorthand(parts[0], integers)
    for p in parts[1:]:
        out = out + _shorthand(p, integers)
    return out


def parse_vectors(text: str) -> list[FiniteVector]:
    """A list of vectors: JSON list of vectors, ``@file``, or shorthand like ``e1,e2,e3+e4``."""
    text = _load_text(text)
    stripped = text.strip()
    if stripped[:1] == "[":
        payload = _json(stripped, "vector list")
        if not isinstance(payload, list) or not payload:
            raise UsageError("vector list must be a non-empty JSON list")
        try:
            return [vector_from_json(v) for v in payload]
        except (VectorError, TypeError) as exc:
            raise UsageError(f"bad vector in list: {exc}") from exc
    out = [parse_vector(tok) for tok in stripped.split(",") if tok.strip()]
    if not out:
        raise UsageError("empty vector list")
    return out


# ---------------------------------------------------------------------------
# output


def emit(args, command: str, payload, *, stdout_text: str | None = None) -> None:
    text = render_report(command, payload)
    if args.out:
        write_atomic(args.out, text)
    if stdout_text is not None:
        sys.stdout.write(stdout_text)
    elif not args.out:
        sys.stdout.write(text)


def _config(args, *names) -> dict:
    return {n: _cfg_value(getattr(args, n)) for n in names}


def _cfg_value(v):
    if isinstance(v, float):
        return "inf" if v == certify.INF else str(Fraction(v))
    if isinstance(v, (Fraction, NormSpace)):
        return str(v)
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_tsirelson_norm(args) -> int:
    x = parse_vector(args.vector)
    comp = evaluate(x, max_support=args.max_support, max_span=args.max_span)
    payload = comp.to_json()
    emit(args, "tsirelson norm", payload, stdout_text=None if args.json else f"{comp.value}\n")
    return EXIT_OK


def cmd_tsirelson_iterates(args) -> int:
    x = parse_vector(args.vector)
    n = args.n if args.n is not None else len(x)
    its = tsirelson_iterates(x, n, max_support=args.max_support, max_span=args.max_span)
    payload = {"input": x.to_json(), "n": n, "iterates": [str(v) for v in its]}
    if args.figure:
        plotting.iterates_figure(its, args.figure)
    emit(args, "tsirelson iterates", payload)
    return EXIT_OK


def cmd_tsirelson_families(args) -> int:
    pieces = args.max_pieces if args.max_pieces is not None else args.hi - args.lo + 1
    fams = []
    for fam in admissible_families(args.lo, args.hi, pieces):
        fams.append([list(iv) for iv in fam])
        if len(fams) > args.limit:
            raise BudgetExceeded(f"more than {args.limit} admissible families; raise --limit")
    payload = {"lo": args.lo, "hi": args.hi, "max_pieces": pieces, "count": len(fams), "families": fams}
    emit(args, "tsirelson families", payload)
    return EXIT_OK


def _budget(args) -> certify.CertifyBudget:
    return certify.CertifyBudget(max_points=args.max_points, target_rel_width=args.target_width)


def cmd_certify_constants(args) -> int:
    X = parse_vectors(args.vectors)
    cert = certify.equivalence_constants(X, args.p, args.ambient, _budget(args))
    payload = {"config": _config(args, "p", "ambient", "max_points", "target_width"), "vectors": X, "certificate": cert}
    emit(args, "certify constants", payload)
    return EXIT_OK


def cmd_certify_type(args) -> int:
    X = parse_vectors(args.vectors)
    res = certify.check_eps_lp_type(X, args.p, args.eps, args.ambient, _budget(args))
    payload = {"config": _config(args, "p", "eps", "ambient", "max_points", "target_width"), "vectors": X, "check": res}
    emit(args, "certify type", payload)
    return EXIT_OK


def cmd_certify_blockrep(args) -> int:
    res = certify.block_rep_search(
        args.ambient, args.range, args.p, args.eps, args.n, _budget(args), max_evaluations=args.max_evaluations
    )
    payload = {"config": _config(args, "p", "eps", "ambient", "range", "n", "max_evaluations"), "search": res}
    emit(args, "certify blockrep", payload)
    return EXIT_OK


def _evaluator(name: str) -> dividing.FormulaEvaluator:
    if name.startswith("constant:"):
        return dividing.constant_evaluator(rational(name.split(":", 1)[1]))
    try:
        return dividing.EVALUATORS[name]()
    except KeyError as exc:
        raise UsageError(f"unknown evaluator {name!r}; choose from {sorted(dividing.EVALUATORS)} or constant:<c>") from exc


def cmd_witness_order(args) -> int:
    rep = dividing.double_limit_table(_evaluator(args.evaluator), args.m, args.n, args.tol, jobs=args.jobs)
    if args.csv:
        write_atomic(args.csv, render_csv(rep.matrix))
    if args.figure:
        plotting.matrix_figure(rep.matrix, args.figure, rep.name)
    emit(args, "witness order-property", {"config": _config(args, "evaluator", "m", "n", "tol"), "report": rep})
    return EXIT_OK


def cmd_witness_independence(args) -> int:
    try:
        family = dividing.FAMILIES[args.family]()
    except KeyError as exc:
        raise UsageError(f"unknown family {args.family!r}; choose from {sorted(dividing.FAMILIES)}") from exc
    if not args.s < args.r:
        raise UsageError("need s < r")
    rep = dividing.independence_witness_search(
        family, args.r, args.s, args.depth, samples=args.samples, seed=args.seed, jobs=args.jobs
    )
    cfg = _config(args, "family", "r", "s", "depth", "samples", "seed")
    emit(args, "witness independence", {"config": cfg, "report": rep})
    return EXIT_OK


def cmd_witness_sop(args) -> int:
    rep = dividing.sop_monotonicity_check(
        dividing.summing_basis_psi(), args.depth, samples=args.samples, seed=args.seed, jobs=args.jobs
    )
    emit(args, "witness sop", {"config": _config(args, "depth", "samples", "seed"), "report": rep})
    return EXIT_OK


def cmd_table_summing(args) -> int:
    table = dividing.summing_basis_table(args.m, args.n, jobs=args.jobs)
    csv_text = render_csv(table)
    if args.csv:
        write_atomic(args.csv, csv_text)
    if args.figure:
        plotting.matrix_figure(table, args.figure, "||e_m + s_n|| in c0")
    payload = {"config": _config(args, "m", "n"), "table": table}
    if args.out:
        write_atomic(args.out, render_report("table summing-basis", payload))
    sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_phi_conv(args) -> int:
    x = parse_vector(args.x, integers=True)
    y = parse_vector(args.y, integers=True)
    try:
        res = convolution.convolution_phi(x, y, args.halfwidth, args.tol)
    except VectorError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"config": _config(args, "halfwidth", "tol"), "x": x, "y": y, "phi": res}
    emit(args, "phi conv", payload)
    return EXIT_OK


def _net(args) -> typespace.BallNet:
    if args.net == "negated-basis":
        return typespace.BallNet.negated_basis(args.ambient, args.max_index)
    return typespace.BallNet.grid(args.ambient, args.max_index, args.step, args.max_support)


def cmd_probe_dmetric(args) -> int:
    X = parse_vectors(args.vectors)
    net = _net(args)
    values = [typespace.trivial_type_eval(a, net) for a in X]
    encl = [[typespace._distance(u, v) for v in values] for u in values]
    lower = [[d.lo for d in row] for row in encl]
    if args.csv:
        write_atomic(args.csv, render_csv(lower))
    cfg = _config(args, "ambient", "net", "max_index", "step", "max_support")
    payload = {"config": cfg, "net": net.to_json(), "vectors": X, "lower_bounds": lower, "enclosures": encl}
    emit(args, "probe dmetric", payload)
    return EXIT_OK


def cmd_probe_packing(args) -> int:
    X = parse_vectors(args.vectors)
    rep = typespace.packing_stats(X, args.eps, _net(args), jobs=args.jobs)
    if args.csv:
        write_atomic(args.csv, render_csv(rep.distances))
    if args.figure:
        plotting.growth_figure(rep.growth, args.figure)
    cfg = _config(args, "ambient", "eps", "net", "max_index", "step", "max_support")
    emit(args, "probe packing", {"config": cfg, "report": rep})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _outputs(p: argparse.ArgumentParser, csv: bool = False, figure: bool = False) -> None:
    p.add_argument("--out", help="write the JSON report here (atomically) instead of stdout")
    if csv:
        p.add_argument("--csv", help="also write the matrix as CSV")
    if figure:
        p.add_argument("--figure", help="also render a figure (format from the suffix, e.g. .png)")


def _tsirelson_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-support", type=positive_int, default=DEFAULT_MAX_SUPPORT)
    p.add_argument("--max-span", type=positive_int, default=DEFAULT_MAX_SPAN)


def _certify_common(p: argparse.ArgumentParser, vectors: bool = True) -> None:
    if vectors:
        p.add_argument("--vectors", required=True, help='e.g. "e1,e2", a JSON list of vectors, or @file')
    p.add_argument("--p", type=certify.parse_p, required=True, help="exponent (a rational >= 1 or inf)")
    p.add_argument("--ambient", type=ambient, required=True, help="sup | tsirelson | lp:<p>")
    p.add_argument("--max-points", type=positive_int, default=certify.CertifyBudget.max_points)
    p.add_argument("--target-width", type=rational, default=certify.CertifyBudget.target_rel_width)


def _net_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ambient", type=ambient, required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--net", choices=["grid", "negated-basis"], default="grid")
    p.add_argument("--max-index", type=positive_int, default=3)
    p.add_argument("--step", type=rational, default=Fraction(1, 4))
    p.add_argument("--max-support", type=positive_int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banach-lab",
        description="Exact Tsirelson norms, l_p certificates and finite dividing-line checkers.",
    )
    parser.add_argument("--jobs", type=positive_int, default=None, help=f"worker cap (default ${JOBS_ENV} or 1)")
    groups = parser.add_subparsers(dest="group", required=True)

    ts = groups.add_parser("tsirelson", help="exact Tsirelson norm").add_subparsers(dest="command", required=True)
    p = ts.add_parser("norm", help="norm with its optimal family tree")
    p.add_argument("--vector", required=True, help='e.g. \'[[3,"1"],[4,"1"],[5,"1"]]\', e3+e4+e5, or @file')
    p.add_argument("--json", action="store_true", help="print the full report instead of the value")
    _tsirelson_budget(p)
    _outputs(p)
    p.set_defaults(func=cmd_tsirelson_norm)
    p = ts.add_parser("iterates", help="the sequence of inductive norms")
    p.add_argument("--vector", required=True)
    p.add_argument("--n", type=int, default=None, help="number of iterates (default: support size)")
    _tsirelson_budget(p)
    _outputs(p, figure=True)
    p.set_defaults(func=cmd_tsirelson_iterates)
    p = ts.add_parser("families", help="admissible interval families in [lo, hi]")
    p.add_argument("--lo", type=positive_int, required=True)
    p.add_argument("--hi", type=positive_int, required=True)
    p.add_argument("--max-pieces", type=positive_int, default=None)
    p.add_argument("--limit", type=positive_int, default=MAX_FAMILIES)
    _outputs(p)
    p.set_defaults(func=cmd_tsirelson_families)

    ce = groups.add_parser("certify", help="l_p equivalence certificates").add_subparsers(dest="command", required=True)
    p = ce.add_parser("constants", help="enclose the two equivalence constants")
    _certify_common(p)
    _outputs(p)
    p.set_defaults(func=cmd_certify_constants)
    p = ce.add_parser("type", help="check eps-l_p type against the first vector")
    _certify_common(p)
    p.add_argument("--eps", type=rational, required=True)
    _outputs(p)
    p.set_defaults(func=cmd_certify_type)
    p = ce.add_parser("blockrep", help="search successive blocks of eps-l_p type")
    _certify_common(p, vectors=False)
    p.add_argument("--eps", type=rational, required=True)
    p.add_argument("--n", type=positive_int, required=True, help="blocks y_0..y_n")
    p.add_argument("--range", type=positive_int, default=20, help="blocks live in [1, RANGE]")
    p.add_argument("--max-evaluations", type=positive_int, default=300)
    _outputs(p)
    p.set_defaults(func=cmd_certify_blockrep)

    wi = groups.add_parser("witness", help="finite dividing-line checks").add_subparsers(dest="command", required=True)
    p = wi.add_parser("order-property", help="double-limit table")
    p.add_argument("--evaluator", default="summing-basis", help=f"{sorted(dividing.EVALUATORS)} or constant:<c>")
    p.add_argument("--m", type=positive_int, default=20)
    p.add_argument("--n", type=positive_int, default=20)
    p.add_argument("--tol", type=rational, default=dividing.DEFAULT_LIMIT_TOL)
    _outputs(p, csv=True, figure=True)
    p.set_defaults(func=cmd_witness_order)
    p = wi.add_parser("independence", help="witness search over all splits P, M")
    p.add_argument("--family", default="c0", help=f"one of {sorted(dividing.FAMILIES)}")
    p.add_argument("--r", type=rational, required=True)
    p.add_argument("--s", type=rational, required=True)
    p.add_argument("--depth", type=positive_int, required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    _outputs(p)
    p.set_defaults(func=cmd_witness_independence)
    p = wi.add_parser("sop", help="monotone chain plus strict inequalities for max(|x+y|, |x-y|) in c0")
    p.add_argument("--depth", type=positive_int, default=20)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _outputs(p)
    p.set_defaults(func=cmd_witness_sop)

    tb = groups.add_parser("table", help="value tables").add_subparsers(dest="command", required=True)
    p = tb.add_parser("summing-basis", help="||e_m + s_n|| in c0 as CSV")
    p.add_argument("--m", type=positive_int, default=20)
    p.add_argument("--n", type=positive_int, default=20)
    _outputs(p, csv=True, figure=True)
    p.set_defaults(func=cmd_table_summing)

    ph = groups.add_parser("phi", help="formula values").add_subparsers(dest="command", required=True)
    p = ph.add_parser("conv", help="inf over the l_1 ball of ||x * z - y||_1 on the integers")
    p.add_argument("--x", required=True, help="vector on Z: JSON, @file, d<k> (delta), b<i> (binomial kernel)")
    p.add_argument("--y", required=True)
    p.add_argument("--halfwidth", type=int, default=16)
    p.add_argument("--tol", type=rational, default=convolution.DEFAULT_CONV_TOL)
    _outputs(p)
    p.set_defaults(func=cmd_phi_conv)

    pr = groups.add_parser("probe", help="net-restricted type metric probes").add_subparsers(dest="command", required=True)
    p = pr.add_parser("dmetric", help="pairwise lower bounds on the type distance")
    _net_args(p)
    _outputs(p, csv=True)
    p.set_defaults(func=cmd_probe_dmetric)
    p = pr.add_parser("packing", help="greedy eps-packing of trivial types")
    _net_args(p)
    p.add_argument("--eps", type=rational, required=True)
    _outputs(p, csv=True, figure=True)
    p.set_defaults(func=cmd_probe_packing)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    func: Callable = args.func
    try:
        args.jobs = resolve_jobs(args.jobs)
        return func(args)
    except UsageError as exc:
        print(f"banach-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"banach-lab: budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, VectorError) as exc:
        print(f"banach-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
