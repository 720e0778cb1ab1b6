"""Finite-depth checkers for the order property, independence and SOP.

Every verdict here is about a finite table or a finite family of
thresholded sets; nothing claims the infinitary property.  Values are
kept as :class:`Interval` enclosures (degenerate whenever the ambient
norm is exact) and every comparison is made on certified ends.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

from .parallel import parallel_map
from .sampling import random_ball_vector
from .vectors import (
    FiniteVector,
    Interval,
    NormSpace,
    as_fraction,
    as_interval,
    basis,
    make_vector,
    norm_enclosure,
    root_enclosure,
    summing,
    sup_norm,
)

DEFAULT_LIMIT_TOL = Fraction(1, 100)


class EvaluatorError(RuntimeError):
    """An evaluator failed or left its declared range; carries the index pair."""

    def __init__(self, message: str, indices: tuple | None = None):
        super().__init__(message if indices is None else f"{message} at {indices}")
        self.indices = indices


def _interval_json(v: Interval):
    return str(v.lo) if v.exact else v.to_json()


# ---------------------------------------------------------------------------
# Formula evaluators


@dataclass(frozen=True)
class FormulaEvaluator:
    """A two-argument formula ``phi(x, y)`` with its index families.

    ``left(m)`` and ``right(n)`` produce the sequences ``a_m`` and ``b_n``
    the tables run over; ``bounds`` is the declared value range.
    """

    name: str
    ambient: NormSpace
    formula: Callable[[FiniteVector, FiniteVector], Fraction | Interval]
    bounds: tuple[Fraction, Fraction]
    left: Callable[[int], FiniteVector] = basis
    right: Callable[[int], FiniteVector] = basis

    def __call__(self, x: FiniteVector, y: FiniteVector) -> Interval:
        value = as_interval(self.formula(x, y))
        lo, hi = self.bounds
        if value.hi < lo or value.lo > hi:
            raise EvaluatorError(f"{self.name}: value {value.to_json()} outside declared bounds [{lo}, {hi}]")
        return value

    def at(self, m: int, n: int) -> Interval:
        """``phi(a_m, b_n)``; failures are re-raised with the index pair."""
        try:
            return self(self.left(m), self.right(n))
        except EvaluatorError as exc:
            raise EvaluatorError(str(exc), (m, n)) from exc
        except Exception as exc:
            raise EvaluatorError(f"{self.name}: {exc}", (m, n)) from exc


def summing_basis_phi() -> FormulaEvaluator:
    """``||x + y||`` in c_0 over ``a_m = e_m`` and the summing basis ``b_n = s_n``."""
    return FormulaEvaluator(
        "c0: |x+y| on (e_m, s_n)",
        NormSpace.sup(),
        lambda x, y: sup_norm(x + y),
        (Fraction(0), Fraction(2)),
        basis,
        summing,
    )


def summing_basis_psi() -> FormulaEvaluator:
    """``max(||x + y||, ||x - y||)`` in c_0 over ``(e_m, s_n)``."""
    return FormulaEvaluator(
        "c0: max(|x+y|, |x-y|) on (e_m, s_n)",
        NormSpace.sup(),
        lambda x, y: max(sup_norm(x + y), sup_norm(x - y)),
        (Fraction(0), Fraction(2)),
        basis,
        summing,
    )


def l2_basis_phi() -> FormulaEvaluator:
    space = NormSpace.lp(2)
    return FormulaEvaluator(
        "l2: |x+y| on (e_m, e_n)",
        space,
        lambda x, y: norm_enclosure(x + y, space),
        (Fraction(0), Fraction(2)),
    )


def constant_evaluator(c) -> FormulaEvaluator:
    c = as_fraction(c)
    return FormulaEvaluator(f"constant {c}", NormSpace.sup(), lambda x, y: c, (c, c))


EVALUATORS: dict[str, Callable[[], FormulaEvaluator]] = {
    "summing-basis": summing_basis_phi,
    "summing-basis-psi": summing_basis_psi,
    "l2-basis": l2_basis_phi,
}


# ---------------------------------------------------------------------------
# Double limits


@dataclass
class DoubleLimitReport:
    name: str
    rows: int
    cols: int
    matrix: list[list[Interval]]
    lim_m_lim_n: Interval
    lim_n_lim_m: Interval
    windows: dict[str, list[int]]
    gap: Fraction
    tol: Fraction
    verdict: str

    def to_json(self) -> dict:
        return {
            "evaluator": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "matrix": [[_interval_json(v) for v in row] for row in self.matrix],
            "lim_m_lim_n": _interval_json(self.lim_m_lim_n),
            "lim_n_lim_m": _interval_json(self.lim_n_lim_m),
            "windows": self.windows,
            "gap": str(self.gap),
            "tol": str(self.tol),
            "verdict": self.verdict,
        }


def _mean(values: Sequence[Interval]) -> Interval:
    return sum(values, Interval.point(0)) / len(values)


def _tail_windows(rows: int, cols: int) -> dict[str, tuple[range, range]]:
    """Index windows for the two iterated limits.

    The inner limit averages the last quarter of its own index.  The outer
    index must stay below where the inner one is sampled, so the outer
    window is the quarter ending at ``L - ceil(L/4)`` with ``L = min(M, N)``
    (a triangular scheme; the plain last quarter of both indices would mix
    the two orders on the diagonal block).
    """
    L = min(rows, cols)
    k = math.ceil(L / 4)
    outer = range(L - 2 * k + 1, L - k + 1)
    return {
        "lim_m_lim_n": (outer, range(cols - math.ceil(cols / 4) + 1, cols + 1)),
        "lim_n_lim_m": (range(rows - math.ceil(rows / 4) + 1, rows + 1), outer),
    }


def double_limit_table(
    phi: FormulaEvaluator,
    rows: int,
    cols: int,
    tol=DEFAULT_LIMIT_TOL,
    jobs: int | None = None,
) -> DoubleLimitReport:
    """Evaluate ``phi(a_m, b_n)`` for ``m <= rows``, ``n <= cols`` and compare iterated tails.

    ``lim_m lim_n`` averages each row over the last quarter of columns and
    then averages those row estimates over the outer window; ``lim_n lim_m``
    is the transpose.  The gap is the distance between the two ranges of
    per-index estimates: beyond ``tol`` the order property is witnessed, and
    two means within ``tol`` of each other are consistent with stability.
    """
    if rows < 4 or cols < 4:
        raise ValueError("double_limit_table needs at least 4 rows and 4 columns")
    tol = as_fraction(tol)
    matrix = parallel_map(lambda m: [phi.at(m, n) for n in range(1, cols + 1)], range(1, rows + 1), jobs)
    win = _tail_windows(rows, cols)
    outer_rows, inner_cols = win["lim_m_lim_n"]
    inner_rows, outer_cols = win["lim_n_lim_m"]
    row_est = [_mean([matrix[m - 1][n - 1] for n in inner_cols]) for m in outer_rows]
    col_est = [_mean([matrix[m - 1][n - 1] for m in inner_rows]) for n in outer_cols]
    a, b = _mean(row_est), _mean(col_est)
    a_lo, a_hi = min(v.lo for v in row_est), max(v.hi for v in row_est)
    b_lo, b_hi = min(v.lo for v in col_est), max(v.hi for v in col_est)
    gap = max(Fraction(0), b_lo - a_hi, a_lo - b_hi)
    if gap > tol:
        verdict = "order-property-witnessed"
    elif max(a.hi - b.lo, b.hi - a.lo) <= tol:
        verdict = "consistent-with-stability"
    else:
        verdict = "inconclusive"
    windows = {
        "lim_m_lim_n": [outer_rows.start, outer_rows.stop - 1, inner_cols.start, inner_cols.stop - 1],
        "lim_n_lim_m": [inner_rows.start, inner_rows.stop - 1, outer_cols.start, outer_cols.stop - 1],
    }
    return DoubleLimitReport(phi.name, rows, cols, matrix, a, b, windows, gap, tol, verdict)


def summing_basis_value(m: int, n: int) -> Fraction:
    """``||e_m + s_n||`` in c_0 by direct coordinate evaluation.

    >>> summing_basis_value(2, 5), summing_basis_value(3, 2)
    (Fraction(2, 1), Fraction(1, 1))
    """
    if m < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    return sup_norm(basis(m) + summing(n))


def summing_basis_table(rows: int, cols: int, jobs: int | None = None) -> list[list[Fraction]]:
    return parallel_map(
        lambda m: [summing_basis_value(m, n) for n in range(1, cols + 1)], range(1, rows + 1), jobs
    )


# ---------------------------------------------------------------------------
# Independence

Split = tuple[tuple[int, ...], tuple[int, ...]]
WitnessRule = Callable[[tuple, tuple, Fraction, Fraction], "FiniteVector | None"]


@dataclass(frozen=True)
class FunctionFamily:
    """Functions ``f_n`` on the unit ball of ``ambient``, with optional helpers.

    ``rules`` propose a witness for a split ``(P, M)`` given ``(r, s)``;
    ``feasibility`` classifies a split the search could not fill.
    """

    name: str
    ambient: NormSpace
    member: Callable[[int, FiniteVector], Fraction | Interval]
    rules: tuple[tuple[str, WitnessRule], ...] = ()
    feasibility: Callable[[tuple, tuple, Fraction, Fraction], str] | None = None

    def values(self, x: FiniteVector, depth: int) -> list[Interval]:
        return [as_interval(self.member(n, x)) for n in range(1, depth + 1)]


def translate_member(ambient: NormSpace):
    def f(n: int, x: FiniteVector) -> Interval:
        return norm_enclosure(x + basis(n), ambient)

    return f


def characteristic_rule(P, M, r, s) -> FiniteVector:
    """The indicator of ``M``: in c_0, ``||1_M + e_n||`` is 2 on ``M`` and 1 off it."""
    return make_vector([(j, 1) for j in M])


def _l2_g(p: int, m: int, s: Fraction, r: Fraction, q: Fraction) -> tuple[Fraction, Fraction]:
    """Slack function of the one-dimensional reduction and its derivative.

    With ``q = ||x||^2`` the split asks for ``x_n < (s^2-1-q)/2`` on P and
    ``x_n > (r^2-1-q)/2`` on M; the cheapest way to pay is the threshold
    mass on those coordinates, the rest of ``q`` sits on a spare one.
    """
    need_p = max((q + 1 - s * s) / 2, Fraction(0))
    need_m = max((r * r - 1 - q) / 2, Fraction(0))
    g = p * need_p**2 + m * need_m**2 - q
    dg = p * need_p - m * need_m - 1
    return g, dg


def l2_split_analysis(p: int, m: int, s, r, iterations: int = 200) -> tuple[str, Fraction | None]:
    """Decide whether some ``x`` in the l2 ball has ``||x+e_n|| < s`` on P, ``> r`` on M.

    Only the sizes of P and M matter.  The slack ``g`` is convex and C^1 in
    ``q``; a bisection on ``g'`` either finds ``g(q) < 0`` (feasible, and
    ``q`` is returned for building a witness) or closes the tangent lower
    bound above zero (infeasible).  Returns ``("undetermined", None)`` when
    neither happens within ``iterations`` steps.
    """
    s, r = as_fraction(s), as_fraction(r)
    if (p == 0 or s > 1) and (m == 0 or r < 1):
        return "feasible", Fraction(0)
    a, b = Fraction(0), Fraction(1)
    ga, da = _l2_g(p, m, s, r, a)
    gb, db = _l2_g(p, m, s, r, b)
    for end, g, d, inward in ((a, ga, da, da >= 0), (b, gb, db, db <= 0)):
        if inward:  # convex with the minimum at this end
            return ("feasible", end) if g < 0 else ("infeasible", None)
    for _ in range(iterations):
        if ga < 0:
            return "feasible", a
        if gb < 0:
            return "feasible", b
        q_star = (gb - ga + da * a - db * b) / (da - db)
        if ga + da * (q_star - a) >= 0:
            return "infeasible", None
        mid = (a + b) / 2
        gm, dm = _l2_g(p, m, s, r, mid)
        if gm < 0:
            return "feasible", mid
        if dm > 0:
            b, gb, db = mid, gm, dm
        else:
            a, ga, da = mid, gm, dm
    return "undetermined", None


def l2_feasibility(P, M, s, r) -> str:
    return l2_split_analysis(len(P), len(M), s, r)[0]


def l2_translate_rule(P, M, r, s) -> FiniteVector | None:
    """Build a witness from the one-dimensional reduction when it is feasible.

    Coordinates on P and M get their threshold values pushed inward by a
    margin ``delta`` that uses a quarter of the slack; the remaining mass
    goes to the coordinate after ``max(P ∪ M)``, rounded down to a rational.
    """
    status, q = l2_split_analysis(len(P), len(M), s, r)
    if status != "feasible":
        return None
    if q == 0:
        return make_vector([])
    need_p = max((q + 1 - s * s) / 2, Fraction(0))
    need_m = max((r * r - 1 - q) / 2, Fraction(0))
    slack = -_l2_g(len(P), len(M), s, r, q)[0]
    delta = slack / (4 * (len(P) + len(M) + 1))
    entries = [(n, -(need_p + delta)) for n in P] + [(n, need_m + delta) for n in M]
    mass = sum(v * v for _, v in entries)
    rest = q - mass
    spare = max((*P, *M), default=0) + 1
    if rest > 0:
        entries.append((spare, root_enclosure(rest, 2, delta * delta / 16).lo))
    return make_vector(sorted(entries))


def c0_translate_family() -> FunctionFamily:
    space = NormSpace.sup()
    return FunctionFamily("c0: |x+e_n|", space, translate_member(space), (("characteristic", characteristic_rule),))


def l2_translate_family() -> FunctionFamily:
    space = NormSpace.lp(2)
    return FunctionFamily(
        "l2: |x+e_n|", space, translate_member(space), (("l2-reduction", l2_translate_rule),), l2_feasibility
    )


def indicator_family() -> FunctionFamily:
    """``f_n(x) = 2`` if ``x_n > 0`` else 1: range {1, 2}."""
    return FunctionFamily("indicator: 1 + [x_n > 0]", NormSpace.sup(), lambda n, x: Fraction(2 if x[n] > 0 else 1))


FAMILIES: dict[str, Callable[[], FunctionFamily]] = {
    "c0": c0_translate_family,
    "l2": l2_translate_family,
    "indicator": indicator_family,
}


@dataclass
class Witness:
    vector: FiniteVector
    values: list[Interval]
    source: str

    def to_json(self) -> dict:
        return {
            "vector": self.vector.to_json(),
            "values": [_interval_json(v) for v in self.values],
            "source": self.source,
        }


@dataclass
class WitnessReport:
    family: str
    r: Fraction
    s: Fraction
    depth: int
    witnesses: dict[Split, Witness]
    unfilled: list[Split]
    feasibility: dict[Split, str] = field(default_factory=dict)
    budget: dict[str, int] = field(default_factory=dict)

    @property
    def independent(self) -> bool:
        return not self.unfilled

    @property
    def first_failing(self) -> Split | None:
        return self.unfilled[0] if self.unfilled else None

    def to_json(self) -> dict:
        key = lambda sp: f"P={','.join(map(str, sp[0]))};M={','.join(map(str, sp[1]))}"
        return {
            "family": self.family,
            "r": str(self.r),
            "s": str(self.s),
            "depth": self.depth,
            "status": f"independent at depth {self.depth}" if self.independent else "not witnessed",
            "splits": 2**self.depth,
            "witnesses": {key(sp): w.to_json() for sp, w in sorted(self.witnesses.items())},
            "unfilled": [
                {"split": key(sp), "feasibility": self.feasibility.get(sp, "not analysed")} for sp in self.unfilled
            ],
            "first_failing_pair": None if self.first_failing is None else key(self.first_failing),
            "budget": dict(self.budget),
        }


def _splits(depth: int) -> list[Split]:
    out = []
    for mask in range(1 << depth):
        M = tuple(n for n in range(1, depth + 1) if mask >> (n - 1) & 1)
        P = tuple(n for n in range(1, depth + 1) if not mask >> (n - 1) & 1)
        out.append((P, M))
    return out


def _classify(values: Sequence[Interval], r: Fraction, s: Fraction) -> Split | None:
    P = tuple(n for n, v in enumerate(values, 1) if v.hi < s)
    M = tuple(n for n, v in enumerate(values, 1) if v.lo > r)
    return (P, M) if len(P) + len(M) == len(values) else None


def verify_witness(family: FunctionFamily, x: FiniteVector, split: Split, r, s) -> list[Interval] | None:
    """Exact re-check: ``x`` is in the ball, ``f_n(x) < s`` on P and ``> r`` on M."""
    if norm_enclosure(x, family.ambient).hi > 1:
        return None
    P, M = split
    depth = len(P) + len(M)
    values = family.values(x, depth)
    if all(values[n - 1].hi < s for n in P) and all(values[n - 1].lo > r for n in M):
        return values
    return None


def independence_witness_search(
    family: FunctionFamily,
    r,
    s,
    depth: int,
    *,
    samples: int = 2000,
    seed: int = 0,
    step: Fraction = Fraction(1, 4),
    jobs: int | None = None,
) -> WitnessReport:
    """Fill every split ``{1..depth} = P ⊔ M`` with a point below ``s`` on P and above ``r`` on M.

    Witnesses are monotone in ``(P, M)``, so the ``2^depth`` complementary
    splits cover all disjoint pairs.  Registered rules are tried first; then
    ``samples`` seeded ball vectors are evaluated once each and file
    themselves under the split they realize.  Unfilled splits are reported
    with the family's feasibility analysis when it has one; running out of
    budget never turns into a claim of non-independence.
    """
    r, s = as_fraction(r), as_fraction(s)
    if not s < r:
        raise ValueError("need s < r")
    if not 1 <= depth <= 16:
        raise ValueError("depth must be between 1 and 16")
    witnesses: dict[Split, Witness] = {}
    attempts = 0
    for split in _splits(depth):
        for name, rule in family.rules:
            attempts += 1
            x = rule(split[0], split[1], r, s)
            if x is None:
                continue
            values = verify_witness(family, x, split, r, s)
            if values is not None:
                witnesses[split] = Witness(x, values, f"rule:{name}")
                break
    rng = random.Random(seed)
    used = 0
    chunk = 256
    while used < samples and len(witnesses) < 2**depth:
        batch = [random_ball_vector(rng, family.ambient, depth + 1, step) for _ in range(min(chunk, samples - used))]
        used += len(batch)
        for x, values in zip(batch, parallel_map(lambda x: family.values(x, depth), batch, jobs)):
            split = _classify(values, r, s)
            if split is not None and split not in witnesses:
                witnesses[split] = Witness(x, values, "sampler")
    unfilled = [sp for sp in _splits(depth) if sp not in witnesses]
    feas = {}
    if family.feasibility is not None:
        feas = {sp: _feasibility_label(family.feasibility(sp[0], sp[1], s, r)) for sp in unfilled}
    return WitnessReport(
        family.name, r, s, depth, witnesses, unfilled, feas, {"rule_attempts": attempts, "samples": used}
    )


def _feasibility_label(status: str) -> str:
    return {"feasible": "feasible-unwitnessed"}.get(status, status)


def restrict_report(report: WitnessReport, family: FunctionFamily, depth: int) -> WitnessReport:
    """Reuse depth-``k`` witnesses at a smaller depth (each is re-verified)."""
    if not 1 <= depth <= report.depth:
        raise ValueError("restricted depth must be between 1 and the report depth")
    witnesses = {}
    for P, M in _splits(depth):
        for (P2, M2), w in sorted(report.witnesses.items()):
            if set(P) <= set(P2) and set(M) <= set(M2):
                values = verify_witness(family, w.vector, (P, M), report.r, report.s)
                if values is not None:
                    witnesses[(P, M)] = Witness(w.vector, values, w.source)
                    break
    unfilled = [sp for sp in _splits(depth) if sp not in witnesses]
    return WitnessReport(report.family, report.r, report.s, depth, witnesses, unfilled, {}, dict(report.budget))


# ---------------------------------------------------------------------------
# Strict order property


@dataclass
class SopReport:
    name: str
    depth: int
    samples: int
    monotone_checks: int
    strict_checks: int
    violations: list[dict]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "evaluator": self.name,
            "depth": self.depth,
            "samples": self.samples,
            "monotone_checks": self.monotone_checks,
            "strict_checks": self.strict_checks,
            "status": "pass" if self.passed else "fail",
            "violations": self.violations,
        }


def sop_monotonicity_check(
    psi: FormulaEvaluator,
    depth: int,
    *,
    samples: int = 200,
    seed: int = 0,
    jobs: int | None = None,
) -> SopReport:
    """Check ``psi(x, b_m) <= psi(x, b_n)`` for ``m <= n`` and ``psi(a_n, b_m) < psi(a_m, b_n)`` for ``m < n``.

    The monotone half runs over ``samples`` seeded points of the unit ball
    supported in ``[1, depth + 1]``; the strict chain is checked on every
    pair.  ``depth = 1`` is vacuous.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = random.Random(seed)
    xs = [random_ball_vector(rng, psi.ambient, depth + 1) for _ in range(samples if depth > 1 else 0)]
    rows = parallel_map(lambda x: [psi(x, psi.right(m)) for m in range(1, depth + 1)], xs, jobs)
    violations = []
    mono = 0
    for x, vals in zip(xs, rows):
        for m, n in combinations(range(1, depth + 1), 2):
            mono += 1
            if not vals[m - 1].hi <= vals[n - 1].lo:
                violations.append(
                    {
                        "kind": "monotone",
                        "x": x.to_json(),
                        "m": m,
                        "n": n,
                        "psi_m": _interval_json(vals[m - 1]),
                        "psi_n": _interval_json(vals[n - 1]),
                    }
                )
    strict = 0
    for m, n in combinations(range(1, depth + 1), 2):
        strict += 1
        below, above = psi(psi.left(n), psi.right(m)), psi(psi.left(m), psi.right(n))
        if not below.hi < above.lo:
            violations.append(
                {"kind": "strict", "m": m, "n": n, "psi_n_m": _interval_json(below), "psi_m_n": _interval_json(above)}
            )
    return SopReport(psi.name, depth, len(xs), mono, strict, violations)
