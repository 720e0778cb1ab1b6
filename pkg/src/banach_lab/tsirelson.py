"""Exact Tsirelson (Figiel-Johnson) norm on finitely supported vectors.

The norm is the unique solution of

    ||x|| = max(||x||_inf, sup 1/2 * sum_i ||E_i x||)

over admissible families ``n <= E_1 < E_2 < ... < E_n``.  On a vector with
support ``s_1 < ... < s_m`` only the pieces' intersections with the support
matter, and by 1-unconditionality each piece may be widened to a run of
consecutive support points.  A family is then a start position ``j`` plus a
split of ``s_j..s_last`` into consecutive groups, with at most ``s_j``
groups.  Since ``||(A u B)x|| <= ||Ax|| + ||Bx||``, using the largest
allowed number of groups is never worse, and every group of a family with
two or more groups is a strictly shorter segment.  This gives a terminating
dynamic program over the ``O(m^2)`` contiguous segments of the support.

All arithmetic is on integers: absolute values are scaled by the common
denominator and by ``2**m``, which absorbs the at most ``m - 1`` nested
halvings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .vectors import BudgetExceeded, FiniteVector, restrict_interval, sup_norm

DEFAULT_MAX_SUPPORT = 20
DEFAULT_MAX_SPAN = 40

Family = tuple[tuple[int, int], ...]


def is_admissible(family: Family) -> bool:
    """``n <= a_1`` and the intervals are nonempty, ordered and disjoint."""
    if not family:
        return False
    if any(a > b for a, b in family):
        return False
    if any(prev[1] >= nxt[0] for prev, nxt in zip(family, family[1:])):
        return False
    return len(family) <= family[0][0]


def admissible_families(lo: int, hi: int, max_pieces: int) -> Iterator[Family]:
    """Yield every admissible family of integer intervals inside ``[lo, hi]``.

    Families have at most ``max_pieces`` intervals and are produced once
    each, ordered lexicographically by ``(n, a_1, b_1, a_2, b_2, ...)``.
    """
    if not 1 <= lo <= hi:
        raise ValueError(f"need 1 <= lo <= hi, got lo={lo}, hi={hi}")

    def tails(start: int, count: int) -> Iterator[Family]:
        if count == 0:
            yield ()
            return
        # leave room for count - 1 more intervals after this one
        for a in range(start, hi - count + 2):
            for b in range(a, hi - count + 2):
                for rest in tails(b + 1, count - 1):
                    yield ((a, b),) + rest

    for n in range(1, max_pieces + 1):
        if hi - max(lo, n) + 1 < n:
            continue
        for a1 in range(max(lo, n), hi - n + 2):
            for b1 in range(a1, hi - n + 2):
                for rest in tails(b1 + 1, n - 1):
                    yield ((a1, b1),) + rest


@dataclass
class NormComputation:
    """Result of an exact evaluation together with its optimal family tree."""

    input: FiniteVector
    value: Fraction
    witness: dict
    iterates: list[Fraction] | None = None
    subvectors: int = 0
    cache_hits: int = 0

    def to_json(self) -> dict:
        out = {
            "input": self.input.to_json(),
            "value": str(self.value),
            "witness": self.witness,
            "stats": {"subvectors": self.subvectors, "cache_hits": self.cache_hits},
        }
        if self.iterates is not None:
            out["iterates"] = [str(v) for v in self.iterates]
        return out


def _check_budget(x: FiniteVector, max_support: int, max_span: int) -> None:
    m = len(x)
    if m > max_support:
        raise BudgetExceeded(f"support size {m} exceeds budget {max_support}")
    if m and x.support[-1] - x.support[0] + 1 > max_span:
        raise BudgetExceeded(
            f"support span {x.support[-1] - x.support[0] + 1} exceeds budget {max_span}"
        )


class _SegmentTable:
    """Integer dynamic program over contiguous segments of one support.

    ``values[(a, b)]`` is the (scaled) norm of the restriction of x to
    support positions ``a..b``; ``level_values`` supplies the norm used
    inside the families, which is the table itself for the exact norm and
    the previous level for the iterates.
    """

    def __init__(self, idx: list[int], level_values: dict | None):
        self.idx = idx
        self.inner = level_values
        self.values: dict[tuple[int, int], int] = {}
        self.choice: dict[tuple[int, int], tuple[int, tuple[int, ...]] | None] = {}
        self._part: dict[tuple[int, int, int], tuple[int, tuple[int, ...]]] = {}
        self.hits = 0

    def _inner(self, a: int, b: int) -> int:
        return (self.inner if self.inner is not None else self.values)[(a, b)]

    def part(self, j: int, b: int, n: int) -> tuple[int, tuple[int, ...]]:
        """Best sum over splits of positions ``j..b`` into ``n`` groups, and the cuts."""
        if n == 1:
            return self._inner(j, b), ()
        key = (j, b, n)
        hit = self._part.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        best, best_cuts = -1, ()
        for k in range(j, b - n + 2):
            rest, cuts = self.part(k + 1, b, n - 1)
            v = self._inner(j, k) + rest
            if v > best:
                best, best_cuts = v, (k,) + cuts
        self._part[key] = (best, best_cuts)
        return best, best_cuts

    def solve(self, a: int, b: int, sup_value: int, floor: int | None = None) -> None:
        v = sup_value if floor is None else max(sup_value, floor)
        choice = None
        for j in range(a, b):
            n = min(self.idx[j], b - j + 1)
            if n < 2:
                continue
            total, cuts = self.part(j, b, n)
            assert total % 2 == 0, "scaling too coarse"
            if total // 2 > v:
                v, choice = total // 2, (j, cuts)
        self.values[(a, b)] = v
        self.choice[(a, b)] = choice


def _scaled_abs(x: FiniteVector, halvings: int) -> tuple[list[int], list[int], int]:
    idx = list(x.support)
    den = math.lcm(*(v.denominator for v in x.values)) if x else 1
    factor = den * 2**halvings
    vals = [int(abs(v) * factor) for v in x.values]
    return idx, vals, factor


def _tree(table: _SegmentTable, a: int, b: int, factor: int) -> dict:
    idx = table.idx
    node = {"support": [idx[a], idx[b]], "value": str(Fraction(table.values[(a, b)], factor))}
    choice = table.choice[(a, b)]
    if choice is None:
        node["attained_by"] = "sup"
        return node
    j, cuts = choice
    bounds = [j] + [c + 1 for c in cuts]
    ends = list(cuts) + [b]
    node["attained_by"] = "family"
    node["family"] = [[idx[s], idx[e]] for s, e in zip(bounds, ends)]
    node["children"] = [_tree(table, s, e, factor) for s, e in zip(bounds, ends)]
    return node


def evaluate(
    x: FiniteVector,
    *,
    iterates: int | None = None,
    max_support: int = DEFAULT_MAX_SUPPORT,
    max_span: int = DEFAULT_MAX_SPAN,
) -> NormComputation:
    """Exact norm with its optimal family tree; optionally the first iterates too."""
    _check_budget(x, max_support, max_span)
    m = len(x)
    if m == 0:
        its = None if iterates is None else [Fraction(0)] * (iterates + 1)
        return NormComputation(x, Fraction(0), {"support": [], "value": "0", "attained_by": "sup"}, its)
    idx, vals, factor = _scaled_abs(x, m)
    table = _SegmentTable(idx, None)
    for length in range(1, m + 1):
        for a in range(m - length + 1):
            b = a + length - 1
            table.solve(a, b, max(vals[a : b + 1]))
    value = Fraction(table.values[(0, m - 1)], factor)
    its = tsirelson_iterates(x, iterates, max_support=max_support, max_span=max_span) if iterates is not None else None
    return NormComputation(
        input=x,
        value=value,
        witness=_tree(table, 0, m - 1, factor),
        iterates=its,
        subvectors=len(table.values),
        cache_hits=table.hits,
    )


def tsirelson_norm(
    x: FiniteVector,
    *,
    max_support: int = DEFAULT_MAX_SUPPORT,
    max_span: int = DEFAULT_MAX_SPAN,
) -> Fraction:
    """Exact Tsirelson norm of ``x``.

    Raises :class:`BudgetExceeded` beyond ``max_support`` nonzero entries or
    a support span of ``max_span`` rather than approximating.

    >>> from banach_lab.vectors import make_vector
    >>> tsirelson_norm(make_vector([(3, 1), (4, 1), (5, 1)]))
    Fraction(3, 2)
    """
    return evaluate(x, max_support=max_support, max_span=max_span).value


def tsirelson_iterates(
    x: FiniteVector,
    n: int,
    *,
    max_support: int = DEFAULT_MAX_SUPPORT,
    max_span: int = DEFAULT_MAX_SPAN,
) -> list[Fraction]:
    """``[||x||_0, ..., ||x||_n]`` from the inductive definition.

    ``||x||_0`` is the sup norm and each step takes the max with the best
    admissible family measured in the previous iterate.
    """
    if n < 0:
        raise ValueError("number of iterates must be >= 0")
    _check_budget(x, max_support, max_span)
    m = len(x)
    if m == 0:
        return [Fraction(0)] * (n + 1)
    # a level only changes if some family nests one level deeper, so the
    # sequence is constant after m - 1 steps; m halvings keep it integral
    idx, vals, factor = _scaled_abs(x, m)
    segments = [(a, a + length - 1) for length in range(1, m + 1) for a in range(m - length + 1)]
    level = {(a, b): max(vals[a : b + 1]) for a, b in segments}
    out = [Fraction(level[(0, m - 1)], factor)]
    for _ in range(n):
        table = _SegmentTable(idx, level)
        for a, b in segments:
            table.solve(a, b, max(vals[a : b + 1]), floor=level[(a, b)])
        if table.values == level:
            out.extend([out[-1]] * (n + 1 - len(out)))
            break
        level = table.values
        out.append(Fraction(level[(0, m - 1)], factor))
    return out


def family_value(x: FiniteVector, family: Family, norm=tsirelson_norm) -> Fraction:
    """``1/2 * sum ||E_i x||`` for one family of intervals."""
    return sum((norm(restrict_interval(x, a, b)) for a, b in family), Fraction(0)) / 2


def fixed_point_rhs(x: FiniteVector, norm=tsirelson_norm, max_pieces: int | None = None) -> Fraction:
    """Right-hand side of the defining equation, by plain family enumeration.

    Enumerates every admissible interval family inside the support hull,
    so it is slow; it is meant for cross-checking :func:`tsirelson_norm`.
    """
    if not x:
        return Fraction(0)
    lo, hi = x.support[0], x.support[-1]
    pieces = hi - lo + 1 if max_pieces is None else max_pieces
    best = sup_norm(x)
    for family in admissible_families(lo, hi, pieces):
        best = max(best, family_value(x, family, norm))
    return best
