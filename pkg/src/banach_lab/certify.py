"""Certified equivalence constants between vector systems and l_p / c_0 bases.

For a system ``X = (x_1..x_d)`` the ratio ``F(r) = ||sum r_i x_i|| / ||r||_p``
is evaluated on the l_1 unit sphere, one simplex per sign pattern.  The
simplices are bisected along their longest edge, always splitting the cell
with the weakest bound.  Sampled extrema are inner bounds for ``inf F`` and
``sup F``; outer bounds come from the Lipschitz estimate of ``F`` over each
cell's l_1 radius (``r -> ||sum r_i x_i||`` is ``max ||x_i||``-Lipschitz in
l_1) and, where applicable, from structural bounds (triangle inequality,
disjoint supports, admissible Tsirelson blocks) valid on the whole sphere.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .vectors import (
    FiniteVector,
    Interval,
    NormSpace,
    combine,
    lp_enclosure,
    make_vector,
    norm_enclosure,
    root_enclosure,
)

INF = math.inf


@dataclass(frozen=True)
class CertifyBudget:
    """Resolution schedule and limits for one certificate.

    ``initial_steps`` sets the uniform warm start (about that many cells per
    edge), ``max_points`` caps ratio evaluations, and ``use_symmetry`` skips
    sign patterns when the vectors are disjointly supported.
    """

    initial_steps: int = 8
    max_points: int = 50_000
    target_rel_width: Fraction = Fraction(1, 100)
    tol: Fraction = Fraction(1, 10**12)
    use_symmetry: bool = True


@dataclass
class EquivalenceCertificate:
    p: Fraction | float
    ambient: NormSpace
    c_lower: Interval
    c_upper: Interval
    witness_lower: tuple[Fraction, ...]
    witness_upper: tuple[Fraction, ...]
    resolution: Fraction
    covering_radius: Fraction
    lipschitz_bound: Fraction
    grid_points: int
    structural: list[str] = field(default_factory=list)
    conclusive: bool = True

    def to_json(self) -> dict:
        return {
            "p": _p_str(self.p),
            "ambient": str(self.ambient),
            "c_lower": self.c_lower.to_json(),
            "c_upper": self.c_upper.to_json(),
            "witness_lower": [str(v) for v in self.witness_lower],
            "witness_upper": [str(v) for v in self.witness_upper],
            "resolution": str(self.resolution),
            "covering_radius": str(self.covering_radius),
            "lipschitz_bound": str(self.lipschitz_bound),
            "grid_points": self.grid_points,
            "structural_bounds": list(self.structural),
            "status": "conclusive" if self.conclusive else "inconclusive",
        }


@dataclass
class TypeCheckResult:
    verdict: str  # "pass" | "violation" | "inconclusive"
    margin: Fraction
    coefficients: tuple[Fraction, ...] | None
    side: str | None
    certificate: EquivalenceCertificate
    eps: Fraction

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": str(self.margin),
            "eps": str(self.eps),
            "violating_coefficients": None if self.coefficients is None else [str(v) for v in self.coefficients],
            "violated_inequality": self.side,
            "certificate": self.certificate.to_json(),
        }


def _p_str(p) -> str:
    return "inf" if p == INF else str(p)


def parse_p(text) -> Fraction | float:
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if text == INF:
        return INF
    p = Fraction(text)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


# ---------------------------------------------------------------------------
# sphere cells


def _disjoint(X: Sequence[FiniteVector]) -> bool:
    seen: set[int] = set()
    for x in X:
        s = set(x.support)
        if s & seen:
            return False
        seen |= s
    return True


def _successive(X: Sequence[FiniteVector]) -> bool:
    return all(a and b and a.support[-1] < b.support[0] for a, b in zip(X, X[1:])) and all(X)


def _d_power(dim: int, exponent: Fraction, tol: Fraction) -> Interval:
    """Enclosure of ``dim ** exponent`` for rational ``exponent >= 0``."""
    if exponent == 0:
        return Interval.point(1)
    return root_enclosure(Fraction(dim) ** exponent.numerator, exponent.denominator, tol)


def structural_bounds(
    X: Sequence[FiniteVector], p, ambient: NormSpace, norms: Sequence[Interval], tol: Fraction
) -> tuple[Fraction, Fraction | None, list[str]]:
    """Bounds on ``inf F`` and ``sup F`` valid on the whole sphere."""
    d = len(X)
    lo, hi, why = Fraction(0), None, []
    nmin = min(n.lo for n in norms)
    nmax = max(n.hi for n in norms)
    # ||sum r_i x_i|| <= max||x_i|| ||r||_1 <= max||x_i|| d^(1-1/p) ||r||_p
    if p == INF:
        hi = nmax * d
    else:
        hi = nmax * _d_power(d, 1 - 1 / Fraction(p), tol).hi
    why.append("triangle inequality")
    if not _disjoint(X):
        return lo, hi, why
    if (ambient.kind == "lp" and ambient.p == p) or (ambient.kind == "sup" and p == INF):
        # disjoint blocks in l_p span l_p^d with weights ||x_i||
        return nmin, min(hi, nmax), why + [f"disjoint blocks in {ambient} with p={_p_str(p)}"]
    # 1-unconditional ambient: projecting onto one block cannot increase the norm
    if p == INF:
        proj = nmin
    else:
        proj = nmin / _d_power(d, 1 / Fraction(p), tol).hi
    if proj > lo:
        lo = proj
        why.append("projection onto one block (1-unconditional ambient)")
    if ambient.kind == "tsirelson" and _successive(X) and d <= X[0].support[0]:
        # the blocks form an admissible family: ||sum r_i x_i|| >= 1/2 sum |r_i| ||x_i||
        # >= 1/2 min||x_i|| ||r||_1 >= 1/2 min||x_i|| ||r||_p
        half = nmin / 2
        if half > lo:
            lo = half
            why.append("blocks form an admissible family")
    return lo, hi, why


# ---------------------------------------------------------------------------
# certificate


def _parts(point, X, p, ambient, tol) -> tuple[Interval, Interval]:
    """``(||sum r_i x_i||, ||r||_p)`` as enclosures."""
    value = norm_enclosure(combine(point, X), ambient, tol)
    return value, (Interval.point(1) if p == 1 else lp_enclosure(point, p, tol))


def _ratio(args) -> Interval:
    g, n = _parts(*args)
    return g if n.exact and n.lo == 1 else g / n


def _l1(u, v) -> Fraction:
    return sum((abs(a - b) for a, b in zip(u, v)), Fraction(0))


@dataclass
class _Cell:
    """A simplex on one orthant face of the l_1 sphere."""

    vertices: tuple[tuple[Fraction, ...], ...]
    center: tuple[Fraction, ...]
    lower: Fraction = Fraction(0)
    upper: Fraction = Fraction(0)
    radius: Fraction = Fraction(0)

    @classmethod
    def of(cls, vertices) -> "_Cell":
        k = len(vertices)
        center = tuple(sum(c) / k for c in zip(*vertices))
        return cls(tuple(vertices), center)

    def split(self) -> tuple["_Cell", "_Cell"]:
        """Bisect the longest edge."""
        vs = self.vertices
        _, a, b = max((_l1(vs[i], vs[j]), i, j) for i in range(len(vs)) for j in range(i + 1, len(vs)))
        mid = tuple((x + y) / 2 for x, y in zip(vs[a], vs[b]))
        left = vs[:a] + (mid,) + vs[a + 1 :]
        right = vs[:b] + (mid,) + vs[b + 1 :]
        return _Cell.of(left), _Cell.of(right)


def _orthant_cells(dim: int, signed: bool) -> list[_Cell]:
    unit = [tuple(Fraction(int(i == k)) for i in range(dim)) for k in range(dim)]
    if not signed:
        return [_Cell.of(unit)]
    cells = []
    # the ratio is even in r, so the first coordinate may be taken nonnegative
    for signs in product((1, -1), repeat=dim - 1):
        full = (1,) + signs
        cells.append(_Cell.of([tuple(s * c for c in v) for s, v in zip(full, unit)]))
    return cells


class _Search:
    """Branch and bound over sphere cells for ``inf F`` and ``sup F``.

    On a cell with centre ``c``: ``||sum u_i x_i||`` and ``||u||_p`` are
    convex in ``u``, so their maxima sit at the vertices; below, the
    numerator loses at most ``max_v sum_i |v_i - c_i| ||x_i||`` and the
    denominator at most the l_1 radius.
    """

    def __init__(self, X, p, ambient, budget: CertifyBudget, norms):
        self.X, self.p, self.ambient, self.budget = X, p, ambient, budget
        self.d = len(X)
        self.weights = [n.hi for n in norms]
        self.L = max(self.weights)
        if p == 1:
            self.m_p = Fraction(1)
        elif p == INF:
            self.m_p = Fraction(1, self.d)
        else:
            # min of ||u||_p on the l_1 sphere is d^(1/p - 1)
            self.m_p = 1 / _d_power(self.d, 1 - 1 / Fraction(p), budget.tol).hi
        self.parts: dict[tuple[Fraction, ...], tuple[Interval, Interval]] = {}
        self.values: dict[tuple[Fraction, ...], Interval] = {}
        self.lo_heap: list = []
        self.hi_heap: list = []
        self.alive: dict[int, _Cell] = {}
        self.counter = 0
        self.argmin = self.argmax = None

    def evaluate(self, point) -> tuple[Interval, Interval]:
        hit = self.parts.get(point)
        if hit is None:
            hit = _parts(point, self.X, self.p, self.ambient, self.budget.tol)
            self.parts[point] = hit
            g, n = hit
            f = g if self.p == 1 else g / n
            self.values[point] = f
            # first point reaching an extremum is kept, so witnesses are deterministic
            if self.argmin is None or f.hi < self.values[self.argmin].hi:
                self.argmin = point
            if self.argmax is None or f.lo > self.values[self.argmax].lo:
                self.argmax = point
        return hit

    def add(self, cell: _Cell) -> None:
        g_c, n_c = self.evaluate(cell.center)
        vert = [self.evaluate(v) for v in cell.vertices]
        drop = max(
            sum((abs(a - b) * w for a, b, w in zip(v, cell.center, self.weights)), Fraction(0))
            for v in cell.vertices
        )
        cell.radius = max(_l1(v, cell.center) for v in cell.vertices)
        g_max = max(g.hi for g, _ in vert)
        if self.p == 1:
            n_max = n_min = Fraction(1)
        else:
            n_max = max(n.hi for _, n in vert)
            n_min = max(n_c.lo - cell.radius, self.m_p)
        cell.lower = max(g_c.lo - drop, Fraction(0)) / n_max
        cell.upper = g_max / n_min
        self.counter += 1
        self.alive[self.counter] = cell
        heapq.heappush(self.lo_heap, (cell.lower, self.counter))
        heapq.heappush(self.hi_heap, (-cell.upper, self.counter))

    def _top(self, heap):
        while heap and heap[0][1] not in self.alive:
            heapq.heappop(heap)
        return heap[0]

    def outer(self) -> tuple[Fraction, Fraction]:
        return self._top(self.lo_heap)[0], -self._top(self.hi_heap)[0]

    def split(self, key: int) -> None:
        cell = self.alive.pop(key)
        for child in cell.split():
            self.add(child)

    def split_top(self, heap) -> None:
        self.split(self._top(heap)[1])

    def inner(self):
        return self.argmin, self.argmax

    def finest(self) -> Fraction:
        return min(c.radius for c in self.alive.values())


def equivalence_constants(
    X: Sequence[FiniteVector],
    p,
    ambient: NormSpace,
    budget: CertifyBudget = CertifyBudget(),
) -> EquivalenceCertificate:
    """Certify ``c_lower <= ||sum r_i x_i|| / ||r||_p <= c_upper`` on the whole sphere.

    Cells with the weakest outer bound are bisected until both enclosures
    are narrower than ``budget.target_rel_width`` times the upper constant,
    or until ``budget.max_points`` ratios have been evaluated; in the
    latter case the certificate is marked inconclusive but its enclosures
    remain rigorous.
    """
    X = list(X)
    if not X:
        raise ValueError("need at least one vector")
    if any(not x for x in X):
        raise ValueError("zero vector in system")
    p = parse_p(p)
    norms = [norm_enclosure(x, ambient, budget.tol) for x in X]
    s_lo, s_hi, why = structural_bounds(X, p, ambient, norms, budget.tol)
    signed = not (budget.use_symmetry and _disjoint(X))
    search = _Search(X, p, ambient, budget, norms)
    cells = _orthant_cells(len(X), signed)
    for cell in cells:
        search.add(cell)

    def bounds():
        o_lo, o_hi = search.outer()
        w_min, w_max = search.inner()
        inner_lo, inner_hi = search.values[w_min].hi, search.values[w_max].lo
        lo = min(max(o_lo, s_lo, Fraction(0)), inner_lo)
        hi = max(min(o_hi, s_hi) if s_hi is not None else o_hi, inner_hi)
        target = budget.target_rel_width * max(inner_hi, Fraction(1, 10**9))
        closed = inner_lo - lo <= target and hi - inner_hi <= target
        return w_min, w_max, inner_lo, inner_hi, lo, hi, closed

    # uniform warm start: every cell bisected until there are enough to see the
    # shape, unless the bounds already close or a quarter of the budget is gone
    for _ in range(max(0, budget.initial_steps.bit_length() - 1) * (len(X) - 1)):
        if bounds()[-1] or len(search.values) * 4 >= budget.max_points:
            break
        for key in list(search.alive):
            search.split(key)
    conclusive = True
    while True:
        w_min, w_max, inner_lo, inner_hi, lo, hi, closed = bounds()
        gap_lo, gap_hi = inner_lo - lo, hi - inner_hi
        if closed:
            break
        if len(search.values) >= budget.max_points:
            conclusive = False
            break
        search.split_top(search.lo_heap if gap_lo * 1 >= gap_hi else search.hi_heap)
    return EquivalenceCertificate(
        p=p,
        ambient=ambient,
        c_lower=Interval(lo, inner_lo),
        c_upper=Interval(inner_hi, hi),
        witness_lower=w_min,
        witness_upper=w_max,
        resolution=search.finest(),
        covering_radius=max(c.radius for c in search.alive.values()),
        lipschitz_bound=search.L,
        grid_points=len(search.values),
        structural=list(why),
        conclusive=conclusive,
    )


def _primitive(r: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Rescale a coefficient vector to coprime integers (the inequalities are homogeneous)."""
    den = math.lcm(*(v.denominator for v in r))
    ints = [int(v * den) for v in r]
    g = math.gcd(*ints) or 1
    return tuple(Fraction(v // g) for v in ints)


def check_eps_lp_type(
    X: Sequence[FiniteVector],
    p,
    eps,
    ambient: NormSpace,
    budget: CertifyBudget = CertifyBudget(),
) -> TypeCheckResult:
    """Check ``(1+eps)^-1 ||sum r_i x_i|| <= ||r||_p ||x_0|| <= (1+eps) ||sum r_i x_i||``.

    ``x_0 = X[0]`` is the yardstick.  ``pass`` is certified on the whole
    sphere; ``violation`` comes with explicit coefficients (scaled to
    coprime integers) for which an inequality fails exactly.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    cert = equivalence_constants(X, p, ambient, budget)
    yard = norm_enclosure(X[0], ambient, budget.tol)
    low_thr = yard / (1 + eps)
    high_thr = yard * (1 + eps)
    X = list(X)
    w_lo = _ratio((cert.witness_lower, X, cert.p, ambient, budget.tol))
    w_hi = _ratio((cert.witness_upper, X, cert.p, ambient, budget.tol))
    if w_lo.hi < low_thr.lo:
        return TypeCheckResult("violation", low_thr.lo - w_lo.hi, _primitive(cert.witness_lower), "lower", cert, eps)
    if w_hi.lo > high_thr.hi:
        return TypeCheckResult("violation", w_hi.lo - high_thr.hi, _primitive(cert.witness_upper), "upper", cert, eps)
    margin = min(cert.c_lower.lo - low_thr.hi, high_thr.lo - cert.c_upper.hi)
    verdict = "pass" if margin >= 0 else "inconclusive"
    return TypeCheckResult(verdict, margin, None, None, cert, eps)


# ---------------------------------------------------------------------------
# block representation search


@dataclass
class BlockRepResult:
    success: bool
    vectors: list[FiniteVector]
    distortion: Fraction | None
    evaluations: int
    check: TypeCheckResult | None

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "status": "found" if self.success else "budget exhausted",
            "vectors": [v.to_json() for v in self.vectors],
            "witnessed_distortion": None if self.distortion is None else str(self.distortion),
            "evaluations": self.evaluations,
            "check": None if self.check is None else self.check.to_json(),
        }


Blocks = tuple[tuple[tuple[int, Fraction], ...], ...]


def _blocks_to_vectors(blocks: Blocks) -> list[FiniteVector]:
    return [make_vector(b) for b in blocks]


def _distortion(cert: EquivalenceCertificate, yard: Interval) -> Fraction | None:
    # witnessed values, not the certified bounds: a cheap, honest guide for
    # the search; the certificate proper is only run on promising blocks
    if cert.c_lower.hi <= 0:
        return None
    return max(cert.c_upper.lo / yard.mid, yard.mid / cert.c_lower.hi)


def _moves(blocks: Blocks, limit: int) -> Iterator[Blocks]:
    top = blocks[-1][-1][0]
    if top < limit:
        yield tuple(tuple((i + 1, w) for i, w in b) for b in blocks)
    for j, b in enumerate(blocks):
        nxt = blocks[j + 1][0][0] if j + 1 < len(blocks) else limit + 1
        last = b[-1][0]
        if last + 1 < nxt:
            yield blocks[:j] + (b + ((last + 1, Fraction(1)),),) + blocks[j + 1 :]
        if len(b) > 1:
            yield blocks[:j] + (b[:-1],) + blocks[j + 1 :]
        for k, (i, w) in enumerate(b):
            for factor in (Fraction(2), Fraction(1, 2)):
                nb = b[:k] + ((i, w * factor),) + b[k + 1 :]
                yield blocks[:j] + (nb,) + blocks[j + 1 :]


def block_rep_search(
    ambient: NormSpace,
    basis_range: int,
    p,
    eps,
    n: int,
    budget: CertifyBudget = CertifyBudget(),
    max_evaluations: int = 300,
) -> BlockRepResult:
    """Look for successive blocks ``y_0..y_n`` inside ``[1, basis_range]`` of eps-l_p type.

    Coordinate ascent over block supports and weights: shift all blocks,
    grow or shrink one block, or double/halve one weight, keeping the move
    that most reduces the certified distortion (or the first one that meets
    the target); with no improving move the blocks are shifted right.  Failure after ``max_evaluations``
    certificates (or at the end of the range) is reported, not raised.
    """
    eps = Fraction(eps)
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    if n + 1 > basis_range:
        raise ValueError("basis range too small for n + 1 blocks")
    search_budget = replace(budget, max_points=min(budget.max_points, 400))
    blocks: Blocks = tuple(((i, Fraction(1)),) for i in range(1, n + 2))
    evaluations = 0
    cache: dict[Blocks, Fraction | None] = {}

    def score(bl: Blocks) -> Fraction | None:
        nonlocal evaluations
        if bl not in cache:
            evaluations += 1
            ys = _blocks_to_vectors(bl)
            cert = equivalence_constants(ys, p, ambient, search_budget)
            cache[bl] = _distortion(cert, norm_enclosure(ys[0], ambient, budget.tol))
        return cache[bl]

    def better(a, b) -> bool:
        return a is not None and (b is None or a < b)

    best_blocks, best = blocks, score(blocks)
    while evaluations < max_evaluations:
        current = score(blocks)
        if current is not None and current <= 1 + eps:
            ys = _blocks_to_vectors(blocks)
            check = check_eps_lp_type(ys, p, eps, ambient, budget)
            if check.verdict == "pass":
                return BlockRepResult(True, ys, current, evaluations, check)
        step, step_score = None, current
        for cand in _moves(blocks, basis_range):
            if evaluations >= max_evaluations:
                break
            s = score(cand)
            if better(s, step_score):
                step, step_score = cand, s
                if s <= 1 + eps:
                    break
        if step is None:
            if blocks[-1][-1][0] >= basis_range:
                break
            step = next(_moves(blocks, basis_range))  # shift right
        blocks = step
        if better(score(blocks), best):
            best_blocks, best = blocks, score(blocks)
    ys = _blocks_to_vectors(best_blocks)
    return BlockRepResult(False, ys, best, evaluations, None)
