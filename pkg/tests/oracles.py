"""Independent reference computations used only by the tests.

Nothing here calls into the dynamic program under test: the Tsirelson
oracle runs the inductive definition directly over arbitrary finite-set
families encoded as bitmasks, the admissible-family oracle enumerates
subset families, and the feasibility oracle for the l2 translate family
solves its one-dimensional quadratic reduction in exact arithmetic.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np


@lru_cache(maxsize=None)
def set_families(universe: int) -> tuple[tuple[int, ...], ...]:
    """Every admissible family E_1 < ... < E_n of subsets of {1..universe}, as bitmasks."""
    out = []

    def extend(prefix: tuple[int, ...], first_min: int, start: int):
        # choose the next set: a nonempty subset of {start..universe}; record its max
        for mask in range(1, 1 << universe):
            lo = (mask & -mask).bit_length()
            if lo < start:
                continue
            fam = prefix + (mask,)
            fmin = first_min if prefix else lo
            if len(fam) <= fmin:
                out.append(fam)
            hi = mask.bit_length()
            if hi < universe and len(fam) < fmin:
                extend(fam, fmin, hi + 1)

    extend((), 0, 1)
    return tuple(out)


def interval_hull(family_masks) -> tuple[tuple[int, int], ...]:
    return tuple(((m & -m).bit_length(), m.bit_length()) for m in family_masks)


def brute_force_tsirelson(entries: dict[int, Fraction], universe: int | None = None) -> Fraction:
    """Iterate the inductive definition over arbitrary set families until stable."""
    if not entries:
        return Fraction(0)
    universe = universe or max(entries)
    bits = {i: 1 << (i - 1) for i in entries}
    supp = sum(bits.values())
    subs = [m for m in range(1 << universe) if m & ~supp == 0]
    absval = {bits[i]: abs(Fraction(v)) for i, v in entries.items()}

    def sup_of(mask):
        return max((v for b, v in absval.items() if b & mask), default=Fraction(0))

    fams = [f for f in set_families(universe)]
    level = {m: sup_of(m) for m in subs}
    while True:
        nxt = {}
        for m in subs:
            best = level[m]
            for fam in fams:
                s = sum((level[e & m] for e in fam), Fraction(0)) / 2
                if s > best:
                    best = s
            nxt[m] = best
        if nxt == level:
            return level[supp]
        level = nxt


def brute_force_01_table(universe: int = 8) -> dict[int, Fraction]:
    """Tsirelson norms of every 0/1 vector on {1..universe}, keyed by support bitmask.

    Restrictions of 0/1 vectors are 0/1 vectors, so one table over all
    subsets serves every input.  Values are dyadic and kept as scaled int64.
    """
    fams = set_families(universe)
    width = max(len(f) for f in fams)
    fam = np.zeros((len(fams), width), dtype=np.int64)
    for r, f in enumerate(fams):
        fam[r, : len(f)] = f
    masks = np.arange(1 << universe, dtype=np.int64)
    scale = 1 << 20
    level = np.where(masks > 0, scale, 0).astype(np.int64)
    while True:
        pieces = fam[:, :, None] & masks[None, None, :]
        sums = level[pieces].sum(axis=1)
        assert (sums % 2 == 0).all()
        nxt = np.maximum(level, (sums // 2).max(axis=0))
        if np.array_equal(nxt, level):
            return {int(m): Fraction(int(v), scale) for m, v in zip(masks, level)}
        level = nxt


def brute_force_admissible_hulls(lo: int, hi: int, max_pieces: int) -> set:
    """Interval hulls of all admissible subset families inside [lo, hi]."""
    out = set()
    for fam in set_families(hi):
        if len(fam) > max_pieces:
            continue
        hull = interval_hull(fam)
        if hull[0][0] >= lo:
            out.add(hull)
    return out


def l2_split_feasible(p_count: int, m_count: int, s: Fraction, r: Fraction) -> bool:
    """Is {x : ||x||_2 <= 1, ||x+e_n|| < s on P, > r on M} nonempty?

    With q = ||x||^2, the constraints read x_n < (s^2-1-q)/2 on P and
    x_n > (r^2-1-q)/2 on M; the cheapest coordinates meet them at the
    thresholds, so feasibility is  min_{q in [0,1]} cost(q) - q < 0  with
    cost piecewise quadratic.  The minimum is found exactly from the
    breakpoints and stationary points of each piece.
    """
    s, r = Fraction(s), Fraction(r)
    # some q in [0, 1] where x = (padding only) satisfies every constraint strictly
    lo = r * r - 1 if m_count else None
    hi = s * s - 1 if p_count else None
    if (lo is None or lo < 1) and (hi is None or hi > 0) and (lo is None or hi is None or lo < hi):
        return True

    def cost(q):
        t = (r * r - 1 - q) / 2
        u = (s * s - 1 - q) / 2
        return m_count * max(t, 0) ** 2 + p_count * min(u, 0) ** 2 - q

    candidates = {Fraction(0), Fraction(1), r * r - 1, s * s - 1}
    # stationary point of the piece where both squared terms are active
    a = Fraction(m_count + p_count, 2)
    if a:
        candidates.add((m_count * (r * r - 1) + p_count * (s * s - 1) + 2) / (2 * a))
    if m_count:
        candidates.add((r * r - 1) + Fraction(2, m_count))
    if p_count:
        candidates.add((s * s - 1) + Fraction(2, p_count))
    qs = [q for q in candidates if 0 <= q <= 1]
    return min(cost(q) for q in qs) < 0


def sign_patterns(n: int):
    return product((1, -1), repeat=n)


def cvxpy_conv_phi(x: dict[int, Fraction], y: dict[int, Fraction], W: int) -> float:
    """min ||x * z - y||_1 over ||z||_1 <= 1, supp z in [-2W, 2W], by a generic conic solver."""
    import cvxpy as cp

    zs = list(range(-2 * W, 2 * W + 1))
    rows = list(range(-3 * W, 3 * W + 1))
    A = np.zeros((len(rows), len(zs)))
    for c, j in enumerate(zs):
        for i, a in x.items():
            A[i + j + 3 * W, c] = float(a)
    yv = np.array([float(y.get(i, 0)) for i in rows])
    z = cp.Variable(len(zs))
    prob = cp.Problem(cp.Minimize(cp.norm1(A @ z - yv)), [cp.norm1(z) <= 1])
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)
