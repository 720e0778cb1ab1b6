"""Net-restricted probes of the type metric between trivial types.

A trivial type is ``f_a(x) = ||x + a||`` on the unit ball.  Every distance
computed here is a maximum over a finite net, hence a lower bound on the
supremum over the whole ball, and nothing stronger is ever reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from .parallel import parallel_map
from .sampling import into_ball
from .vectors import (
    FiniteVector,
    Interval,
    NormSpace,
    as_fraction,
    as_interval,
    basis,
    make_vector,
    norm,
    norm_enclosure,
    scale,
)

MAX_NET_POINTS = 200_000


@dataclass(frozen=True)
class BallNet:
    """Finite set of points of the unit ball, each certified to have norm <= 1."""

    ambient: NormSpace
    points: tuple[FiniteVector, ...]
    params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for x in self.points:
            if norm_enclosure(x, self.ambient).hi > 1:
                raise ValueError(f"net point {x} is outside the unit ball")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_points(cls, ambient: NormSpace, points, **params) -> "BallNet":
        seen, pts = set(), []
        for x in points:
            if x not in seen:
                seen.add(x)
                pts.append(x)
        return cls(ambient, tuple(pts), tuple(sorted((k, str(v)) for k, v in params.items())))

    @classmethod
    def grid(
        cls, ambient: NormSpace, max_index: int, step=Fraction(1, 4), max_support: int | None = None
    ) -> "BallNet":
        """All vectors on ``[1, max_index]`` with entries in ``step * Z ∩ [-1, 1]``, rescaled into the ball.

        ``max_support`` caps the number of nonzero entries (all by default).
        """
        step = as_fraction(step)
        if step <= 0 or 1 / step != int(1 / step):
            raise ValueError("step must be 1/k for a positive integer k")
        levels = [step * k for k in range(-int(1 / step), int(1 / step) + 1)]
        cap = max_support if max_support is not None else max_index
        total = sum(math.comb(max_index, s) * (len(levels) - 1) ** s for s in range(cap + 1))
        if total > MAX_NET_POINTS:
            raise ValueError(f"grid net would have {total} points (limit {MAX_NET_POINTS})")
        nonzero = [v for v in levels if v != 0]
        tuples = []
        for size in range(cap + 1):
            for support in combinations(range(max_index), size):
                for vals in product(nonzero, repeat=size):
                    row = [Fraction(0)] * max_index
                    for i, v in zip(support, vals):
                        row[i] = v
                    tuples.append(tuple(row))
        # lexicographic order, same as walking the full product
        tuples.sort()
        pts = [into_ball(make_vector(zip(range(1, max_index + 1), vals)), ambient) for vals in tuples]
        return cls.from_points(ambient, pts, kind="grid", max_index=max_index, step=step, max_support=cap)

    @classmethod
    def negated_basis(cls, ambient: NormSpace, n: int) -> "BallNet":
        """``0, -e_1, ..., -e_n``: the witnesses that separate basis vectors."""
        return cls.from_points(ambient, [make_vector([])] + [scale(-1, basis(k)) for k in range(1, n + 1)],
                               kind="negated-basis", n=n)

    def extend(self, other: "BallNet") -> "BallNet":
        if other.ambient != self.ambient:
            raise ValueError("nets live in different spaces")
        return BallNet.from_points(self.ambient, self.points + other.points, kind="union")

    def prefix(self, size: int) -> "BallNet":
        return BallNet(self.ambient, self.points[:size], self.params)

    def to_json(self) -> dict:
        return {"ambient": str(self.ambient), "size": len(self.points), "params": dict(self.params)}


def _check_in_ball(a: FiniteVector, ambient: NormSpace):
    if norm_enclosure(a, ambient).hi > 1:
        raise ValueError(f"{a} is not in the unit ball of {ambient}")


def trivial_type_eval(a: FiniteVector, net: BallNet) -> list:
    """``f_a(x) = ||x + a||`` at every net point: rationals where the norm is exact, enclosures otherwise."""
    _check_in_ball(a, net.ambient)
    return [norm(x + a, net.ambient) for x in net.points]


def _distance(fa: Sequence, fb: Sequence) -> Interval:
    """Enclosure of ``max_x |f_a(x) - f_b(x)|`` over the net."""
    if not fa:
        return Interval.point(0)
    diffs = [abs(as_interval(u) - as_interval(v)) for u, v in zip(fa, fb)]
    return Interval(max(d.lo for d in diffs), max(d.hi for d in diffs))


def d_metric_enclosure(a: FiniteVector, b: FiniteVector, net: BallNet) -> Interval:
    return _distance(trivial_type_eval(a, net), trivial_type_eval(b, net))


def d_metric_lower(a: FiniteVector, b: FiniteVector, net: BallNet) -> Fraction:
    """Certified lower bound on the type distance between ``a`` and ``b``.

    >>> from banach_lab.vectors import NormSpace, basis
    >>> d_metric_lower(basis(1), basis(2), BallNet.negated_basis(NormSpace.sup(), 2))
    Fraction(1, 1)
    """
    return d_metric_enclosure(a, b, net).lo


@dataclass
class PackingReport:
    eps: Fraction
    centers: list[int]
    distances: list[list[Fraction]]
    growth: list[tuple[int, int]] = field(default_factory=list)
    net: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.centers)

    def to_json(self) -> dict:
        return {
            "eps": str(self.eps),
            "count": self.count,
            "centers": list(self.centers),
            "distances": [[str(d) for d in row] for row in self.distances],
            "growth": [list(g) for g in self.growth],
            "net": self.net,
            "status": "lower bound",
        }


def _first_fit(dist: list[list[Fraction]], eps: Fraction, start: Sequence[int]) -> list[int]:
    centers = list(start)
    for i in range(len(dist)):
        if i not in centers and all(dist[i][c] > eps for c in centers):
            centers.append(i)
    return centers


def growth_sizes(size: int) -> list[int]:
    """Nested net sizes used for the growth table: halvings of ``size``, smallest first."""
    sizes, s = set(), size
    while s >= 1:
        sizes.add(s)
        s //= 2
    return sorted(sizes)


def packing_stats(
    family: Sequence[FiniteVector],
    eps,
    net: BallNet,
    *,
    previous: PackingReport | None = None,
    jobs: int | None = None,
) -> PackingReport:
    """Greedy eps-packing of the trivial types of ``family`` under the net distance.

    Centers are chosen first-fit in input order along the nested prefixes
    listed in the growth table, each stage keeping the centers of the one
    before (distances only grow with the net, so they stay separated).  A
    ``previous`` report computed on a sub-net seeds the selection the same
    way.
    """
    eps = as_fraction(eps)
    family = list(family)
    if not family:
        raise ValueError("empty family")
    values = parallel_map(lambda a: trivial_type_eval(a, net), family, jobs)
    centers = list(previous.centers) if previous is not None else []
    growth = []
    for size in growth_sizes(len(net)) or [0]:
        dist = [[_distance(u[:size], v[:size]).lo for v in values] for u in values]
        centers = _first_fit(dist, eps, centers)
        growth.append((size, len(centers)))
    dist = [[_distance(u, v).lo for v in values] for u in values]
    for i in centers:
        assert all(dist[i][j] > eps for j in centers if j != i)
    return PackingReport(eps, centers, dist, growth, net.to_json())
