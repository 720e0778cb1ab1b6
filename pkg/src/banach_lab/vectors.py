"""Exact finitely supported vectors and the elementary norms on them.

Vectors are immutable maps ``index -> Fraction`` with zero entries dropped.
The sup and Tsirelson norms of a rational vector are rational and are
returned exactly.  The l_p norms are returned as :class:`Interval`
enclosures obtained with directed integer rounding, so every comparison
made downstream is sound.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import gmpy2

Rational = Union[int, Fraction]

#: default width of l_p enclosures
DEFAULT_TOL = Fraction(1, 10**24)


class VectorError(ValueError):
    """Malformed vector input (duplicate or non-positive index, bad value)."""


class BudgetExceeded(RuntimeError):
    """An exact computation was refused because it exceeds its budget."""


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction, or string such as ``"3/2"``/``"0.1"`` exactly.

    Floats are rejected; they would smuggle binary rounding into exact data.
    """
    if isinstance(value, bool):
        raise VectorError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise VectorError(f"not a rational: {value!r}") from exc
    raise VectorError(f"not a rational: {value!r} (use an int or a string)")


# ---------------------------------------------------------------------------
# Enclosures


@dataclass(frozen=True)
class Interval:
    """Closed rational interval ``[lo, hi]`` enclosing a real number."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Rational) -> "Interval":
        v = Fraction(value)
        return cls(v, v)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    def __add__(self, other) -> "Interval":
        other = as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        return self + (-as_interval(other))

    def __mul__(self, other) -> "Interval":
        other = as_interval(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        other = as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def __abs__(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(Fraction(0), max(-self.lo, self.hi))

    def to_json(self) -> list[str]:
        return [str(self.lo), str(self.hi)]


def as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(value)


def lower(value) -> Fraction:
    """Certified lower end of a rational or an enclosure."""
    return value.lo if isinstance(value, Interval) else Fraction(value)


def upper(value) -> Fraction:
    return value.hi if isinstance(value, Interval) else Fraction(value)


def _perfect_root(n: int, k: int) -> int | None:
    root, exact = gmpy2.iroot(gmpy2.mpz(n), k)
    return int(root) if exact else None


def root_enclosure(q: Fraction, k: int, tol: Fraction = DEFAULT_TOL) -> Interval:
    """Enclose the real k-th root of ``q >= 0`` with width at most ``tol``."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("root of a negative number")
    if k == 1 or q == 0:
        return Interval.point(q)
    num = _perfect_root(q.numerator, k)
    den = _perfect_root(q.denominator, k)
    if num is not None and den is not None:
        return Interval.point(Fraction(num, den))
    scale = math.ceil(1 / tol)
    # floor(q * scale^k) has integer k-th root r with r/scale <= q^(1/k) < (r+1)/scale
    n = (q.numerator * scale**k) // q.denominator
    r = int(gmpy2.iroot(gmpy2.mpz(n), k)[0])
    return Interval(Fraction(r, scale), Fraction(r + 1, scale))


def _pow_enclosure(q: Fraction, p: Fraction, tol: Fraction) -> Interval:
    """Enclose ``q**p`` for rational ``q >= 0`` and rational ``p > 0``."""
    return root_enclosure(q**p.numerator, p.denominator, tol)


def lp_enclosure(values: Iterable[Rational], p, tol: Fraction = DEFAULT_TOL) -> Interval:
    """Enclosure of ``(sum |v|^p)^(1/p)``; ``p = math.inf`` gives the max."""
    absvals = [abs(Fraction(v)) for v in values]
    if not absvals:
        return Interval.point(0)
    if p == math.inf:
        return Interval.point(max(absvals))
    p = Fraction(p)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p.denominator == 1:
        total = sum(v**p.numerator for v in absvals)
        return root_enclosure(total, p.numerator, tol)
    # fractional p: enclose the sum, then raise to 1/p = b/a monotonically
    a, b = p.numerator, p.denominator
    inner = tol
    for _ in range(8):
        inner = inner * inner / (len(absvals) + 1)
        total = sum((_pow_enclosure(v, p, inner) for v in absvals), Interval.point(0))
        lo = root_enclosure(total.lo**b, a, tol / 2).lo
        hi = root_enclosure(total.hi**b, a, tol / 2).hi
        if hi - lo <= tol:
            return Interval(lo, hi)
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Norm spaces


@dataclass(frozen=True)
class NormSpace:
    """Ambient norm tag: ``lp`` (with exponent ``p >= 1``), ``sup`` or ``tsirelson``."""

    kind: str
    p: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("lp", "sup", "tsirelson"):
            raise ValueError(f"unknown norm space {self.kind!r}")
        if self.kind == "lp":
            if self.p is None or Fraction(self.p) < 1:
                raise ValueError("lp norm needs p >= 1")
            object.__setattr__(self, "p", Fraction(self.p))
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no exponent")

    @classmethod
    def lp(cls, p: Rational | str) -> "NormSpace":
        return cls("lp", as_fraction(p))

    @classmethod
    def sup(cls) -> "NormSpace":
        return cls("sup")

    @classmethod
    def tsirelson(cls) -> "NormSpace":
        return cls("tsirelson")

    @classmethod
    def parse(cls, text: str) -> "NormSpace":
        """Accepts ``sup``/``c0``/``linf``, ``tsirelson``/``T``, ``lp:<p>``/``l<p>``."""
        t = text.strip().lower()
        if t in ("sup", "c0", "linf", "l_inf"):
            return cls.sup()
        if t in ("tsirelson", "t"):
            return cls.tsirelson()
        if t.startswith("lp:"):
            return cls.lp(t[3:])
        if t.startswith("l") and len(t) > 1:
            return cls.lp(t[1:])
        raise ValueError(f"unknown ambient {text!r}")

    @property
    def exact(self) -> bool:
        return self.kind != "lp" or self.p == 1

    def __str__(self) -> str:
        return f"lp:{self.p}" if self.kind == "lp" else self.kind


# ---------------------------------------------------------------------------
# Vectors


@dataclass(frozen=True)
class FiniteVector:
    """Finitely supported rational vector, entries sorted by index, no zeros.

    Build with :func:`make_vector`; the constructor trusts its input.
    """

    entries: tuple[tuple[int, Fraction], ...] = ()

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for _, v in self.entries)

    def __getitem__(self, index: int) -> Fraction:
        for i, v in self.entries:
            if i == index:
                return v
        return Fraction(0)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        return add(self, other)

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return add(self, scale(-1, other))

    def __neg__(self) -> "FiniteVector":
        return scale(-1, self)

    def __rmul__(self, c) -> "FiniteVector":
        return scale(c, self)

    def to_json(self) -> dict:
        return {"entries": [[i, str(v)] for i, v in self.entries]}

    def __str__(self) -> str:
        inner = ", ".join(f"{i}: {v}" for i, v in self.entries)
        return "{" + inner + "}"


def _canonical(entries: Mapping[int, Fraction]) -> FiniteVector:
    return FiniteVector(tuple((i, v) for i, v in sorted(entries.items()) if v != 0))


def make_vector(entries: Iterable, *, allow_nonpositive: bool = False) -> FiniteVector:
    """Build a vector from ``(index, value)`` pairs.

    Zero values are dropped.  Indices are 1-based unless ``allow_nonpositive``
    is set (sequences on the integers, used by the convolution examples).
    """
    seen: dict[int, Fraction] = {}
    for pair in entries:
        try:
            index, value = pair
        except (TypeError, ValueError) as exc:
            raise VectorError(f"entry must be an (index, value) pair: {pair!r}") from exc
        if isinstance(index, bool) or not isinstance(index, int):
            raise VectorError(f"index must be an integer: {index!r}")
        if index <= 0 and not allow_nonpositive:
            raise VectorError(f"index must be positive: {index}")
        if index in seen:
            raise VectorError(f"duplicate index {index}")
        seen[index] = as_fraction(value)
    return _canonical(seen)


def zero() -> FiniteVector:
    return FiniteVector()


def basis(k: int, value: Rational = 1) -> FiniteVector:
    """The unit vector ``value * e_k``."""
    return make_vector([(k, Fraction(value))], allow_nonpositive=True)


def summing(n: int) -> FiniteVector:
    """Summing-basis vector ``s_n = e_1 + ... + e_n``."""
    return make_vector([(k, 1) for k in range(1, n + 1)])


def add(x: FiniteVector, y: FiniteVector) -> FiniteVector:
    out = dict(x.entries)
    for i, v in y.entries:
        out[i] = out.get(i, Fraction(0)) + v
    return _canonical(out)


def scale(c: Rational, x: FiniteVector) -> FiniteVector:
    c = Fraction(c)
    if c == 0:
        return FiniteVector()
    return FiniteVector(tuple((i, c * v) for i, v in x.entries))


def combine(coefficients: Iterable[Rational], vectors: Iterable[FiniteVector]) -> FiniteVector:
    """``sum_i r_i x_i``."""
    out: dict[int, Fraction] = {}
    for c, x in zip(coefficients, vectors):
        c = Fraction(c)
        if c == 0:
            continue
        for i, v in x.entries:
            out[i] = out.get(i, Fraction(0)) + c * v
    return _canonical(out)


def restrict(x: FiniteVector, indices: Iterable[int]) -> FiniteVector:
    """The restriction ``Ex``: agrees with ``x`` on ``E`` and vanishes elsewhere."""
    keep = set(indices)
    return FiniteVector(tuple((i, v) for i, v in x.entries if i in keep))


def restrict_interval(x: FiniteVector, a: int, b: int) -> FiniteVector:
    return FiniteVector(tuple((i, v) for i, v in x.entries if a <= i <= b))


def apply_signs(x: FiniteVector, signs: Mapping[int, int]) -> FiniteVector:
    """Flip coordinates whose sign in ``signs`` is -1; others keep sign +1."""
    out = []
    for i, v in x.entries:
        s = signs.get(i, 1)
        if s not in (1, -1):
            raise VectorError(f"sign must be +1 or -1, got {s!r} at index {i}")
        out.append((i, v if s == 1 else -v))
    return FiniteVector(tuple(out))


def sup_norm(x: FiniteVector) -> Fraction:
    return max((abs(v) for v in x.values), default=Fraction(0))


def l1_norm(x: FiniteVector) -> Fraction:
    return sum((abs(v) for v in x.values), Fraction(0))


def norm(x: FiniteVector, space: NormSpace, tol: Fraction = DEFAULT_TOL):
    """Norm of ``x`` in ``space``.

    Returns a ``Fraction`` for ``sup`` and ``tsirelson``, and an
    :class:`Interval` of width ``<= tol`` for ``lp`` (degenerate when the
    value happens to be rational, e.g. always for ``p = 1``).
    """
    if space.kind == "sup":
        return sup_norm(x)
    if space.kind == "tsirelson":
        from .tsirelson import tsirelson_norm

        return tsirelson_norm(x)
    return lp_enclosure(x.values, space.p, tol)


def norm_enclosure(x: FiniteVector, space: NormSpace, tol: Fraction = DEFAULT_TOL) -> Interval:
    """Like :func:`norm` but always an :class:`Interval`."""
    return as_interval(norm(x, space, tol))


# ---------------------------------------------------------------------------
# Text format


def vector_from_json(payload, *, allow_nonpositive: bool = False) -> FiniteVector:
    """Parse ``{"entries": [[i, "n/d"], ...]}`` or the bare entry list.

    The canonical form requires strictly increasing indices.
    """
    if isinstance(payload, str):
        payload = json.loads(payload)
    if isinstance(payload, dict):
        if set(payload) - {"entries"}:
            raise VectorError(f"unexpected keys {sorted(set(payload) - {'entries'})}")
        payload = payload.get("entries", [])
    if not isinstance(payload, list):
        raise VectorError("vector must be a list of [index, value] pairs")
    indices = [pair[0] for pair in payload if isinstance(pair, (list, tuple)) and pair]
    if any(b <= a for a, b in zip(indices, indices[1:]) if isinstance(a, int) and isinstance(b, int)):
        if len(set(indices)) != len(indices):
            raise VectorError("duplicate index in vector")
        raise VectorError("indices must be strictly increasing")
    return make_vector((tuple(pair) for pair in payload), allow_nonpositive=allow_nonpositive)


def vector_to_json(x: FiniteVector) -> dict:
    return x.to_json()
