"""The l_1(Z) formula ``phi(x, y) = inf_{||z||_1 <= 1} ||x * z - y||_1``.

The infimum is a linear program once ``z`` is truncated to ``[-2W, 2W]``.
Both the primal and the dual are solved in floating point and then turned
into exact rational bounds: the primal point, scaled into the ball, gives
an upper bound by direct evaluation, and any dual vector ``mu`` with
``|mu| <= 1`` gives the lower bound ``<mu, y> - max_j |(mu ⋆ x)_j|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.optimize import linprog

from .vectors import FiniteVector, Interval, VectorError, as_fraction, l1_norm, make_vector

DEFAULT_CONV_TOL = Fraction(1, 10**9)
MAX_HALFWIDTH = 256


def zvec(entries) -> FiniteVector:
    """A sequence on the integers from ``(index, value)`` pairs."""
    return make_vector(entries, allow_nonpositive=True)


def delta(k: int = 0) -> FiniteVector:
    return zvec([(k, 1)])


def binomial_kernel(i: int) -> FiniteVector:
    """Coefficients of ``(cos t)^{2i}`` in ``e^{ikt}``: ``C(2i, i+k) / 4^i`` for ``|k| <= i``.

    >>> binomial_kernel(1)
    FiniteVector(entries=((-1, Fraction(1, 4)), (0, Fraction(1, 2)), (1, Fraction(1, 4))))
    """
    if i < 0:
        raise ValueError("i must be >= 0")
    den = 4**i
    return zvec([(k, Fraction(comb(2 * i, i + k), den)) for k in range(-i, i + 1)])


def convolve(x: FiniteVector, z: FiniteVector) -> FiniteVector:
    out: dict[int, Fraction] = {}
    for i, a in x.entries:
        for j, b in z.entries:
            out[i + j] = out.get(i + j, Fraction(0)) + a * b
    return zvec(out.items())


def correlate(mu: FiniteVector, x: FiniteVector) -> FiniteVector:
    """``(mu ⋆ x)_j = sum_i mu_i x_{i-j}``, the adjoint of ``z -> x * z`` applied to ``mu``."""
    out: dict[int, Fraction] = {}
    for i, a in mu.entries:
        for k, b in x.entries:
            out[i - k] = out.get(i - k, Fraction(0)) + a * b
    return zvec(out.items())


@dataclass
class ConvolutionResult:
    value: Interval
    untruncated_lower: Fraction
    truncation_slack: Fraction
    halfwidth: int
    minimizer: FiniteVector
    dual: FiniteVector
    converged: bool

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "untruncated_lower": str(self.untruncated_lower),
            "truncation_slack": str(self.truncation_slack),
            "halfwidth": self.halfwidth,
            "minimizer": self.minimizer.to_json(),
            "dual": self.dual.to_json(),
            "status": "converged" if self.converged else "enclosure wider than tolerance",
        }


def _check_support(v: FiniteVector, W: int, label: str):
    if v and (v.support[0] < -W or v.support[-1] > W):
        raise VectorError(f"support of {label} must lie in [-{W}, {W}]")


def _to_fraction(v: float) -> Fraction:
    return Fraction(v).limit_denominator(10**15)


def convolution_phi(x: FiniteVector, y: FiniteVector, halfwidth: int = 16, tol=DEFAULT_CONV_TOL) -> ConvolutionResult:
    """Enclose ``min { ||x * z - y||_1 : supp z ⊆ [-2W, 2W], ||z||_1 <= 1 }``.

    ``value`` encloses the truncated minimum.  The dual bound is computed
    against every shift, so ``untruncated_lower`` also bounds the minimum
    over all finitely supported ``z``; ``truncation_slack`` is how much
    that costs relative to ``value.lo``.
    """
    W = int(halfwidth)
    if not 0 <= W <= MAX_HALFWIDTH:
        raise ValueError(f"halfwidth must be between 0 and {MAX_HALFWIDTH}")
    _check_support(x, W, "x")
    _check_support(y, W, "y")
    tol = as_fraction(tol)
    ny = l1_norm(y)
    zero = zvec([])
    if not x or not y:
        # z = 0 is optimal when x = 0; y = 0 makes every bound collapse to 0
        return ConvolutionResult(Interval.point(ny), ny, Fraction(0), W, zero, zero, True)
    zs = list(range(-2 * W, 2 * W + 1))
    rows = list(range(-3 * W, 3 * W + 1))
    A = np.zeros((len(rows), len(zs)))
    for c, j in enumerate(zs):
        for i, a in x.entries:
            A[i + j + 3 * W, c] = float(a)
    yv = np.array([float(y[i]) for i in rows])
    upper, z_best = _primal_upper(x, y, A, yv, zs)
    lo_trunc, mu = _dual_lower(x, y, A, yv, rows, range(-2 * W, 2 * W + 1))
    # every shift that can meet the rows: a dual feasible for the untruncated problem
    shifts = range(-4 * W, 4 * W + 1)
    A_all = np.zeros((len(rows), len(shifts)))
    for c, j in enumerate(shifts):
        for i, a in x.entries:
            if -3 * W <= i + j <= 3 * W:
                A_all[i + j + 3 * W, c] = float(a)
    lo_full, _ = _dual_lower(x, y, A_all, yv, rows, None)
    # the elementary bounds: z = 0, and the triangle inequality
    if ny < upper:
        upper, z_best = ny, zero
    elementary = max(Fraction(0), ny - l1_norm(x))
    lo_trunc, lo_full = max(lo_trunc, elementary), max(lo_full, elementary)
    lo_trunc = min(lo_trunc, upper)
    lo_full = min(lo_full, lo_trunc)
    value = Interval(lo_trunc, upper)
    return ConvolutionResult(value, lo_full, lo_trunc - lo_full, W, z_best, mu, value.width <= tol)


def _primal_upper(x, y, A, yv, zs) -> tuple[Fraction, FiniteVector]:
    # variables: z (n), u >= |z| (n), t >= |Az - y| (rows)
    m, n = A.shape
    c = np.concatenate([np.zeros(2 * n), np.ones(m)])
    I, Z = np.eye(n), np.zeros
    A_ub = np.block(
        [
            [A, Z((m, n)), -np.eye(m)],
            [-A, Z((m, n)), -np.eye(m)],
            [I, -I, Z((n, m))],
            [-I, -I, Z((n, m))],
            [Z((1, n)), np.ones((1, n)), Z((1, m))],
        ]
    )
    b_ub = np.concatenate([yv, -yv, np.zeros(2 * n), [1.0]])
    bounds = [(None, None)] * n + [(0, None)] * (n + m)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return l1_norm(y), zvec([])
    z = zvec([(j, _to_fraction(v)) for j, v in zip(zs, res.x[:n]) if abs(v) > 1e-15])
    nz = l1_norm(z)
    if nz > 1:
        z = zvec([(j, v / nz) for j, v in z.entries])
    return l1_norm(convolve(x, z) - y), z


def _dual_lower(x, y, A, yv, rows, window) -> tuple[Fraction, FiniteVector]:
    """Exact lower bound from a rounded dual vector.

    The LP maximizes ``<mu, y> - tau`` with ``|A^T mu| <= tau``; the bound
    itself is recomputed in rationals, over the shifts in ``window`` (all
    shifts when ``None``).
    """
    m, n = A.shape
    c = np.concatenate([-yv, [1.0]])
    A_ub = np.block([[A.T, -np.ones((n, 1))], [-A.T, -np.ones((n, 1))]])
    b_ub = np.zeros(2 * n)
    bounds = [(-1, 1)] * m + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return Fraction(0), zvec([])
    mu = zvec([(i, max(Fraction(-1), min(Fraction(1), _to_fraction(v)))) for i, v in zip(rows, res.x[:m])])
    corr = correlate(mu, x)
    inner = sum((mu[i] * v for i, v in y.entries), Fraction(0))
    if window is None:
        worst = max((abs(v) for v in corr.values), default=Fraction(0))
    else:
        worst = max((abs(v) for j, v in corr.entries if j in window), default=Fraction(0))
    return inner - worst, mu
