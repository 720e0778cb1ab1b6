"""Seeded rational samples from the unit ball of a sequence space."""
from __future__ import annotations

import random
from fractions import Fraction

from .vectors import DEFAULT_TOL, FiniteVector, NormSpace, make_vector, norm_enclosure, scale


def into_ball(x: FiniteVector, ambient: NormSpace, tol: Fraction = DEFAULT_TOL) -> FiniteVector:
    """Rescale ``x`` so its norm is at most 1 (unchanged when already inside).

    For enclosed norms the divisor is the upper end, so the result is
    certified to lie in the ball.
    """
    n = norm_enclosure(x, ambient, tol)
    if n.hi <= 1:
        return x
    return scale(1 / n.hi, x)


def random_ball_vector(
    rng: random.Random,
    ambient: NormSpace,
    max_index: int,
    step: Fraction = Fraction(1, 4),
    max_support: int | None = None,
) -> FiniteVector:
    """A grid vector with entries in ``step * [-1/step, 1/step]``, pushed into the ball."""
    levels = int(1 / step)
    size = rng.randint(0, max_support or max_index)
    idx = sorted(rng.sample(range(1, max_index + 1), min(size, max_index)))
    x = make_vector([(i, step * rng.randint(-levels, levels)) for i in idx])
    return into_ball(x, ambient)
