import random
from fractions import Fraction as F
from itertools import combinations

import pytest

from banach_lab.sampling import random_ball_vector
from banach_lab.typespace import (
    BallNet,
    d_metric_enclosure,
    d_metric_lower,
    growth_sizes,
    packing_stats,
    trivial_type_eval,
)
from banach_lab.vectors import NormSpace, as_interval, basis, make_vector, norm_enclosure, scale

SUP, L2, T = NormSpace.sup(), NormSpace.lp(2), NormSpace.tsirelson()


def test_trivial_type_at_zero_is_the_norm():
    net = BallNet.grid(T, 2)
    assert trivial_type_eval(make_vector([]), net) == [norm_enclosure(x, T).lo for x in net.points]


def test_trivial_type_examples():
    assert trivial_type_eval(basis(1), BallNet.negated_basis(SUP, 1)) == [1, 0]
    a = scale(F(2, 3), make_vector([(3, 1), (4, 1), (5, 1)]))
    assert trivial_type_eval(a, BallNet.from_points(T, [make_vector([])])) == [1]


def test_points_outside_the_ball_rejected():
    with pytest.raises(ValueError):
        BallNet.from_points(SUP, [make_vector([(1, 2)])])
    with pytest.raises(ValueError):
        trivial_type_eval(make_vector([(1, 1), (2, 1)]), BallNet.negated_basis(L2, 2))


def test_grid_size_guard():
    with pytest.raises(ValueError):
        BallNet.grid(SUP, 9)
    assert len(BallNet.grid(SUP, 9, max_support=1)) == 1 + 9 * 8


def test_d_metric_examples():
    net = BallNet.grid(SUP, 2)
    assert d_metric_lower(basis(1), basis(1), net) == 0
    assert d_metric_lower(basis(1), basis(2), BallNet.negated_basis(SUP, 2)) >= 1
    enc = d_metric_enclosure(basis(1), basis(2), BallNet.negated_basis(L2, 2))
    assert enc.lo**2 <= 2 <= enc.hi**2
    assert enc.width <= F(1, 10**20)


def test_packing_examples():
    fam = [basis(k) for k in range(1, 11)]
    rep = packing_stats(fam, F(1, 2), BallNet.negated_basis(SUP, 10))
    assert rep.count == 10
    assert all(rep.distances[i][j] >= 1 for i, j in combinations(range(10), 2))
    assert packing_stats([basis(3)], F(1, 2), BallNet.grid(SUP, 3)).count == 1
    assert packing_stats(fam[:4], F(2), BallNet.grid(SUP, 3)).count == 1


def _family(rng, space, n, max_index):
    return [random_ball_vector(rng, space, max_index) for _ in range(n)]


@pytest.mark.parametrize("space", [SUP, L2, T], ids=str)
def test_values_lie_in_0_2_and_are_1_lipschitz(space):
    net = BallNet.grid(space, 2)
    rng = random.Random(2)
    for a in _family(rng, space, 6, 3):
        vals = [as_interval(v) for v in trivial_type_eval(a, net)]
        assert all(0 <= v.lo and v.hi <= 2 for v in vals)
        for (x, fx), (y, fy) in combinations(list(zip(net.points, vals))[::7], 2):
            assert abs(fx - fy).lo <= norm_enclosure(x - y, space).hi


@pytest.mark.parametrize("space", [SUP, T], ids=str)
def test_metric_axioms_on_a_fixed_net(space):
    net = BallNet.grid(space, 2)
    rng = random.Random(5)
    fam = _family(rng, space, 6, 3)
    d = [[d_metric_lower(a, b, net) for b in fam] for a in fam]
    for i, j in combinations(range(len(fam)), 2):
        assert d[i][j] == d[j][i]
    for i in range(len(fam)):
        assert d[i][i] == 0
        for j in range(len(fam)):
            for k in range(len(fam)):
                assert d[i][k] <= d[i][j] + d[j][k]


@pytest.mark.parametrize("space", [SUP, L2, T], ids=str)
def test_net_monotonicity(space):
    rng = random.Random(9)
    fam = _family(rng, space, 8, 3)
    small = BallNet.negated_basis(space, 3)
    big = small.extend(BallNet.grid(space, 2))
    for a, b in combinations(fam, 2):
        assert d_metric_lower(a, b, small) <= d_metric_lower(a, b, big)
    eps = F(1, 3)
    rep_small = packing_stats(fam, eps, small)
    rep_big = packing_stats(fam, eps, big, previous=rep_small)
    assert rep_big.count >= rep_small.count
    assert set(rep_small.centers) <= set(rep_big.centers)


def test_growth_table_is_monotone():
    rng = random.Random(1)
    fam = _family(rng, SUP, 12, 3)
    rep = packing_stats(fam, F(1, 4), BallNet.grid(SUP, 3))
    sizes = [g[0] for g in rep.growth]
    counts = [g[1] for g in rep.growth]
    assert sizes == growth_sizes(729)
    assert counts == sorted(counts)
    assert counts[-1] == rep.count
    for i, j in combinations(rep.centers, 2):
        assert rep.distances[i][j] > F(1, 4)
