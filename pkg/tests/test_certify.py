import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from banach_lab.certify import (
    CertifyBudget,
    block_rep_search,
    check_eps_lp_type,
    equivalence_constants,
)
from banach_lab.vectors import Interval, NormSpace, basis, combine, lp_enclosure, make_vector, norm_enclosure, scale

T = NormSpace.tsirelson()
L2 = NormSpace.lp(2)
SUP = NormSpace.sup()


def e(*ks):
    return [basis(k) for k in ks]


def ratio(X, r, p, ambient):
    g = norm_enclosure(combine(r, X), ambient, F(1, 10**15))
    n = lp_enclosure(r, p, F(1, 10**15))
    return g / n


def random_coefficients(rng, d):
    while True:
        r = [F(rng.randint(-40, 40), rng.randint(1, 9)) for _ in range(d)]
        if any(r):
            return r


# -- worked examples ------------------------------------------------------------


def test_l2_basis_is_isometric():
    cert = equivalence_constants(e(1, 2, 3), 2, L2)
    assert cert.c_lower.lo == cert.c_lower.hi == 1
    assert cert.c_upper.lo == cert.c_upper.hi == 1


def test_c0_basis_is_isometric():
    cert = equivalence_constants(e(1, 2), "inf", SUP)
    assert (cert.c_lower.lo, cert.c_upper.hi) == (1, 1)


def test_tsirelson_first_two_basis_vectors():
    cert = equivalence_constants(e(1, 2), 1, T)
    assert F(1, 2) in cert.c_lower and cert.c_lower.width <= F(1, 100)
    assert 1 in cert.c_upper and cert.c_upper.width <= F(1, 100)
    assert ratio(e(1, 2), cert.witness_lower, 1, T) == Interval.point(F(1, 2))
    assert ratio(e(1, 2), cert.witness_upper, 1, T) == Interval.point(1)


def test_l2_certificate_against_singular_values():
    X = [make_vector([(1, 1), (2, 1)]), make_vector([(2, 1), (3, -1)]), make_vector([(3, 1)])]
    cert = equivalence_constants(X, 2, L2)
    assert cert.conclusive
    mat = np.array([[float(x[i]) for x in X] for i in (1, 2, 3)])
    sv = np.linalg.svd(mat, compute_uv=False)
    assert float(cert.c_lower.lo) - 1e-12 <= sv.min() <= float(cert.c_lower.hi) + 1e-12
    assert float(cert.c_upper.lo) - 1e-12 <= sv.max() <= float(cert.c_upper.hi) + 1e-12


def test_exhausted_budget_is_marked_inconclusive():
    X = [make_vector([(1, 1), (2, 1)]), make_vector([(2, 1), (3, -1)]), make_vector([(3, 1)])]
    cert = equivalence_constants(X, F(3, 2), NormSpace.lp(3), CertifyBudget(max_points=300))
    assert not cert.conclusive
    assert cert.to_json()["status"] == "inconclusive"
    assert cert.c_lower.lo <= cert.c_lower.hi <= cert.c_upper.lo <= cert.c_upper.hi


# -- invariants ---------------------------------------------------------------------

SYSTEMS = [
    ("tsirelson-basis", e(1, 2), 1, T),
    ("tsirelson-mixed", [make_vector([(2, 1), (3, F(-1, 2))]), make_vector([(3, 1), (5, 1)]), basis(4)], 1, T),
    ("l2-skew", [make_vector([(1, 1), (2, 1)]), make_vector([(2, 1), (3, -1)]), basis(3)], 2, L2),
    ("c0-summing", [make_vector([(1, 1)]), make_vector([(1, 1), (2, 1)]), make_vector([(1, 1), (2, 1), (3, 1)])], "inf", SUP),
    ("l3-vs-l2", e(1, 2, 3), 2, NormSpace.lp(3)),
]


@pytest.mark.parametrize("name,X,p,ambient", SYSTEMS, ids=[s[0] for s in SYSTEMS])
def test_certificate_soundness(name, X, p, ambient):
    cert = equivalence_constants(X, p, ambient)
    assert cert.c_lower.lo <= cert.c_lower.hi <= cert.c_upper.lo <= cert.c_upper.hi
    rng = random.Random(5)
    p_val = math.inf if p == "inf" else p
    slack = F(0) if ambient.exact else F(1, 10**12)
    trials = 10_000 if ambient.kind != "tsirelson" else 3_000
    for _ in range(trials):
        v = ratio(X, random_coefficients(rng, len(X)), p_val, ambient)
        assert cert.c_lower.lo - slack <= v.hi and v.lo <= cert.c_upper.hi + slack
    # witnesses reproduce their bounds
    wl = ratio(X, cert.witness_lower, p_val, ambient)
    wu = ratio(X, cert.witness_upper, p_val, ambient)
    assert wl.lo <= cert.c_lower.hi + slack and wl.hi >= cert.c_lower.lo - slack
    assert wu.hi >= cert.c_upper.lo - slack and wu.lo <= cert.c_upper.hi + slack


@pytest.mark.parametrize("c", [F(3), F(1, 4)])
def test_scale_invariance(c):
    X = [make_vector([(2, 1), (3, F(-1, 2))]), make_vector([(3, 1), (5, 1)]), basis(4)]
    base = equivalence_constants(X, 1, T)
    scaled = equivalence_constants([scale(c, x) for x in X], 1, T)
    assert scaled.c_lower.hi == c * base.c_lower.hi
    assert scaled.c_upper.lo == c * base.c_upper.lo
    for eps in (F(1, 10), F(1), F(3)):
        a = check_eps_lp_type(X, 1, eps, T).verdict
        b = check_eps_lp_type([scale(c, x) for x in X], 1, eps, T).verdict
        assert a == b


def test_symmetry_shortcut_matches_full_search():
    X = [make_vector([(1, 2)]), make_vector([(2, 1), (3, 1)]), make_vector([(4, F(1, 3))])]
    for ambient, p in ((T, 1), (L2, 2), (SUP, "inf"), (NormSpace.lp(3), 2)):
        fast = equivalence_constants(X, p, ambient, CertifyBudget(use_symmetry=True))
        full = equivalence_constants(X, p, ambient, CertifyBudget(use_symmetry=False))
        assert fast.c_lower.hi == full.c_lower.hi
        assert fast.c_upper.lo == full.c_upper.lo
        assert fast.grid_points < full.grid_points


# -- type checks ---------------------------------------------------------------------


def test_type_check_examples():
    assert check_eps_lp_type(e(1, 2, 3), 2, F(1, 100), L2).verdict == "pass"
    res = check_eps_lp_type(e(1, 2), 1, F(1, 10), T)
    assert res.verdict == "violation"
    assert res.coefficients == (1, 1)
    assert res.side == "lower"
    assert res.margin > 0
    assert check_eps_lp_type(e(8, 9, 10, 11), 1, 1, T).verdict == "pass"


def test_type_check_monotone_in_eps():
    X = [make_vector([(2, 1), (3, F(-1, 2))]), make_vector([(3, 1), (5, 1)]), basis(4)]
    verdicts = [check_eps_lp_type(X, 1, eps, T).verdict for eps in (F(1, 10), F(1), F(3), F(10))]
    first_pass = verdicts.index("pass") if "pass" in verdicts else len(verdicts)
    assert all(v == "pass" for v in verdicts[first_pass:])
    assert verdicts[-1] == "pass"


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        check_eps_lp_type(e(1, 2), 1, -1, T)


# -- block representations ----------------------------------------------------------


def test_block_rep_c0():
    res = block_rep_search(SUP, 10, "inf", F(1, 10), 4)
    assert res.success
    assert [v.support for v in res.vectors] == [(1,), (2,), (3,), (4,), (5,)]


def test_block_rep_l2():
    res = block_rep_search(L2, 10, 2, F(1, 10), 4)
    assert res.success and len(res.vectors) == 5


def test_block_rep_tsirelson_l1():
    res = block_rep_search(T, 20, 1, 1, 3)
    assert res.success
    ys = res.vectors
    assert all(a.support[-1] < b.support[0] for a, b in zip(ys, ys[1:]))
    assert check_eps_lp_type(ys, 1, 1, T).verdict == "pass"
    # the singleton blocks from index 8 are a valid answer too
    assert check_eps_lp_type(e(8, 9, 10, 11), 1, 1, T).verdict == "pass"


def test_block_rep_reports_failure():
    # four l_1-like blocks inside [1, 5] with distortion 1.01 do not exist in T
    res = block_rep_search(T, 5, 1, F(1, 100), 3, max_evaluations=40)
    assert not res.success
    assert res.to_json()["status"] == "budget exhausted"
