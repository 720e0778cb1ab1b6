"""Acceptance criteria, one test each, printing a single PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines appear
even without ``-s``.
"""
import contextlib
import random
import time
from fractions import Fraction as F
from itertools import product

import pytest

from banach_lab.certify import equivalence_constants
from banach_lab.cli import EXIT_OK, run
from banach_lab.convolution import convolution_phi, delta, zvec
from banach_lab.dividing import (
    c0_translate_family,
    double_limit_table,
    independence_witness_search,
    sop_monotonicity_check,
    summing_basis_phi,
    summing_basis_psi,
    summing_basis_table,
    verify_witness,
)
from banach_lab.tsirelson import fixed_point_rhs, tsirelson_iterates, tsirelson_norm
from banach_lab.vectors import NormSpace, apply_signs, basis, l1_norm, make_vector, restrict

import oracles


@contextlib.contextmanager
def criterion(capsys, number, text):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\nC{number} FAIL  {text}  ({time.perf_counter() - t0:.1f}s)")
        raise
    with capsys.disabled():
        print(f"\nC{number} PASS  {text}  ({time.perf_counter() - t0:.1f}s)")


@pytest.fixture(scope="module")
def corpus():
    """200 seeded rational vectors with at most 8 nonzero entries in [1, 12]."""
    rng = random.Random(20)
    out = []
    for _ in range(200):
        idx = rng.sample(range(1, 13), rng.randint(1, 8))
        out.append(make_vector([(i, F(rng.choice((-1, 1)) * rng.randint(1, 24), rng.randint(1, 8))) for i in idx]))
    return out


def test_c1_tsirelson_exactness(capsys):
    with criterion(capsys, 1, "Tsirelson exactness against brute-force family enumeration"):
        t0 = time.perf_counter()
        assert all(tsirelson_norm(basis(k)) == 1 for k in range(1, 31))
        assert tsirelson_norm(make_vector([(3, 1), (4, 1), (5, 1)])) == F(3, 2)
        table = oracles.brute_force_01_table(8)
        for mask in range(1, 1 << 8):
            x = make_vector([(i + 1, 1) for i in range(8) if mask >> i & 1])
            assert tsirelson_norm(x) == table[mask], mask
        assert time.perf_counter() - t0 < 60


def test_c2_fixed_point_and_stabilization(capsys, corpus):
    with criterion(capsys, 2, "fixed-point identity and iterate stabilization on 200 vectors"):
        for x in corpus:
            value = tsirelson_norm(x)
            assert fixed_point_rhs(x) == value
            assert tsirelson_iterates(x, len(x))[-1] == value


def test_c3_unconditional_and_monotone(capsys, corpus):
    with criterion(capsys, 3, "sign invariance and restriction monotonicity, zero violations"):
        violations = 0
        for x in corpus:
            value, s = tsirelson_norm(x), x.support
            for signs in oracles.sign_patterns(len(s)):
                violations += tsirelson_norm(apply_signs(x, dict(zip(s, signs)))) != value
            for mask in range(1 << len(s)):
                sub = restrict(x, [s[i] for i in range(len(s)) if mask >> i & 1])
                violations += tsirelson_norm(sub) > value
        assert violations == 0


def test_c4_summing_basis_table(capsys):
    with criterion(capsys, 4, "20x20 summing-basis table and order-property verdict"):
        table = summing_basis_table(20, 20)
        assert table == [[2 if m <= n else 1 for n in range(1, 21)] for m in range(1, 21)]
        rep = double_limit_table(summing_basis_phi(), 20, 20)
        assert rep.lim_n_lim_m.lo == rep.lim_n_lim_m.hi == 1
        assert rep.lim_m_lim_n.lo == rep.lim_m_lim_n.hi == 2
        assert rep.verdict == "order-property-witnessed"


def test_c5_independence_depth_6(capsys):
    with criterion(capsys, 5, "c0 family independent at depth 6 (s=5/4, r=7/4), witnesses re-verified"):
        t0 = time.perf_counter()
        fam = c0_translate_family()
        rep = independence_witness_search(fam, F(7, 4), F(5, 4), 6)
        assert rep.independent and len(rep.witnesses) == 64
        for split, w in rep.witnesses.items():
            assert verify_witness(fam, w.vector, split, F(7, 4), F(5, 4)) is not None
        assert time.perf_counter() - t0 < 10


def test_c6_equivalence_certification(capsys):
    with criterion(capsys, 6, "Tsirelson (e1,e2) p=1 constants 1/2 and 1; l2 basis exactly 1"):
        cert = equivalence_constants([basis(1), basis(2)], 1, NormSpace.tsirelson())
        assert F(1, 2) in cert.c_lower and cert.c_lower.width <= F(1, 100)
        assert 1 in cert.c_upper and cert.c_upper.width <= F(1, 100)
        for n in (2, 3, 4):
            cert = equivalence_constants([basis(k) for k in range(1, n + 1)], 2, NormSpace.lp(2))
            assert cert.c_lower.lo == cert.c_lower.hi == 1
            assert cert.c_upper.lo == cert.c_upper.hi == 1


def test_c7_convolution_formula(capsys):
    with criterion(capsys, 7, "phi(delta_0, y) = max(0, ||y||_1 - 1) within 1e-9 on 50 random y"):
        rng = random.Random(7)
        tol = F(1, 10**9)
        for _ in range(50):
            idx = rng.sample(range(-16, 17), rng.randint(1, 6))
            y = zvec([(i, F(rng.randint(-40, 40), rng.randint(1, 10))) for i in idx])
            norm = l1_norm(y)
            if norm > 3:
                y = zvec([(i, v * F(rng.randint(0, 30), 10) / norm) for i, v in y.entries])
            assert l1_norm(y) <= 3
            exact = max(F(0), l1_norm(y) - 1)
            res = convolution_phi(delta(), y, 16)
            assert res.value.lo <= exact <= res.value.hi
            assert exact - tol <= res.value.lo and res.value.hi <= exact + tol


def test_c8_sop_chain(capsys):
    with criterion(capsys, 8, "SOP monotone chain and strict inequalities at k=20"):
        psi = summing_basis_psi()
        rep = sop_monotonicity_check(psi, 20)
        assert rep.passed and rep.strict_checks == 190
        for m in range(1, 21):
            for n in range(m + 1, 21):
                assert psi(basis(n), psi.right(m)).hi < psi(basis(m), psi.right(n)).lo


DETERMINISM_RUNS = {
    "tsirelson-norm": ["tsirelson", "norm", "--json", "--vector", '[[2,"1/3"],[3,"-1"],[6,"1/2"],[9,"2/7"]]'],
    "tsirelson-iterates": ["tsirelson", "iterates", "--vector", "e3+e4+e5+e9", "--figure", "{dir}/it.png"],
    "tsirelson-families": ["tsirelson", "families", "--lo", "2", "--hi", "7"],
    "certify-constants": ["certify", "constants", "--p", "1", "--ambient", "tsirelson", "--vectors", "e1,e2"],
    "certify-type": ["certify", "type", "--p", "1", "--eps", "1/10", "--ambient", "tsirelson", "--vectors", "e1,e2"],
    "certify-blockrep": ["certify", "blockrep", "--p", "2", "--eps", "1/10", "--ambient", "lp:2", "--n", "2"],
    "witness-order": ["witness", "order-property", "--csv", "{dir}/op.csv", "--figure", "{dir}/op.png"],
    "witness-independence": ["witness", "independence", "--family", "l2", "--r", "8/5", "--s", "1",
                             "--depth", "5", "--samples", "400", "--seed", "11"],
    "witness-sop": ["witness", "sop", "--depth", "8", "--samples", "40", "--seed", "3"],
    "table-summing": ["table", "summing-basis", "--m", "7", "--n", "9", "--csv", "{dir}/sb.csv"],
    "phi-conv": ["phi", "conv", "--x", "b1", "--y", '[[-2,"3/2"],[4,"-1"]]', "--halfwidth", "8"],
    "probe-dmetric": ["probe", "dmetric", "--ambient", "tsirelson", "--vectors", "e1,e2,e3+e4", "--csv", "{dir}/d.csv"],
    "probe-packing": ["probe", "packing", "--ambient", "sup", "--vectors", "e1,e2,e3,s3", "--eps", "1/2",
                      "--figure", "{dir}/g.png", "--csv", "{dir}/p.csv"],
}


def _run_once(tmp_path, argv, jobs):
    for f in tmp_path.iterdir():
        f.unlink()
    args = ["--jobs", str(jobs)] + [a.format(dir=tmp_path) for a in argv] + ["--out", str(tmp_path / "report.json")]
    assert run(args) == EXIT_OK
    return {f.name: f.read_bytes() for f in sorted(tmp_path.iterdir())}


def test_c9_determinism(capsys, tmp_path):
    with criterion(capsys, 9, "byte-identical reports on repeated runs for every subcommand"):
        for name, argv in DETERMINISM_RUNS.items():
            first = _run_once(tmp_path, argv, 1)
            assert "report.json" in first
            assert _run_once(tmp_path, argv, 1) == first, name
            assert _run_once(tmp_path, argv, 3) == first, name
        capsys.readouterr()
