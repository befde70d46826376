import math

import numpy as np
import pytest

from schattenvar import (
    Spectrum,
    brute_variance,
    exact_variance,
    exact_variance_closed_p2,
    pair_expectation,
    table_for,
    trace_powers,
    variance_paper_literal,
)
from schattenvar.cycles import OverlapPattern
from schattenvar.errors import InputError, SizeGuardError
from schattenvar.variance import (
    exact_variance_all_pairs,
    literal_letters,
    oracle_class_variance,
    paper_literal_report,
)

from conftest import random_spectra


def test_pair_expectation_examples(lam123):
    t = table_for(lam123, 3)
    assert pair_expectation(OverlapPattern(0, (3,), (3,)), t, 3) == t[3] ** 2
    assert pair_expectation(OverlapPattern(1, (1, 2), (2, 1)), t, 3) == 2 * t[6] + t[3] ** 2
    t2 = table_for(lam123, 2)
    same = OverlapPattern(2, (0, 1, 1), (0, 1, 1))
    assert pair_expectation(same, t2, 2) == pytest.approx(6 * t2[4] + 3 * t2[2] ** 2, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_p1_is_hutchinson(n, lam123):
    t = table_for(lam123, 1)
    assert exact_variance(1, n, t).variance == pytest.approx(2 * t[2] / n, rel=1e-13)


@pytest.mark.parametrize("n,expected", [(3, 16.0), (6, 5.6)])
def test_p2_identity_values(n, expected, identity3):
    t = table_for(identity3, 2)
    report = exact_variance(2, n, t)
    assert report.variance == pytest.approx(expected, rel=1e-13)
    assert report.mean == 3
    assert report.variance == pytest.approx(report.second_moment - report.mean**2, rel=1e-12)
    assert sum(c.count for c in report.per_q) == math.comb(n, 2) ** 2
    assert exact_variance_closed_p2(n, t) == pytest.approx(expected, rel=1e-13)


def test_report_json_shape(identity3):
    d = exact_variance(2, 6, table_for(identity3, 2)).to_dict()
    assert set(d) >= {"p", "n", "d", "mean", "second_moment", "variance", "per_q"}
    assert [c["q"] for c in d["per_q"]] == [0, 1, 2]
    assert [c["count"] for c in d["per_q"]] == [90, 120, 15]


def test_closed_form_p2_equality():
    for s in random_spectra(100, 8, seed=101):
        t = table_for(s, 2)
        for n in range(2, 13):
            a = exact_variance(2, n, t).variance
            b = exact_variance_closed_p2(n, t)
            assert math.isclose(a, b, rel_tol=1e-12), (s, n)


def test_closed_form_d1():
    t = table_for(Spectrum.from_values([1.0]), 2)
    assert exact_variance_closed_p2(4, t) == pytest.approx(exact_variance(2, 4, t).variance, rel=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_brute_equality(p, d):
    rng = np.random.default_rng(10 * p + d)
    s = Spectrum.from_values(rng.uniform(0.3, 2.0, d))
    t = table_for(s, p)
    for n in range(p, 7):
        exact = exact_variance(p, n, t).variance
        assert brute_variance(p, n, s) == pytest.approx(exact, rel=1e-10, abs=1e-12 * t[p] ** 2)


def test_brute_examples(identity3):
    assert brute_variance(2, 3, identity3) == pytest.approx(16, rel=1e-12)
    s = Spectrum.from_values([1.0, 2.0])
    assert brute_variance(2, 4, s) == pytest.approx(exact_variance(2, 4, table_for(s, 2)).variance, rel=1e-10)


def test_brute_guards():
    with pytest.raises(SizeGuardError):
        brute_variance(4, 40, Spectrum.identity(2))
    with pytest.raises(SizeGuardError):
        brute_variance(6, 12, Spectrum.identity(3))


def test_oracle_class_path(lam123):
    for p, n in [(2, 5), (3, 6)]:
        t = table_for(lam123, p)
        assert oracle_class_variance(p, n, lam123).variance == pytest.approx(
            exact_variance(p, n, t).variance, rel=1e-10
        )
    with pytest.raises(SizeGuardError):
        oracle_class_variance(5, 6, Spectrum.identity(6))


def test_all_pairs_equals_classes(lam123):
    for p in (1, 2, 3):
        t = table_for(lam123, p)
        for n in range(p, 8):
            a = exact_variance_all_pairs(p, n, t).variance
            b = exact_variance(p, n, t).variance
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12 * t[p] ** 2)


def test_input_errors(identity3):
    t = table_for(identity3, 3)
    with pytest.raises(InputError):
        exact_variance(3, 2, t)
    with pytest.raises(InputError):
        exact_variance(0, 2, t)
    with pytest.raises(InputError):
        exact_variance_closed_p2(1, t)


@pytest.mark.parametrize("c", [0.5, 1.7, 3.0])
def test_scale_equivariance(c):
    s = Spectrum.from_values([1.3, 0.6, 0.2])
    for p, n in [(1, 4), (2, 5), (3, 7)]:
        a = exact_variance(p, n, table_for(s, p)).variance
        b = exact_variance(p, n, table_for(s.scaled(c), p)).variance
        assert b == pytest.approx(c ** (2 * p) * a, rel=1e-12)


def test_non_negativity():
    for s in random_spectra(30, 6, seed=55):
        for p in (1, 2, 3, 4):
            t = table_for(s, p)
            for n in range(p, 10):
                assert exact_variance(p, n, t).variance >= -1e-9 * t[p] ** 2


def test_single_chi_square():
    # one sample, one coordinate: Var(x^2) = 2
    t = table_for(Spectrum.from_values([1.0]), 1)
    assert exact_variance(1, 1, t).variance == pytest.approx(2.0)


def test_decay_order_one_over_n():
    # n * variance is non-increasing and bounded by its value at n = 2p; n^2 * variance is not bounded
    for s in [Spectrum.identity(3)] + random_spectra(10, 6, seed=8):
        t = table_for(s, 2)
        scaled = [n * exact_variance(2, n, t).variance for n in range(4, 41)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(scaled, scaled[1:]))
        assert scaled[-1] > 0.5 * scaled[0]


def test_literal_representation(identity3):
    t = table_for(identity3, 2)
    # q <= 1 terms agree, q = 2 uses 15 per identical pair instead of 45
    lit = paper_literal_report(2, 6, t)
    norm = exact_variance(2, 6, t)
    assert lit.per_q[0] == norm.per_q[0] and lit.per_q[1] == norm.per_q[1]
    assert lit.per_q[2].sum == pytest.approx(15 * 15)
    assert norm.per_q[2].sum == pytest.approx(15 * 45)
    assert variance_paper_literal(2, 6, t) == pytest.approx(3.6, rel=1e-12)
    assert variance_paper_literal(2, 3, t) != pytest.approx(16)


def test_literal_representation_p1(lam123):
    t = table_for(lam123, 1)
    for n in range(1, 8):
        assert variance_paper_literal(1, n, t) == exact_variance(1, n, t).variance


def test_literal_letters_convention():
    pat = OverlapPattern(2, (0, 1, 1), (0, 1, 1))
    assert literal_letters(pat, 1) == (2, 2)
