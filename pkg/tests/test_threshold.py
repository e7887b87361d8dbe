import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from punclab.codes import make_counterexample, make_hadamard
from punclab.dist import EmpiricalDistribution
from punclab.gf import field
from punclab.properties import PropertySpec
from punclab.threshold import (
    DomainError,
    capacity_lr,
    compare_puncturing_with_rlc,
    complementary_pair_control,
    dimension_for_rate,
    entropy_bound_rc,
    estimate_rlc_threshold,
    hq,
    hql,
    implied_rate,
    rlc_bound_ghk,
    rlc_bound_lw,
    rlc_threshold_formula,
)


def test_hq_examples():
    assert hq(0, 2) == 0 and hq(0.5, 2) == pytest.approx(1.0)
    assert hq(0.11, 2) == pytest.approx(0.4999, abs=1e-3)
    assert hq(2 / 3, 3) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        hq(1.5, 2)


@given(st.floats(0, 1), st.sampled_from([2, 3, 4, 7]))
def test_hql_with_single_symbol_lists_is_hq(rho, q):
    assert hql(rho, 1, q) == pytest.approx(hq(rho, q), abs=1e-12)


def test_hql_examples():
    assert hql(0, 2, 4) == pytest.approx(0.5)
    assert hql(0.5, 2, 4) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        hql(0.2, 4, 4)


def test_reference_curves():
    assert rlc_bound_ghk(0.11, 2, 10, 1.0) == pytest.approx(1 - hq(0.11, 2) - 0.1)
    lo, hi = rlc_bound_lw(0.1, 3)
    assert lo == pytest.approx(1 - 2 * hq(0.1, 2)) and hi == pytest.approx(1 - hq(0.1, 2) * 4 / 3)
    assert lo < hi
    with pytest.raises(DomainError):
        rlc_bound_lw(0.1, 2)
    assert capacity_lr(0.2, 1, 2, math.inf) == pytest.approx(1 - hq(0.2, 2))
    assert capacity_lr(0.2, 2, 4, 16) == pytest.approx(1 - hql(0.2, 2, 4) - 1.0)


def test_entropy_bound_rc():
    B = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    r = entropy_bound_rc(B, Fraction(1, 2), 1, 2)
    assert r.entropy == pytest.approx(2.0) and r.holds
    r2 = entropy_bound_rc(B, Fraction(1, 4), 2, 3, input_sets=[[0, 1]] * 4)
    assert r2.holds and r2.bound == pytest.approx(2 * hql(0.25, 2, 3) + 2)
    with pytest.raises(DomainError):
        entropy_bound_rc(np.array([[0, 1], [0, 1], [0, 1], [0, 1]]), 0, 1, 2)


def test_dimension_for_rate():
    assert dimension_for_rate(Fraction(1, 2), 16) == 8
    assert dimension_for_rate(Fraction(95, 100), 25) == 24
    assert dimension_for_rate(Fraction(1, 3), 10) == 3


def test_threshold_estimate_shape_and_determinism():
    p = PropertySpec("list-decoding", Fraction(1, 4), 2, 2, 8)
    rates = [Fraction(k, 8) for k in range(1, 6)]
    a = estimate_rlc_threshold(p, 8, rates, 60, seed=1)
    b = estimate_rlc_threshold(p, 8, rates, 60, seed=1, threads=3)
    assert a == b
    freqs = [pt.freq for pt in a.points]
    assert freqs[-1] == 1.0 and freqs[0] < 0.5
    assert a.estimate == next(pt.rate for pt in a.points if pt.freq >= 0.5)
    assert set(a.rows()[0]) == {"kind", "rho", "ell", "L", "n", "q", "rate", "k", "trials", "freq", "ci_low", "ci_high", "seed"}
    with pytest.raises(DomainError):
        estimate_rlc_threshold(p, 8, [Fraction(1, 2), Fraction(1, 4)], 5, seed=1)


def test_implied_rate_examples():
    F2 = field(2)
    assert implied_rate(EmpiricalDistribution.uniform(F2, 2)) == pytest.approx(0.0)
    tau = EmpiricalDistribution(F2, 1, [3, 1])
    assert implied_rate(tau) == pytest.approx(1 - hq(0.25, 2))


def test_formula_small_case():
    p = PropertySpec("list-decoding", Fraction(1, 4), 2, 2, 8)
    r = rlc_threshold_formula(p, 8)
    assert not r.empty and r.b_cap == 3
    assert r.value == pytest.approx(0.0)
    assert r.error_radius == pytest.approx(2 * 2**6 * 3 / 8)
    assert 0 < r.types_in_property <= r.types_checked


def test_formula_empty_family():
    # radius 0 with L = 1: two distinct words never share a center
    p = PropertySpec("list-decoding", Fraction(0), 1, 2, 5)
    r = rlc_threshold_formula(p, 5)
    assert r.empty and r.value == 1.0 and r.argmin is None


def test_compare_puncturing_with_hadamard():
    H = make_hadamard(field(2), 3)
    p = PropertySpec("list-decoding", Fraction(1, 4), 2, 2, 8)
    c = compare_puncturing_with_rlc(H, p, 8, 200, seed=4)
    assert c.k == 3 and c.rate == Fraction(3, 8)
    assert c.holds


def test_complementary_pair_control():
    C = make_counterexample(64)
    ctl = complementary_pair_control(C, 16, 200, seed=0, k=2)
    assert ctl.complementary == 200
    assert ctl.rlc_contains_ones < 40
