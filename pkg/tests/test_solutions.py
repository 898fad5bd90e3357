from __future__ import annotations

import json
import math

import numpy as np
import pytest

from oracles import psi_trial, solutions_brute, weighted_count_brute
from smoothxyz.singular import s_f, s_f_star, smooth_prime_correction
from smoothxyz.smoothset import BudgetExceeded, Triple
from smoothxyz.solutions import (
    count_all, count_primitive, enumerate_solutions, gcd_scaling_check, heuristic_estimate,
    kappa0_profile, main_term_report, multiples_lower_bound, pair_counts, sieve_identity_check,
    smoothness_exponent, sunit_count, sunit_reference, weighted_count, weighted_primitive_count,
)
from smoothxyz.weightfn import make_bump, make_plateau

PHI = make_plateau(0.05)


def test_small_examples():
    assert count_all(4, 2) == 2
    assert count_primitive(4, 2) == 1
    assert count_primitive(10, 3) == 7
    assert [(t.X, t.Y, t.Z) for t in enumerate_solutions(10, 3, primitive=True)] == [
        (1, 1, 2), (1, 2, 3), (2, 1, 3), (1, 3, 4), (3, 1, 4), (1, 8, 9), (8, 1, 9)]


def test_count_all_10_3_enumeration():
    # the trial-division oracle finds 16 ordered solutions; the listed set of 12
    # omits (2,4,6), (4,2,6), (2,6,8), (6,2,8)
    brute = solutions_brute(10, 3)
    assert len(brute) == 16
    assert {(2, 4, 6), (4, 2, 6), (2, 6, 8), (6, 2, 8)} <= set(brute)
    assert count_all(10, 3) == len(brute)


@pytest.mark.parametrize("H,y", [(30, 2), (60, 3), (100, 5), (150, 7), (200, 11), (250, 13)])
def test_counts_against_brute(H, y):
    assert count_all(H, y) == len(solutions_brute(H, y))
    assert count_primitive(H, y) == len(solutions_brute(H, y, primitive=True))
    assert [(t.X, t.Y, t.Z) for t in enumerate_solutions(H, y)] == sorted(
        solutions_brute(H, y), key=lambda t: (t[2], t[0]))


@pytest.mark.parametrize("H,y", [(100, 3), (500, 7), (1000, 13)])
def test_ordering_identity(H, y):
    for prim in (False, True):
        pc = pair_counts(H, y, primitive=prim)
        sols = enumerate_solutions(H, y, primitive=prim)
        assert pc.ordered == len(sols)
        assert pc.unordered == sum(t.X <= t.Y for t in sols)
        assert pc.diagonal == sum(t.X == t.Y for t in sols)
        assert pc.ordered == 2 * pc.unordered - pc.diagonal
    assert count_all(H, y, ordered=False) == pair_counts(H, y).unordered


@pytest.mark.parametrize("H,y", [(10, 3), (100, 2), (1000, 5), (5000, 11)])
def test_multiples_bound(H, y):
    n, psi_half = multiples_lower_bound(H, y)
    assert psi_half == psi_trial(H // 2, y)
    assert n >= psi_half


def test_primitive_subset_and_coprime():
    H, y = 10**4, 7
    sols = enumerate_solutions(H, y, primitive=True)
    assert len(sols) <= count_all(H, y)
    for t in sols:
        assert math.gcd(t.X, t.Y) == math.gcd(t.Y, t.Z) == math.gcd(t.X, t.Z) == 1


@pytest.mark.parametrize("H,y", [(1000, 7), (1000, 3), (800, 13)])
def test_gcd_bijection(H, y):
    assert gcd_scaling_check(H, y)


def test_budget():
    with pytest.raises(BudgetExceeded):
        count_all(10**5, 5, budget=10**4)


# weighted


@pytest.mark.parametrize("x,y,phi", [(200, 5, PHI), (400, 7, PHI), (600, 11, make_bump(0.1, 0.8))])
def test_weighted_against_brute(x, y, phi):
    assert abs(weighted_count(x, y, phi) - weighted_count_brute(x, y, phi)) < 1e-9
    assert abs(weighted_primitive_count(x, y, phi) - weighted_count_brute(x, y, phi, primitive=True)) < 1e-9


def test_weighted_edge_cases():
    assert weighted_count(200, 5, make_bump(0.96, 0.99)) == 0
    # a plateau has support [eps, 1 - eps]; sums within the support are < 2(1 - eps)
    assert weighted_count(0.5, 5, PHI) == 0


def test_weighted_monotone_in_weight():
    small, big = make_plateau(0.1), make_plateau(0.05)
    t = np.linspace(0, 1, 2001)
    assert np.all(small(t) <= big(t))
    assert weighted_count(500, 7, small) <= weighted_count(500, 7, big)


# sieve


@pytest.mark.parametrize("x,y", [(500, 20), (2000, 50), (300, 5)])
def test_sieve_inequality(x, y):
    r = sieve_identity_check(x, y, PHI)
    assert r.passed and r.lhs_gap <= r.rhs_bound
    assert r.P_z == 1  # z = log(y)/2 < 2 here


def test_sieve_z_at_least_two():
    # y >= e^4 ~ 54.6 gives z >= 2 and P_z = 2
    r = sieve_identity_check(1500, 60, PHI)
    assert r.P_z == 2 and r.passed


def test_sieve_zero_weight():
    r = sieve_identity_check(500, 20, make_bump(0.96, 0.99))
    assert r.lhs_gap == 0 and r.rhs_bound == 0 and r.passed


# report


def test_report_small_c():
    r = main_term_report(10**5, 30, PHI)
    assert 0 <= r.ratio_primitive <= 1
    assert r.n_primitive <= r.n_all
    assert r.n_all == pytest.approx(weighted_count(10**5, 30, PHI), rel=1e-12)
    assert r.c < 1 / 3 and r.main_term_all is None and r.predicted_density is None
    data = json.loads(r.to_json())
    assert data["schema_version"] == 1 and data["ordering"] == "ordered"


def test_report_main_term_ratio():
    x, y = 10**4, 1000
    r = main_term_report(x, y, PHI)
    assert r.c > 1 / 3
    ratio = r.main_term_primitive / r.main_term_all
    assert abs(ratio - smooth_prime_correction(r.c, y)) <= 1e-10 * ratio
    assert ratio == pytest.approx(s_f_star(r.c, y).value / s_f(r.c, y).value, rel=1e-12)


# S-units, exponents, heuristics


def test_sunit_counts():
    assert sunit_count(1, 8) == 1
    assert sunit_count(2, 10) == count_primitive(10, 3) == 7
    vals = [[sunit_count(s, H) for H in (10, 50, 200)] for s in (1, 2, 3, 4)]
    for row in vals:
        assert row == sorted(row)
    for col in zip(*vals):
        assert list(col) == sorted(col)
    assert sunit_reference(1) == pytest.approx(math.e)


def test_smoothness_exponent():
    assert smoothness_exponent(Triple(1, 8, 9)) == pytest.approx(math.log(3) / math.log(math.log(9)))
    assert smoothness_exponent(Triple(1, 8, 9)) == pytest.approx(1.3956, abs=1e-4)
    assert smoothness_exponent(Triple(8, 1, 9)) == smoothness_exponent(Triple(1, 8, 9))
    with pytest.raises(ValueError):
        smoothness_exponent(Triple(1, 1, 2))


def test_kappa0_profile():
    rows = kappa0_profile(1000, 7)
    assert rows and all(b.running_min <= a.running_min for a, b in zip(rows, rows[1:]))
    assert rows[-1].running_min == min(r.kappa0 for r in rows)


def test_heuristic():
    h = heuristic_estimate(1e6, 2.0)
    assert h.psi_source == "exact" and h.feasible
    assert math.log(h.binom_lower) == pytest.approx(h.log_binom_lgamma, rel=1e-6)
    assert heuristic_estimate(1e6, 2.5).P_value > h.P_value
    with pytest.raises(ValueError):
        heuristic_estimate(1e6, 1.0)


def test_heuristic_k_zero():
    # K = floor(log H / (kappa log log H)) is 0 once kappa is large enough
    h = heuristic_estimate(100.0, 8.0)
    assert h.K == 0 and h.binom_lower == 1
