import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlike.key_rates import dw_rate_of_state
from wlike.operator_core import partial_trace
from wlike.protocols import (
    PAIRS,
    epsilon_schedule,
    filter_rate,
    filter_rate_grid,
    filter_state,
    filter_sweep,
    find_threshold_D,
    povm_pair,
    random_branches,
    random_rate,
    random_success_prob,
    random_sweep,
    random_xstate_closed_form,
    squeeze_random_branch,
)
from wlike.squeezing import family_twisting, privacy_squeeze, reduce_to_pair, xstate_closed_form
from wlike.state_family import StateFamilyParams

EPS_GRID = [round(0.01 * i, 2) for i in range(101)]


def q_oracle(D, M):
    """Success mass for pair (1,2) by summing branch weights round by round.

    Key-diagonal weights of the N=3 family (units of its normalization):
    |000> 6, single excitations 2D+3, double excitations 3. Works on exact
    fractions with squared epsilons, so no square roots appear.
    """
    D = Fraction(D)
    weights = {}
    for bits in range(8):
        n1 = bin(bits).count("1")
        weights[bits] = {0: Fraction(6), 1: 2 * D + 3, 2: Fraction(3), 3: Fraction(0)}[n1]
    total = sum(weights.values())
    success = Fraction(0)
    for i in range(M, 0, -1):
        e2 = Fraction(1, 1 + i)
        for bits, w in weights.items():
            if bits & 1 == 0:  # party 3 in |0>
                zeros12 = 2 - bin(bits >> 1).count("1")
                success += w * e2 * (1 - e2) ** zeros12
        weights = {b: w * (1 - e2) ** (3 - bin(b).count("1")) for b, w in weights.items()}
    return success / total


# -- filtering ------------------------------------------------------------------


def test_filter_identity():
    x = xstate_closed_form(3, 2, exact=True)
    out, q = filter_state(x, 1)
    assert q == 1
    assert (out.a, out.b, out.c, out.d) == (x.a, x.b, x.c, x.d)


def test_filter_probability_exact():
    _, q = filter_state(xstate_closed_form(3, 2, exact=True), Fraction(1, 2))
    assert q == Fraction(141, 576)
    assert float(q) == pytest.approx(0.244792, abs=1e-6)


def test_filter_eps_zero():
    x = xstate_closed_form(3, 2, exact=True)
    out, q = filter_state(x, 0)
    assert q == Fraction(3, 36)
    np.testing.assert_allclose(out.matrix(), np.diag([0, 0, 0, 1.0]))
    assert filter_rate(3, 2, 0.0).rate == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.fractions(0, 1), st.fractions(0, 1), st.integers(3, 7), st.integers(2, 5000))
def test_filter_composition(e1, e2, N, D):
    x = xstate_closed_form(N, D, exact=True)
    once, q1 = filter_state(x, e1)
    twice, q2 = filter_state(once, e2)
    direct, q = filter_state(x, e1 * e2)
    assert q1 * q2 == q
    assert (twice.a, twice.b, twice.c, twice.d) == (direct.a, direct.b, direct.c, direct.d)


def test_filter_rate_small_D_negative():
    r = filter_rate(3, 2, 0.5)
    assert r.rate < 0
    assert r.q == pytest.approx(141 / 576)


def test_filter_rate_large_D_positive():
    best = max(filter_rate(3, 3000, e).rate for e in EPS_GRID)
    assert best > 0


def test_filter_commutes_with_squeezing(rho3, params3):
    eps = 0.37
    red = reduce_to_pair(rho3, params3, 1, 2)
    v = np.diag([eps, 1.0])
    k = np.kron(np.kron(v, v), np.eye(red.side // 4))
    filtered = red.with_matrix(k @ red.mat @ k.T)
    q = filtered.trace().real
    numeric = privacy_squeeze(filtered / q, family_twisting(params3))
    closed, q_closed = filter_state(xstate_closed_form(3, 2), eps)
    assert q == pytest.approx(q_closed, abs=1e-12)
    assert np.max(np.abs(numeric - closed.matrix())) < 1e-10


def test_filter_sweep_matches_pointwise():
    recs = filter_sweep(3, [2, 50, 2500], [0.0, 0.2, 1.0])
    assert [(r.D, r.epsilon) for r in recs] == [(D, e) for D in (2, 50, 2500) for e in (0.0, 0.2, 1.0)]
    for rec in recs:
        ref = filter_rate(3, rec.D, rec.epsilon)
        assert rec.q == pytest.approx(ref.q, rel=1e-12)
        assert rec.rate == pytest.approx(ref.rate, abs=1e-12)


# -- random protocol ---------------------------------------------------------------


@pytest.mark.parametrize("eps", np.linspace(0, 1, 201))
def test_povm_completeness(eps):
    v, w = povm_pair(eps)
    np.testing.assert_allclose(v.T @ v + w.T @ w, np.eye(2), atol=1e-12)


def test_povm_endpoints():
    v, w = povm_pair(0.0)
    np.testing.assert_array_equal(v, np.eye(2))
    np.testing.assert_array_equal(w, np.zeros((2, 2)))
    v, _ = povm_pair(1.0)
    np.testing.assert_array_equal(v, np.diag([0.0, 1.0]))


def test_schedule():
    assert epsilon_schedule(1) == pytest.approx([1 / math.sqrt(2)])
    assert epsilon_schedule(3) == pytest.approx([0.5, 1 / math.sqrt(3), 1 / math.sqrt(2)])
    s = epsilon_schedule(50)
    assert all(0 < e <= 1 for e in s)
    assert all(a < b for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("M", [1, 2, 3, 4, 10, 57])
def test_q_formula_matches_exact_oracle(M):
    for D in (2, 7, 100):
        assert random_success_prob(D, M, exact=True) == q_oracle(D, M)


def test_q_values():
    assert random_success_prob(2, 1, exact=True) == Fraction(23, 144)
    assert random_success_prob(2, 2, exact=True) == Fraction(35, 162)
    assert abs(random_success_prob(2, 10**5) - 1 / 3) < 1e-4


def test_oracle_rejects_half_as_last_epsilon():
    # with eps_1 = 1/2 instead of 1/sqrt(2), the M=1 success mass is not 23/144
    D = Fraction(2)
    e2 = Fraction(1, 4)
    mass = 6 * e2 * (1 - e2) ** 2 + 2 * (2 * D + 3) * e2 * (1 - e2) + 3 * e2
    assert mass / (6 * D + 24) != Fraction(23, 144)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_branch_recursion_probability(params3, rho3, M):
    out = random_branches(params3, M, rho=rho3)
    assert out.probability == pytest.approx(random_success_prob(2, M), abs=1e-12)
    total = out.continue_mass + sum(out.success_mass.values()) + out.failure_mass
    assert total == pytest.approx(1.0, abs=1e-10)
    for pair in PAIRS:
        assert out.success_mass[pair] == pytest.approx(out.probability, abs=1e-12)


@pytest.mark.parametrize("M", [1, 2])
@pytest.mark.parametrize("pair", PAIRS)
def test_branch_squeeze_matches_closed_form(params3, rho3, M, pair):
    rho4 = squeeze_random_branch(params3, M, pair, rho=rho3)
    assert np.max(np.abs(rho4 - random_xstate_closed_form(2, M).matrix())) < 1e-10


def test_random_requires_three_parties(params4):
    with pytest.raises(ValueError):
        random_branches(params4, 1)


def test_random_closed_form_values():
    x = random_xstate_closed_form(2, 1, exact=True)
    assert (x.a, x.b, x.c, x.d, x.norm) == (3, 7, 2, 6, 23)
    for D in (2, 9, 1000):
        for M in (1, 5, 100):
            y = random_xstate_closed_form(D, M, exact=True)
            assert y.a + 2 * y.b + y.d == y.norm


def test_random_limit_state():
    x = random_xstate_closed_form(1e12, 7).matrix()
    limit = np.array([[0, 0, 0, 0], [0, 0.5, 0.25, 0], [0, 0.25, 0.5, 0], [0, 0, 0, 0]])
    np.testing.assert_allclose(x, limit, atol=1e-10)


def test_random_rate_values():
    assert random_rate(100, 100).rate > 0
    assert random_rate(10, 100).rate <= 0
    h34 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert random_rate(10**12, 10**6).rate == pytest.approx((1 - h34) / 3, abs=1e-5)
    assert (1 - h34) / 3 == pytest.approx(0.062907, abs=1e-6)


def test_random_sweep_matches_pointwise():
    recs = random_sweep([2, 80, 300], [1, 100])
    for rec in recs:
        ref = random_rate(rec.D, rec.M)
        assert rec.rate == pytest.approx(ref.rate, abs=1e-12)
        assert rec.q == pytest.approx(ref.q, rel=1e-14)
    assert recs[0].q == pytest.approx(23 / 144)


# -- thresholds ----------------------------------------------------------------------


def test_threshold_random():
    res = find_threshold_D("random", range(2, 501), M=100)
    assert res.found and 40 <= res.D <= 160
    assert random_rate(res.D, 100).rate > 0
    assert random_rate(res.D - 1, 100).rate <= 0


def test_threshold_random_none():
    res = find_threshold_D("random", range(2, 11), M=1)
    assert not res.found
    assert str(res) == "random: no threshold in range"


def test_threshold_filter():
    res = find_threshold_D("filter", range(2, 6001), N=3, eps=EPS_GRID)
    assert res.found and 1000 <= res.D <= 4000
    assert filter_rate(3, res.D, res.parameter).rate > 0
    assert max(filter_rate(3, res.D - 1, e).rate for e in EPS_GRID) <= 0


def test_more_parties_need_larger_D():
    Ds = np.unique(np.geomspace(2, 1e6, 3000).astype(int))
    t3 = find_threshold_D("filter", Ds, N=3, eps=EPS_GRID)
    t5 = find_threshold_D("filter", Ds, N=5, eps=EPS_GRID)
    assert t3.found and t5.found and t5.D > t3.D


def test_parallel_grid_is_identical():
    a = filter_rate_grid(3, range(2, 400), EPS_GRID, jobs=1)
    b = filter_rate_grid(3, range(2, 400), EPS_GRID, jobs=4)
    np.testing.assert_array_equal(a, b)


def test_threshold_bad_mode():
    with pytest.raises(ValueError):
        find_threshold_D("other", [2])
