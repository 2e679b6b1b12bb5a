import time

import numpy as np
import pytest
from hypothesis import given, settings

from replab.equilibrium import (
    EquilibriumError, maximal_support_equilibrium, optimal_vertices, solve_value,
    value_by_enumeration,
)
from replab.game import Game, SupportVerdict, check_support_lemma, is_nash, random_game, support

from strategies import games


def test_matching_pennies(mp):
    r = maximal_support_equilibrium(mp)
    assert r.value == 0.0
    for w in (r.p, r.q, r.p_star, r.q_star):
        assert np.max(np.abs(w.w - 0.5)) <= 1e-9
    assert r.interior and r.interior_anti


def test_three_by_two(g32):
    r = maximal_support_equilibrium(g32)
    assert abs(r.value) <= 1e-9
    assert np.allclose(r.p.w, [0.5, 0.5, 0], atol=1e-9)
    assert np.allclose(r.q.w, [0.5, 0.5], atol=1e-9)
    assert np.allclose(r.p_star.w, [0, 0, 1], atol=1e-9)
    assert np.allclose(r.q_star.w, [0.5, 0.5], atol=1e-9)
    assert (r.I.one_based, r.J.one_based) == ([1, 2], [1, 2])
    assert (r.I_star.one_based, r.J_star.one_based) == ([3], [1, 2])
    assert not r.interior
    assert r.tilde_I == () and r.tilde_J == ()


def test_negated_three_by_two(g32):
    v, p, _ = solve_value(g32.negated())
    assert abs(v - 2) < 1e-9 and np.allclose(p.w, [0, 0, 1])


def test_constant_game():
    g = Game(np.full((2, 2), 0.7))
    v, _, _ = solve_value(g)
    assert abs(v - 0.7) < 1e-12
    r = maximal_support_equilibrium(g)
    assert r.interior and "non_unique_equilibrium" in r.flags


def test_enumeration_cap():
    with pytest.raises(EquilibriumError):
        optimal_vertices(np.zeros((9, 2)))


def test_to_dict_is_plain(g32):
    d = maximal_support_equilibrium(g32).to_dict()
    assert d["I_star"] == [3] and isinstance(d["value"], float)


def test_eight_by_eight_runtime():
    g = random_game(np.random.default_rng(3), 8, 8)
    t = time.perf_counter()
    r = maximal_support_equilibrium(g)
    assert time.perf_counter() - t < 5.0
    assert is_nash(g, r.p, r.q, 1e-8)


@settings(max_examples=150)
@given(games())
def test_lp_and_enumeration_agree(g):
    v, p, q = solve_value(g)
    assert is_nash(g, p, q, 1e-8)
    assert abs(v - value_by_enumeration(g)) <= 1e-8
    assert abs(v - float(p.w @ g.A @ q.w)) <= 1e-8
    # the column player's maximin in B = -A^T has value -v
    vb, _, _ = solve_value(Game(g.B))
    assert abs(vb + v) <= 1e-8


@settings(max_examples=100)
@given(games())
def test_barycenter_has_maximal_support(g):
    r = maximal_support_equilibrium(g)
    assert is_nash(g, r.p, r.q, 1e-8)
    assert abs(r.value - float(r.p.w @ g.A @ r.q.w)) <= 1e-8
    for vert in r.row_vertices:
        assert set(support(vert, 1e-7)) <= set(r.I)
    for vert in r.col_vertices:
        assert set(support(vert, 1e-7)) <= set(r.J)
    if r.interior:
        assert r.p.w.min() > 1e-9 and r.q.w.min() > 1e-9


def test_support_lemma_on_random_games():
    rng = np.random.default_rng(11)
    verdicts = []
    for _ in range(200):
        n, m = rng.integers(2, 5, size=2)
        g = random_game(rng, n, m)
        r = maximal_support_equilibrium(g)
        verdicts.append(check_support_lemma(g, r.eq, r.anti))
    assert verdicts.count(SupportVerdict.VIOLATION) == 0
