import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from replab.game import (
    Game, GameError, SimplexPoint, StrategyProfile, SupportVerdict, check_support_lemma,
    is_anti_equilibrium, is_nash, support, utilities,
)

from strategies import game_and_profile, simplex


def test_b_is_derived(mp):
    assert np.array_equal(mp.B, -mp.A.T)
    assert "B" not in mp.to_dict()


@pytest.mark.parametrize("A", [[[1.0]], [[1.0, 2.0]], [[1.0], [2.0]], [[np.nan, 0], [0, 0]]])
def test_game_rejects_bad_shapes(A):
    with pytest.raises(GameError):
        Game(np.array(A, dtype=float))


def test_game_json_round_trip(tmp_path, g32):
    p = tmp_path / "g.json"
    p.write_text(json.dumps(g32.to_dict()))
    back = Game.from_json(p)
    assert np.array_equal(back.A, g32.A) and back.name == g32.name


def test_game_rejects_unknown_keys():
    with pytest.raises(GameError):
        Game.from_dict({"A": [[1, 0], [0, 1]], "B": [[0, 0], [0, 0]]})
    with pytest.raises(GameError):
        Game.from_dict({"A": [[1, 0], [0]]})


def test_utilities_examples(mp):
    u, v, px, py = utilities(mp, [0.5, 0.5], [0.5, 0.5])
    assert np.allclose(u, 0) and np.allclose(v, 0) and px == 0 and py == 0
    u, v, _, _ = utilities(mp, StrategyProfile([1, 0], [1, 0]))
    assert np.array_equal(u, [1, -1]) and np.array_equal(v, [-1, 1])


def test_nash_examples(mp, g32):
    assert is_nash(mp, [0.5, 0.5], [0.5, 0.5], 1e-9)
    assert not is_nash(mp, [1, 0], [1, 0], 1e-9)
    assert is_nash(g32, [0.5, 0.5, 0], [0.5, 0.5], 1e-9)


def test_anti_equilibrium_examples(mp, g32):
    assert is_anti_equilibrium(mp, [0.5, 0.5], [0.5, 0.5])
    assert is_anti_equilibrium(g32, [0, 0, 1], [0.5, 0.5])
    assert not is_anti_equilibrium(g32, [0.5, 0.5, 0], [0.5, 0.5])


def test_support_examples():
    assert support([0.5, 0.5, 0], 1e-9).one_based == [1, 2]
    assert support([1, 0], 1e-9).one_based == [1]
    w = np.array([0.5, 1e-10, 0.5 - 1e-10])
    assert support(w / w.sum(), 1e-9).one_based == [1, 3]
    with pytest.raises(ValueError):
        support([0.5, 0.5], 0.6)


def test_support_lemma_examples(mp, g32):
    half = ([0.5, 0.5], [0.5, 0.5])
    assert check_support_lemma(mp, half, half) is SupportVerdict.BOTH_INTERIOR
    assert check_support_lemma(g32, ([0.5, 0.5, 0], [0.5, 0.5]),
                               ([0, 0, 1], [0.5, 0.5])) is SupportVerdict.MUTUALLY_NON_NESTED
    zero = Game(np.zeros((2, 2)))
    assert check_support_lemma(zero, ([1, 0], [1, 0]), ([1, 0], [1, 0])) is SupportVerdict.VIOLATION


def test_support_lemma_rejects_non_equilibria(mp):
    with pytest.raises(GameError):
        check_support_lemma(mp, ([1, 0], [1, 0]), ([0.5, 0.5], [0.5, 0.5]))


def test_simplex_point_validation():
    with pytest.raises(ValueError):
        SimplexPoint([-0.1, 1.1])
    with pytest.raises(ValueError):
        SimplexPoint([0.5, 0.4])
    w = SimplexPoint([0.5, 0.5 + 5e-10]).w
    assert abs(w.sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        SimplexPoint([np.inf, 0])


@given(game_and_profile(interior=False))
def test_zero_sum_identity(gp):
    g, x, y = gp
    _, _, px, py = utilities(g, x, y)
    assert abs(px + py) <= 1e-12


@given(game_and_profile(interior=False), st.floats(0, 1e-3))
def test_anti_equilibrium_is_nash_of_negation(gp, tol):
    g, p, q = gp
    assert is_anti_equilibrium(g, p, q, tol) == is_nash(g.negated(), p, q, tol)


@given(st.integers(2, 6).flatmap(lambda d: simplex(d, interior=False)), st.floats(0, 0.4))
def test_support_partitions_indices(w, tol):
    tol = min(tol, 0.99 / w.size)
    s = support(w, tol)
    assert sorted(s.indices + s.complement) == list(range(w.size))
    assert not set(s.indices) & set(s.complement)
