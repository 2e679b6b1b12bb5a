import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from replab.game import Game, StrategyProfile, random_simplex
from replab.generator import apply_to_cross_entropy
from replab.ode import euler_ode
from replab.sde import (
    DiffusionError, DiffusionSpec, SdeConfig, check_orthogonality,
    diffusion_row_matrix, em_increment, em_step, mc_generator_estimate, screen_custom,
    simulate_ensemble, simulate_face, simulate_sde,
)

from strategies import game_and_profile

MP_EFF = DiffusionSpec.from_effective(0.2, 0.2)


def test_diffusion_matrix_example():
    G = diffusion_row_matrix(DiffusionSpec.diagonal([1, 1], [1, 1]), [0.3, 0.7])
    assert np.allclose(G, [[0.21, -0.21], [-0.21, 0.21]], atol=1e-15)
    spec = DiffusionSpec.diagonal([0.3, 0.5, 0.9], [0.1, 0.1])
    for k in range(3):
        assert not diffusion_row_matrix(spec, np.eye(3)[k]).any()
    assert not diffusion_row_matrix(DiffusionSpec.diagonal([0, 0], [0, 0]), [0.3, 0.7]).any()


def test_orthogonality_examples():
    spec = DiffusionSpec.diagonal([1, 1], [1, 1])
    assert np.allclose(spec.R_matrix([0.3, 0.7]), [[0.7, -0.7], [-0.3, 0.3]])
    assert check_orthogonality(spec, [0.3, 0.7]) <= 1e-15
    bad = DiffusionSpec.custom(lambda x: np.eye(x.size), lambda y: np.eye(y.size))
    assert check_orthogonality(bad, np.array([0.3, 0.7])) == pytest.approx(0.7)
    with pytest.raises(DiffusionError):
        screen_custom(bad, 2, 2)
    g = Game(np.eye(2))
    with pytest.raises(DiffusionError):
        simulate_sde(g, bad, SdeConfig(t_end=1, init=([0.5, 0.5], [0.5, 0.5])))


def test_custom_non_finite_rejected():
    spec = DiffusionSpec.custom(lambda x: np.full((x.size, x.size), np.nan), lambda y: np.eye(y.size))
    with pytest.raises(DiffusionError):
        diffusion_row_matrix(spec, [0.5, 0.5])


def test_orthogonality_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        spec = DiffusionSpec.diagonal(rng.uniform(0, 3, n), rng.uniform(0, 3, 2))
        for x in random_simplex(rng, n, 20):
            assert check_orthogonality(spec, x) <= 1e-12


def test_em_step_degenerate_is_euler(mp):
    zero = DiffusionSpec.diagonal([0, 0], [0, 0])
    s = StrategyProfile([0.6, 0.4], [0.3, 0.7])
    ref = euler_ode(mp, s, 1e-2, 1)
    out = em_step(mp, zero, s, 1e-2, (np.zeros(2), np.zeros(2)))
    assert np.allclose(out.x.w, ref.x[1], atol=1e-15) and np.allclose(out.y.w, ref.y[1], atol=1e-15)


def test_em_step_fixes_corners(g32):
    spec = DiffusionSpec.uniform(0.7, 0.7, 3, 2)
    rng = np.random.default_rng(0)
    for i in range(3):
        for j in range(2):
            s = StrategyProfile(np.eye(3)[i], np.eye(2)[j])
            out = em_step(g32, spec, s, 1e-2, (rng.normal(size=3), rng.normal(size=2)))
            assert np.array_equal(out.x.w, s.x.w) and np.array_equal(out.y.w, s.y.w)


def test_pre_projection_sum(mp):
    xn, yn = em_increment(mp, MP_EFF, [0.5, 0.5], [0.5, 0.5], 1e-3,
                          np.array([1, -1]) / math.sqrt(2), np.array([1, -1]) / math.sqrt(2))
    assert abs(xn.sum() - 1) <= 1e-10 and abs(yn.sum() - 1) <= 1e-10


@settings(max_examples=200)
@given(game_and_profile(max_dim=5, interior=False), st.integers(0, 2 ** 32))
def test_row_sums_vanish(gp, seed):
    g, x, y = gp
    rng = np.random.default_rng(seed)
    spec = DiffusionSpec.diagonal(rng.uniform(0, 1, g.n), rng.uniform(0, 1, g.m))
    xn, yn = em_increment(g, spec, x, y, 1e-3, rng.normal(size=g.n), rng.normal(size=g.m))
    assert abs(xn.sum() - 1) <= 1e-10 and abs(yn.sum() - 1) <= 1e-10
    # the general matrix form gives the same increment
    sq = math.sqrt(1e-3)
    xi = rng.normal(size=g.n)
    a, _ = em_increment(g, spec, x, y, 1e-3, xi, np.zeros(g.m))
    u = g.A @ y
    b = x + x * (u - x @ u) * 1e-3 + diffusion_row_matrix(spec, x) @ xi * sq
    assert np.max(np.abs(a - b)) <= 1e-14


def test_zero_noise_matches_euler(mp):
    cfg = SdeConfig(t_end=2, init=([0.6, 0.4], [0.3, 0.7]), dt=1e-3)
    a = simulate_sde(mp, DiffusionSpec.diagonal([0, 0], [0, 0]), cfg)
    b = euler_ode(mp, cfg.init, 1e-3, 2000)
    assert np.max(np.abs(a.x - b.x)) <= 1e-12 and np.max(np.abs(a.y - b.y)) <= 1e-12


def test_seed_reproducibility(mp, tmp_path):
    cfg = SdeConfig(t_end=20, init=([0.6, 0.4], [0.6, 0.4]), seed=42, thin=10)
    a, b = simulate_sde(mp, MP_EFF, cfg), simulate_sde(mp, MP_EFF, cfg)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = simulate_sde(mp, MP_EFF, SdeConfig(t_end=20, init=cfg.init, seed=43, thin=10))
    assert not np.array_equal(a.x, c.x)


def test_thinning_does_not_change_path(mp):
    base = SdeConfig(t_end=5, init=([0.6, 0.4], [0.6, 0.4]), seed=1, thin=1)
    a = simulate_sde(mp, MP_EFF, base)
    b = simulate_sde(mp, MP_EFF, SdeConfig(t_end=5, init=base.init, seed=1, thin=7))
    idx = np.round(b.times / 1e-3).astype(int)
    assert np.array_equal(a.x[idx], b.x)


def test_python_and_compiled_paths_agree(mp):
    custom = screen_custom(DiffusionSpec.custom(MP_EFF.R_matrix, MP_EFF.S_matrix), 2, 2)
    cfg = SdeConfig(t_end=3, init=([0.6, 0.4], [0.6, 0.4]), seed=9, thin=5)
    a, b = simulate_sde(mp, MP_EFF, cfg), simulate_sde(mp, custom, cfg)
    assert np.max(np.abs(a.x - b.x)) < 1e-12


def test_ensemble_is_order_independent(mp, monkeypatch):
    cfg = SdeConfig(t_end=2, init=([0.6, 0.4], [0.6, 0.4]), seed=5, thin=100)
    monkeypatch.setenv("REPLAB_THREADS", "1")
    serial = simulate_ensemble(mp, MP_EFF, cfg, 4)
    monkeypatch.setenv("REPLAB_THREADS", "3")
    threaded = simulate_ensemble(mp, MP_EFF, cfg, 4)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert not np.array_equal(serial[0].x, serial[1].x)


def test_simplex_preserved_mp(mp):
    cfg = SdeConfig(t_end=200, init=([0.6, 0.4], [0.6, 0.4]), seed=3, thin=10)
    tr = simulate_sde(mp, DiffusionSpec.from_effective(1.0, 1.0), cfg)
    for z in (tr.x, tr.y):
        assert z.min() >= 0 and np.max(np.abs(z.sum(1) - 1)) <= 1e-9
    assert tr.meta["clamp_events"] < 0.01 * tr.meta["steps"]


def test_face_invariance(mp, g32):
    spec = DiffusionSpec.uniform(0.3, 0.3, 3, 2)
    cfg = SdeConfig(t_end=20, init=([0.4, 0.6, 0.0], [0.5, 0.5]), seed=2)
    tr = simulate_face(g32, spec, cfg, ((0, 1), (0, 1)))
    assert np.all(tr.x[:, 2] == 0)
    with pytest.raises(DiffusionError):
        simulate_face(g32, spec, cfg, ((0,), (0, 1)))
    corner = simulate_face(mp, MP_EFF, SdeConfig(t_end=5, init=([0, 1], [1, 0]), seed=1),
                           ((1,), (0,)))
    assert np.all(corner.x == [0, 1]) and np.all(corner.y == [1, 0])


def test_face_matches_reduced_equation(mp):
    # on {x1 = 0}: dY1 = 2 Y1 (1 - Y1) dt + eta Y1 (1 - Y1) dW
    eta = 0.2
    cfg = SdeConfig(t_end=2, init=([0.0, 1.0], [0.3, 0.7]), seed=4, thin=1)
    tr = simulate_face(mp, MP_EFF, cfg, ((1,), (0, 1)))
    y = 0.3
    from replab.noise import NoiseStream
    z = NoiseStream(4, 0, 4).normals(0, 2000)
    # the full two-component update, written in the reduced variable
    for k in range(2000):
        s = eta / math.sqrt(2)
        v1 = -(1 * 0 - 1 * 1)   # (Bx)_1 at x = e_2
        v2 = -(-1 * 0 + 1 * 1)  # (Bx)_2
        a = v1 * 1e-3 + s * z[k, 2] * math.sqrt(1e-3)
        b = v2 * 1e-3 + s * z[k, 3] * math.sqrt(1e-3)
        y = y + y * (1 - y) * (a - b)
    assert abs(tr.y[-1, 0] - y) < 1e-12
    # and in law the drift is +2 Y1 (1 - Y1): the path rises on average
    ens = simulate_ensemble(mp, MP_EFF, SdeConfig(t_end=1, init=cfg.init, seed=8, thin=1000), 64)
    assert np.mean([t.y[-1, 0] for t in ens]) > 0.5


def test_face_sign_flip_on_y1_zero(mp):
    ens = simulate_ensemble(mp, MP_EFF, SdeConfig(t_end=1, init=([0.3, 0.7], [0.0, 1.0]),
                                                  seed=8, thin=1000), 64)
    assert all(np.all(t.y[:, 0] == 0) for t in ens)
    assert np.mean([t.x[-1, 0] for t in ens]) < 0.3


def test_two_strategy_reduction_matches_in_law(mp):
    init = ([0.6, 0.4], [0.6, 0.4])
    full = simulate_ensemble(mp, MP_EFF, SdeConfig(t_end=1, init=init, seed=11, thin=1000), 400)
    red = simulate_ensemble(mp, MP_EFF, SdeConfig(t_end=1, init=init, seed=12, thin=1000,
                                                  reduce_two_strategy=True), 400)
    a = np.array([t.x[-1, 0] for t in full])
    b = np.array([t.x[-1, 0] for t in red])
    se = math.sqrt(a.var() / a.size + b.var() / b.size)
    assert abs(a.mean() - b.mean()) < 4 * se
    assert 0.7 < a.var() / b.var() < 1.4


def test_config_validation():
    init = ([0.5, 0.5], [0.5, 0.5])
    assert SdeConfig(t_end=100, init=init).burn_in == 10
    for kw in ({"dt": 2.0}, {"burn_in": 1.0}, {"thin": 0}, {"clamp_eps": -1}, {"seed": -1}):
        with pytest.raises(ValueError):
            SdeConfig(**{"t_end": 1.0, "init": init, **kw})


@pytest.mark.slow
def test_weak_consistency_with_generator(mp, g32):
    cases = [(mp, MP_EFF, ([0.5, 0.5], [0.5, 0.5]), ([0.3, 0.7], [0.6, 0.4])),
             (g32, DiffusionSpec.uniform(0.5, 0.5, 3, 2), ([0.5, 0.5, 0], [0.5, 0.5]),
              ([0.2, 0.3, 0.5], [0.4, 0.6]))]
    for g, spec, ref, x0 in cases:
        est, se = mc_generator_estimate(g, spec, ref, x0, dt=1e-4, replicas=200_000, seed=3)
        assert abs(est - apply_to_cross_entropy(g, spec, ref, x0)) < 3 * se
