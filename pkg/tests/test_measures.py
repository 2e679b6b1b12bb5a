import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from replab.game import StrategyProfile
from replab.measures import (
    MeasureError, OccupationHistogram, corner_indicator, corner_mass, ensemble_regret,
    max_interior_ball_mass, occupation_histogram, regret_paths, regret_report, time_average,
)
from replab.ode import OdeConfig, integrate_ode
from replab.sde import DiffusionSpec, SdeConfig, simulate_ensemble, simulate_sde
from replab.trajectory import Trajectory


def const_traj(x, y, n=11):
    t = np.linspace(0, 10, n)
    return Trajectory(t, np.tile(x, (n, 1)), np.tile(y, (n, 1)))


def uniform_traj(rng, N=20_000):
    x1, y1 = rng.uniform(size=N), rng.uniform(size=N)
    return Trajectory(np.arange(N) * 1.0, np.column_stack([x1, 1 - x1]),
                      np.column_stack([y1, 1 - y1]))


def test_corner_histogram():
    h = occupation_histogram(const_traj([1, 0], [0, 1]), ("x1", "y1"), 10)
    assert h.counts.sum() == h.total_samples == 11
    assert h.counts[9, 0] == 11
    assert np.array_equal(h.edges, np.linspace(0, 1, 11))


def test_uniform_histogram(rng):
    h = occupation_histogram(uniform_traj(rng), ("x1",), 20)
    N, k = h.total_samples, 20
    sd = math.sqrt(N * (1 / k) * (1 - 1 / k))
    assert np.all(np.abs(h.counts - N / k) < 5 * sd)


def test_histogram_merge_and_round_trip(rng):
    a = occupation_histogram(uniform_traj(rng, 500), ("x1", "y1"), 8)
    b = occupation_histogram(uniform_traj(rng, 300), ("x1", "y1"), 8)
    m = a.merge(b)
    assert m.total_samples == 800 and m.counts.sum() == 800
    back = OccupationHistogram.from_dict(m.to_dict())
    assert np.array_equal(back.counts, m.counts) and back.axes == m.axes


def test_histogram_errors():
    tr = const_traj([1, 0], [0, 1])
    with pytest.raises(MeasureError):
        occupation_histogram(tr, ("x1",), 1)
    with pytest.raises(MeasureError):
        occupation_histogram(tr, ("x1",), 5, burn_in=20)


def test_corner_mass_of_deterministic_orbit(mp):
    tr = integrate_ode(mp, OdeConfig(t_end=50, init=StrategyProfile([0.6, 0.4], [0.6, 0.4])))
    rep = corner_mass(tr, 0.05)
    assert rep.total == 0 and rep.residual == pytest.approx(1)


def test_corner_mass_constant():
    rep = corner_mass(const_traj([0, 1], [1, 0]), 0.1)
    assert rep.masses[1, 0] == pytest.approx(1) and rep.residual == 0


def test_corner_mass_radius_check():
    with pytest.raises(MeasureError):
        corner_mass(const_traj([0, 1], [1, 0]), 0.5)


@pytest.fixture(scope="module")
def noisy_path():
    from replab.figures import bundled_game
    mp = bundled_game("matching_pennies")
    return simulate_sde(mp, DiffusionSpec.from_effective(0.2, 0.2),
                        SdeConfig(t_end=2000, init=([0.6, 0.4], [0.6, 0.4]), seed=7, thin=10))


def test_corner_mass_consistency(noisy_path):
    rep = corner_mass(noisy_path, 0.1, burn_in=200)
    assert abs(rep.total + rep.residual - 1) <= 1e-12
    for i in range(2):
        for j in range(2):
            ta = time_average(noisy_path, corner_indicator(i, j, 0.1), burn_in=200)
            assert abs(ta - rep.masses[i, j]) <= 1e-12


@settings(max_examples=20)
@given(st.lists(st.floats(0.01, 0.49), min_size=2, max_size=5))
def test_corner_mass_monotone_in_radius(noisy_path, radii):
    masses = [corner_mass(noisy_path, r, 200).total for r in sorted(radii)]
    assert all(a <= b + 1e-15 for a, b in zip(masses, masses[1:]))


def test_time_average_examples(mp):
    tr = integrate_ode(mp, OdeConfig(t_end=500, init=([0.6, 0.4], [0.6, 0.4])))
    assert time_average(tr, lambda x, y: np.ones(len(x))) == pytest.approx(1, abs=1e-14)
    assert abs(time_average(tr, lambda x, y: x[:, 0]) - 0.5) < 0.02
    with pytest.raises(MeasureError):
        time_average(tr, lambda x, y: x[:, 0], burn_in=1e4)


def test_equal_volume_comparison(noisy_path):
    best, where = max_interior_ball_mass(noisy_path, 0.1, 200)
    assert 0 <= best <= 1 and len(where) == 2


def test_regret_deterministic_bound(mp):
    tr = integrate_ode(mp, OdeConfig(t_end=200, init=([0.5, 0.5], [0.5, 0.5]), thin=10))
    rep = regret_report(mp, tr)
    assert rep.exceed_events == 0
    assert np.all(rep.regret_x[0] == 0)
    assert rep.regret_x.max() <= math.log(2) + 1e-3


def test_regret_matches_log_ratio(mp):
    """Along the flow, regret equals ln x_i(t) - ln x_i(0)."""
    tr = integrate_ode(mp, OdeConfig(t_end=50, init=([0.7, 0.3], [0.2, 0.8]), thin=1, dt=1e-3))
    rx, _ = regret_paths(mp, tr)
    assert np.max(np.abs(rx - np.log(tr.x / tr.x[0]))) < 1e-6


def test_regret_random_inits(mp):
    rng = np.random.default_rng(8)
    for _ in range(100):
        x1, y1 = rng.uniform(0.02, 0.98, 2)
        tr = integrate_ode(mp, OdeConfig(t_end=20, init=([x1, 1 - x1], [y1, 1 - y1]), dt=1e-2, thin=1))
        assert regret_report(mp, tr).exceed_events == 0


def test_regret_errors(mp):
    with pytest.raises(MeasureError):
        regret_report(mp, Trajectory([0.0], [[0.5, 0.5]], [[0.5, 0.5]]))
    tr = integrate_ode(mp, OdeConfig(t_end=10, init=([0.6, 0.4], [0.5, 0.5]), thin=200))
    with pytest.raises(MeasureError):
        regret_report(mp, tr)


def test_ensemble_regret_allowance(mp):
    spec = DiffusionSpec.from_effective(0.2, 0.2)
    trajs = simulate_ensemble(mp, spec, SdeConfig(t_end=20, init=([0.5, 0.5], [0.5, 0.5]),
                                                   seed=1, thin=100), 20)
    rep = ensemble_regret(mp, trajs, spec)
    assert rep.max_excess <= 0
    assert rep.allowance_x[-1] == pytest.approx(2 * 0.02 * 20)
