import numpy as np
from hypothesis import given, strategies as st
from scipy import stats

from replab.noise import NoiseStream


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 1000), st.integers(1, 7),
       st.integers(0, 500), st.integers(1, 50))
def test_blocks_are_position_independent(seed, traj, width, start, count):
    s = NoiseStream(seed, traj, width)
    full = s.normals(0, start + count)
    assert np.array_equal(s.normals(start, count), full[start:])


def test_streams_differ_and_are_normal():
    a = NoiseStream(1, 0, 4).normals(0, 25_000).ravel()
    b = NoiseStream(1, 1, 4).normals(0, 25_000).ravel()
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02
    assert stats.kstest(a, "norm").pvalue > 1e-3
    assert abs(a.mean()) < 0.02 and abs(a.var() - 1) < 0.03


def test_at_matches_block():
    s = NoiseStream(7, 3, 5)
    assert np.array_equal(s.at(17), s.normals(17, 1)[0])
