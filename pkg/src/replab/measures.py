"""Occupation statistics, corner masses, time averages and regret along paths.

Time-weighted quantities use trapezoidal weights on the recorded samples,
so ``corner_mass`` and ``time_average`` of a corner indicator agree exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .game import Game
from .sde import DiffusionSpec
from .trajectory import Trajectory

REGRET_C = 2.0
QUADRATURE_SLACK = 1e-3
MAX_REGRET_SPACING = 0.1


class MeasureError(ValueError):
    pass


def _window(traj: Trajectory, burn_in: float) -> Trajectory:
    if burn_in < 0:
        raise MeasureError("burn_in must be non-negative")
    w = traj.window(burn_in)
    if len(w) == 0:
        raise MeasureError(f"no samples after burn_in={burn_in} (path ends at {traj.t_end})")
    return w


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    """Weights ``w`` with ``sum(w f) = trapezoid(f, t) / (t[-1] - t[0])``."""
    if len(t) < 2 or t[-1] <= t[0]:
        raise MeasureError("time window needs at least two distinct samples")
    dt = np.diff(t)
    w = np.zeros(len(t))
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    # normalize by the sum, not t[-1] - t[0], so fractions add to one at round-off
    return w / w.sum()


# -- histograms --------------------------------------------------------------------

@dataclass
class OccupationHistogram:
    axes: list[str]
    bins: int
    counts: np.ndarray
    total_samples: int
    burn_in_applied: float

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total_samples

    def merge(self, other: "OccupationHistogram") -> "OccupationHistogram":
        if self.axes != other.axes or self.bins != other.bins:
            raise MeasureError("histograms with different axes or bins cannot be merged")
        return OccupationHistogram(self.axes, self.bins, self.counts + other.counts,
                                   self.total_samples + other.total_samples,
                                   max(self.burn_in_applied, other.burn_in_applied))

    def to_dict(self) -> dict:
        return {"axes": list(self.axes), "bins": self.bins,
                "edges": [self.edges.tolist()] * len(self.axes),
                "counts": self.counts.tolist(), "total_samples": self.total_samples,
                "burn_in": self.burn_in_applied}

    @classmethod
    def from_dict(cls, d: dict) -> "OccupationHistogram":
        counts = np.asarray(d["counts"], dtype=np.int64)
        return cls(list(d["axes"]), int(d["bins"]), counts, int(d["total_samples"]),
                   float(d["burn_in"]))


def occupation_histogram(traj: Trajectory, axes: Sequence[str] = ("x1", "y1"),
                         bins: int = 60, burn_in: float = 0.0) -> OccupationHistogram:
    """Counts of post-burn-in samples on a uniform grid over ``[0, 1]`` per axis."""
    if bins < 2:
        raise MeasureError("bins must be at least 2")
    w = _window(traj, burn_in)
    data = np.column_stack([w.coordinate(a) for a in axes])
    edges = [np.linspace(0.0, 1.0, bins + 1)] * len(axes)
    counts, _ = np.histogramdd(data, bins=edges)
    return OccupationHistogram([a.replace("_", "").lower() for a in axes], bins,
                               counts.astype(np.int64), len(w), float(burn_in))


# -- corner masses ----------------------------------------------------------------

def corner_distance(x: np.ndarray, y: np.ndarray):
    """L1 distance to the nearest corner and that corner's indices, per sample."""
    i = np.argmax(x, axis=1)
    j = np.argmax(y, axis=1)
    rows = np.arange(len(x))
    return 2.0 * (1.0 - x[rows, i]) + 2.0 * (1.0 - y[rows, j]), i, j


@dataclass
class CornerMassReport:
    radius: float
    masses: np.ndarray          # (n, m), entry (i, j) for corner (e_i, e_j)
    residual: float
    window: tuple[float, float]
    samples: int

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def to_dict(self) -> dict:
        return {"radius": self.radius, "masses": self.masses.tolist(), "total": self.total,
                "residual": self.residual, "window": list(self.window), "samples": self.samples}


def corner_mass(traj: Trajectory, radius: float = 0.1, burn_in: float = 0.0) -> CornerMassReport:
    """Time fraction spent within L1 distance ``radius`` of each pure profile."""
    if not 0 < radius < 0.5:
        raise MeasureError("radius must lie in (0, 0.5)")
    w = _window(traj, burn_in)
    wt = trapezoid_weights(w.times)
    d, i, j = corner_distance(w.x, w.y)
    near = d <= radius
    masses = np.zeros((traj.n, traj.m))
    np.add.at(masses, (i[near], j[near]), wt[near])
    residual = float(wt[~near].sum())
    return CornerMassReport(float(radius), masses, residual,
                            (float(w.times[0]), float(w.times[-1])), len(w))


def time_average(traj: Trajectory, f: Callable, burn_in: float = 0.0) -> float:
    """Trapezoidal time average of ``f(x, y)`` over the post-burn-in window.

    ``f`` receives the ``(N, n)`` and ``(N, m)`` state arrays and returns ``N`` values.
    """
    w = _window(traj, burn_in)
    vals = np.asarray(f(w.x, w.y), dtype=float)
    if vals.shape != w.times.shape:
        raise MeasureError(f"observable returned shape {vals.shape}, expected {w.times.shape}")
    return float(np.sum(trapezoid_weights(w.times) * vals))


def corner_indicator(i: int, j: int, radius: float) -> Callable:
    def f(x, y):
        d, ci, cj = corner_distance(x, y)
        return ((d <= radius) & (ci == i) & (cj == j)).astype(float)
    return f


def interior_ball_mass(traj: Trajectory, center, radius: float, burn_in: float = 0.0) -> float:
    """Time fraction within L1 distance ``radius`` of an arbitrary ``center`` profile."""
    cx, cy = (np.asarray(c, dtype=float) for c in center)
    w = _window(traj, burn_in)
    d = np.abs(w.x - cx).sum(axis=1) + np.abs(w.y - cy).sum(axis=1)
    return float(np.sum(trapezoid_weights(w.times) * (d <= radius)))


def max_interior_ball_mass(traj: Trajectory, radius: float, burn_in: float = 0.0,
                           grid: int = 41) -> tuple[float, tuple]:
    """Largest occupation of an interior L1 ball with the volume of all corner balls.

    For two strategies per player the state is ``(x_1, y_1)`` and an L1 ball
    of radius ``r`` in the full coordinates is the diamond
    ``|dx_1| + |dy_1| <= r / 2``, of area ``r^2 / 2``; the four corner balls
    together have the same area. Centers range over a grid that keeps the
    diamond inside the open square.
    """
    if traj.n != 2 or traj.m != 2:
        raise MeasureError("equal-volume comparison is implemented for 2x2 games")
    h = radius / 2
    centers = np.linspace(h + 1e-9, 1 - h - 1e-9, grid)
    w = _window(traj, burn_in)
    wt = trapezoid_weights(w.times)
    x1, y1 = w.x[:, 0], w.y[:, 0]
    best, where = -1.0, None
    for a, b in itertools.product(centers, centers):
        m = float(np.sum(wt * ((np.abs(x1 - a) + np.abs(y1 - b)) <= h)))
        if m > best:
            best, where = m, (float(a), float(b))
    return best, where


def face_corner_mass(report: CornerMassReport, rows: Sequence[int]) -> float:
    """Total corner mass over corners whose row strategy lies in ``rows``."""
    return float(report.masses[list(rows), :].sum())


# -- regret --------------------------------------------------------------------------

@dataclass
class RegretReport:
    times: np.ndarray
    regret_x: np.ndarray        # (N, n)
    regret_y: np.ndarray        # (N, m)
    bound_x: np.ndarray         # -ln x_i(0)
    bound_y: np.ndarray
    allowance_x: np.ndarray     # C max sigma^2 t
    allowance_y: np.ndarray
    exceed_events: int
    slack: float = QUADRATURE_SLACK

    @property
    def max_excess(self) -> float:
        ex = self.regret_x - (self.bound_x + self.allowance_x[:, None])
        ey = self.regret_y - (self.bound_y + self.allowance_y[:, None])
        return float(max(ex.max(), ey.max()))

    def to_dict(self) -> dict:
        return {"t_end": float(self.times[-1]),
                "final_regret_x": self.regret_x[-1].tolist(),
                "final_regret_y": self.regret_y[-1].tolist(),
                "max_regret_x": self.regret_x.max(axis=0).tolist(),
                "max_regret_y": self.regret_y.max(axis=0).tolist(),
                "bound_x": self.bound_x.tolist(), "bound_y": self.bound_y.tolist(),
                "allowance_x_end": float(self.allowance_x[-1]),
                "allowance_y_end": float(self.allowance_y[-1]),
                "max_excess": self.max_excess, "exceed_events": self.exceed_events}


def regret_paths(g: Game, traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative regret ``int u_i - int x.u`` per strategy, by the trapezoid rule."""
    if len(traj) < 2:
        raise MeasureError("regret needs at least two recorded points")
    spacing = float(np.max(np.diff(traj.times)))
    if spacing > MAX_REGRET_SPACING + 1e-12:
        raise MeasureError(f"sample spacing {spacing} exceeds {MAX_REGRET_SPACING}; "
                           "record more densely (smaller thin)")
    u = traj.y @ g.A.T            # (N, n)
    v = traj.x @ g.B.T            # (N, m)
    gx = u - np.sum(traj.x * u, axis=1, keepdims=True)
    gy = v - np.sum(traj.y * v, axis=1, keepdims=True)
    rx = cumulative_trapezoid(gx, traj.times, axis=0, initial=0.0)
    ry = cumulative_trapezoid(gy, traj.times, axis=0, initial=0.0)
    return rx, ry


def _max_sq(v) -> float:
    return float(np.max(np.asarray(v) ** 2)) if v is not None else 0.0


def regret_report(g: Game, traj: Trajectory, spec: Optional[DiffusionSpec] = None,
                  C: float = REGRET_C, slack: float = QUADRATURE_SLACK) -> RegretReport:
    """Regret along one path against ``-ln x_i(0) + C max_k sigma_k^2 t``.

    With ``spec`` omitted (or zero noise) the allowance vanishes and only the
    quadrature slack is granted.
    """
    rx, ry = regret_paths(g, traj)
    t = traj.times - traj.times[0]
    sx = _max_sq(spec.sigma) if spec is not None and spec.is_diagonal else 0.0
    sy = _max_sq(spec.eta) if spec is not None and spec.is_diagonal else 0.0
    with np.errstate(divide="ignore"):
        bx = -np.log(traj.x[0])
        by = -np.log(traj.y[0])
    ax, ay = C * sx * t, C * sy * t
    exceed = int(np.sum(rx > bx + ax[:, None] + slack) + np.sum(ry > by + ay[:, None] + slack))
    return RegretReport(traj.times, rx, ry, bx, by, ax, ay, exceed, slack)


@dataclass
class EnsembleRegret:
    times: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    bound_x: np.ndarray
    bound_y: np.ndarray
    allowance_x: np.ndarray
    allowance_y: np.ndarray
    replicas: int

    @property
    def max_excess(self) -> float:
        ex = self.mean_x - (self.bound_x + self.allowance_x[:, None])
        ey = self.mean_y - (self.bound_y + self.allowance_y[:, None])
        return float(max(ex.max(), ey.max()))

    def to_dict(self) -> dict:
        return {"replicas": self.replicas, "t_end": float(self.times[-1]),
                "max_mean_regret_x": self.mean_x.max(axis=0).tolist(),
                "max_mean_regret_y": self.mean_y.max(axis=0).tolist(),
                "max_excess": self.max_excess}


def ensemble_regret(g: Game, trajs: Sequence[Trajectory], spec: DiffusionSpec,
                    C: float = REGRET_C) -> EnsembleRegret:
    """Mean regret over replicas sharing one time grid and initial state."""
    if not trajs:
        raise MeasureError("empty ensemble")
    t0 = trajs[0].times
    sx = sy = 0.0
    acc_x = acc_y = 0.0
    for tr in trajs:
        if not np.array_equal(tr.times, t0):
            raise MeasureError("replicas must share the time grid")
        rx, ry = regret_paths(g, tr)
        acc_x = acc_x + rx
        acc_y = acc_y + ry
    if spec.is_diagonal:
        sx, sy = _max_sq(spec.sigma), _max_sq(spec.eta)
    t = t0 - t0[0]
    with np.errstate(divide="ignore"):
        bx, by = -np.log(trajs[0].x[0]), -np.log(trajs[0].y[0])
    k = len(trajs)
    return EnsembleRegret(t0, acc_x / k, acc_y / k, bx, by, C * sx * t, C * sy * t, k)
