"""Deterministic replicator flow and its cross-entropy Lyapunov quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .game import Game, StrategyProfile, _pair
from .trajectory import IntegrationError, Trajectory

#: components on the reference support below this count as "on the boundary"
LOG_FLOOR = 1e-300


class DivergedToBoundary(ArithmeticError):
    """Cross entropy is infinite: a referenced coordinate has hit zero."""


def _xy(s, y=None):
    if y is not None:
        return np.asarray(s, dtype=float), np.asarray(y, dtype=float)
    if isinstance(s, StrategyProfile):
        return s.x.w, s.y.w
    x, y = s
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def replicator_field(g: Game, s, y=None) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side ``x_i((Ay)_i - x.Ay)``, ``y_j((Bx)_j - y.Bx)``."""
    x, y = _pair(g, *_xy(s, y))
    u = g.A @ y
    v = g.B @ x
    return x * (u - x @ u), y * (v - y @ v)


@njit(cache=True)
def _field(A, x, y, dx, dy):
    n, m = A.shape
    xu = 0.0
    for i in range(n):
        ui = 0.0
        for j in range(m):
            ui += A[i, j] * y[j]
        dx[i] = ui
        xu += x[i] * ui
    for i in range(n):
        dx[i] = x[i] * (dx[i] - xu)
    yv = 0.0
    for j in range(m):
        vj = 0.0
        for i in range(n):
            vj -= A[i, j] * x[i]
        dy[j] = vj
        yv += y[j] * vj
    for j in range(m):
        dy[j] = y[j] * (dy[j] - yv)


@njit(cache=True)
def _project(z):
    """Clamp negatives to zero and renormalize; returns 1 if a clamp occurred."""
    clamped = 0
    s = 0.0
    for k in range(z.size):
        if z[k] < 0.0:
            z[k] = 0.0
            clamped = 1
        s += z[k]
    for k in range(z.size):
        z[k] /= s
    return clamped


@njit(cache=True)
def _rk4_kernel(A, x0, y0, dt, nsteps, thin, renorm, out_x, out_y):
    n, m = A.shape
    x = x0.copy()
    y = y0.copy()
    k1x = np.empty(n); k2x = np.empty(n); k3x = np.empty(n); k4x = np.empty(n)
    k1y = np.empty(m); k2y = np.empty(m); k3y = np.empty(m); k4y = np.empty(m)
    tx = np.empty(n); ty = np.empty(m)
    out_x[0] = x
    out_y[0] = y
    rec = 1
    clamps = 0
    for step in range(1, nsteps + 1):
        _field(A, x, y, k1x, k1y)
        for i in range(n):
            tx[i] = x[i] + 0.5 * dt * k1x[i]
        for j in range(m):
            ty[j] = y[j] + 0.5 * dt * k1y[j]
        _field(A, tx, ty, k2x, k2y)
        for i in range(n):
            tx[i] = x[i] + 0.5 * dt * k2x[i]
        for j in range(m):
            ty[j] = y[j] + 0.5 * dt * k2y[j]
        _field(A, tx, ty, k3x, k3y)
        for i in range(n):
            tx[i] = x[i] + dt * k3x[i]
        for j in range(m):
            ty[j] = y[j] + dt * k3y[j]
        _field(A, tx, ty, k4x, k4y)
        for i in range(n):
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])
        for j in range(m):
            y[j] += dt / 6.0 * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j])
        for i in range(n):
            if not np.isfinite(x[i]):
                return -step, clamps
        for j in range(m):
            if not np.isfinite(y[j]):
                return -step, clamps
        if renorm:
            clamps += _project(x)
            clamps += _project(y)
        if step % thin == 0 or step == nsteps:
            out_x[rec] = x
            out_y[rec] = y
            rec += 1
    return rec, clamps


@dataclass(frozen=True)
class OdeConfig:
    t_end: float
    init: StrategyProfile
    dt: float = 1e-3
    thin: int = 10
    renorm: bool = True
    interior: bool = False

    def __post_init__(self):
        if not isinstance(self.init, StrategyProfile):
            object.__setattr__(self, "init", StrategyProfile(*self.init))
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt exceeds t_end")
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")
        if self.interior and (self.init.x.w.min() < 1e-12 or self.init.y.w.min() < 1e-12):
            raise ValueError("run tagged interior but the initial profile touches the boundary")


def _record_times(nsteps: int, thin: int, dt: float) -> np.ndarray:
    steps = list(range(0, nsteps + 1, thin))
    if steps[-1] != nsteps:
        steps.append(nsteps)
    return np.array(steps, dtype=float) * dt


def integrate_ode(g: Game, cfg: OdeConfig) -> Trajectory:
    """Classical fourth-order Runge-Kutta integration of the replicator flow.

    States are clamped at zero and renormalized after each step when
    ``cfg.renorm`` is set; the number of clamping events goes to ``meta``.
    """
    cfg.init.check(g)
    nsteps = int(round(cfg.t_end / cfg.dt))
    times = _record_times(nsteps, cfg.thin, cfg.dt)
    out_x = np.empty((len(times), g.n))
    out_y = np.empty((len(times), g.m))
    rec, clamps = _rk4_kernel(np.ascontiguousarray(g.A), cfg.init.x.w.copy(),
                              cfg.init.y.w.copy(), cfg.dt, nsteps, cfg.thin,
                              cfg.renorm, out_x, out_y)
    if rec < 0:
        raise IntegrationError(f"non-finite state at step {-rec}", step=-rec)
    meta = {"integrator": "rk4", "dt": cfg.dt, "t_end": cfg.t_end, "thin": cfg.thin,
            "renorm": cfg.renorm, "clamp_events": int(clamps), "steps": nsteps}
    return Trajectory(times, out_x, out_y, meta)


def euler_ode(g: Game, init: StrategyProfile, dt: float, nsteps: int) -> Trajectory:
    """Explicit Euler steps, recorded every step (reference for the zero-noise SDE)."""
    x, y = init.x.w.copy(), init.y.w.copy()
    xs, ys = [x.copy()], [y.copy()]
    for _ in range(nsteps):
        dx, dy = replicator_field(g, x, y)
        x, y = x + dt * dx, y + dt * dy
        xs.append(x.copy())
        ys.append(y.copy())
    return Trajectory(np.arange(nsteps + 1) * dt, np.array(xs), np.array(ys),
                      {"integrator": "euler", "dt": dt})


def _ref_weights(ref):
    p, q = _xy(ref)
    return p, q


def _log_barrier(w, z, name):
    on = w > 0
    if np.any(z[on] < LOG_FLOOR):
        k = int(np.flatnonzero(on & (z < LOG_FLOOR))[0])
        raise DivergedToBoundary(f"{name}_{k + 1} = {z[k]!r} on the reference support")
    return -float(np.sum(w[on] * np.log(z[on])))


def cross_entropy(ref, s) -> float:
    """``-sum p_i ln x_i - sum q_j ln y_j``; infinite on the boundary of ref's support."""
    p, q = _ref_weights(ref)
    x, y = _xy(s)
    return _log_barrier(p, x, "x") + _log_barrier(q, y, "y")


def entropy(ref) -> float:
    p, q = _ref_weights(ref)
    return cross_entropy((p, q), (p, q))


def kl_sum(ref, s) -> float:
    """``KL(p||x) + KL(q||y)``."""
    return cross_entropy(ref, s) - entropy(ref)


def cross_entropy_path(ref, traj: Trajectory) -> np.ndarray:
    """Cross entropy at every recorded state of ``traj``."""
    p, q = _ref_weights(ref)
    on_p, on_q = p > 0, q > 0
    xs, ys = traj.x[:, on_p], traj.y[:, on_q]
    if np.any(xs < LOG_FLOOR) or np.any(ys < LOG_FLOOR):
        raise DivergedToBoundary("trajectory reaches the boundary of the reference support")
    return -(np.log(xs) @ p[on_p]) - (np.log(ys) @ q[on_q])


def lyapunov_time_derivative(g: Game, ref, s) -> float:
    """Time derivative of the cross entropy along the flow at ``s``.

    Equals ``-(sum_i p_i (Ay)_i + sum_j q_j (Bx)_j)``; the ``x.Ay`` terms
    cancel because the game is zero-sum.
    """
    p, q = _ref_weights(ref)
    x, y = _pair(g, *_xy(s))
    return -float(p @ (g.A @ y) + q @ (g.B @ x))
