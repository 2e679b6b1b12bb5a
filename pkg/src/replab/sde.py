"""Euler-Maruyama integration of stochastic replicator dynamics.

Each player's update has the form ``dX = (diag(X) - X X^T)(A Y dt) + diag(X) R(X) dW``
where the rows of ``diag(X) R(X)`` sum to zero whenever ``X^T R(X) = 0``, so
the closed simplex is preserved. For the diagonal-intensity model
``R_ii = sigma_i (1 - x_i)`` and ``R_ik = -sigma_k x_k``, and the update
collapses to ``x_i <- x_i (1 + w_i - x.w)`` with ``w = A y dt + sigma * xi sqrt(dt)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .game import Game, StrategyProfile, SupportSet, _pair, random_simplex
from .noise import NoiseStream
from .trajectory import IntegrationError, Trajectory

ORTHO_TOL = 1e-10
#: steps per block of pregenerated noise
CHUNK = 1 << 16


class DiffusionError(ValueError):
    pass


@dataclass(frozen=True)
class DiffusionSpec:
    """Noise model: per-strategy intensities, or custom ``R(x)``, ``S(y)``.

    ``R`` and ``S`` (custom kind) map a state vector to the square matrix
    entering ``dX_i = ... + X_i (R(X) dW)_i``.
    """

    kind: str
    sigma: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = None
    R: Optional[Callable[[np.ndarray], np.ndarray]] = None
    S: Optional[Callable[[np.ndarray], np.ndarray]] = None
    screened: bool = field(default=False, compare=False)

    @classmethod
    def diagonal(cls, sigma, eta) -> "DiffusionSpec":
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float)).copy()
        eta = np.atleast_1d(np.asarray(eta, dtype=float)).copy()
        if np.any(sigma < 0) or np.any(eta < 0):
            raise DiffusionError("noise intensities must be non-negative")
        if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(eta))):
            raise DiffusionError("noise intensities must be finite")
        sigma.setflags(write=False)
        eta.setflags(write=False)
        return cls("diagonal", sigma=sigma, eta=eta, screened=True)

    @classmethod
    def uniform(cls, sigma: float, eta: float, n: int, m: int) -> "DiffusionSpec":
        return cls.diagonal(np.full(n, float(sigma)), np.full(m, float(eta)))

    @classmethod
    def from_effective(cls, sigma: float, eta: float, n: int = 2, m: int = 2) -> "DiffusionSpec":
        """Diagonal model whose two-strategy sides have single-equation intensity ``sigma``/``eta``.

        A side with two strategies reduces to one equation driven by
        ``sqrt(s_1^2 + s_2^2) x_1 x_2 dW``; equal per-strategy intensities
        ``s / sqrt(2)`` make that factor equal to ``s``. Sides with more
        strategies keep ``s`` per strategy.
        """
        def side(s, k):
            return np.full(k, float(s) / math.sqrt(2.0) if k == 2 else float(s))
        return cls.diagonal(side(sigma, n), side(eta, m))

    @classmethod
    def custom(cls, R, S) -> "DiffusionSpec":
        return cls("custom", R=R, S=S)

    @property
    def is_diagonal(self) -> bool:
        return self.kind == "diagonal"

    def check_dims(self, n: int, m: int) -> None:
        if self.is_diagonal and (self.sigma.size != n or self.eta.size != m):
            raise DiffusionError(
                f"noise sizes ({self.sigma.size}, {self.eta.size}) do not match game {n}x{m}"
            )

    def R_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_diagonal:
            return _diag_R(self.sigma, x)
        out = np.asarray(self.R(x), dtype=float)
        if not np.all(np.isfinite(out)):
            raise DiffusionError(f"custom R returned non-finite entries at {x}")
        return out

    def S_matrix(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.is_diagonal:
            return _diag_R(self.eta, y)
        out = np.asarray(self.S(y), dtype=float)
        if not np.all(np.isfinite(out)):
            raise DiffusionError(f"custom S returned non-finite entries at {y}")
        return out

    def to_dict(self) -> dict:
        if self.is_diagonal:
            return {"kind": "diagonal", "sigma": self.sigma.tolist(), "eta": self.eta.tolist()}
        return {"kind": "custom"}


def _diag_R(s: np.ndarray, x: np.ndarray) -> np.ndarray:
    R = -np.broadcast_to(s * x, (x.size, x.size)).copy()
    R[np.diag_indices(x.size)] = s * (1.0 - x)
    return R


def diffusion_row_matrix(spec: DiffusionSpec, x) -> np.ndarray:
    """``G(x) = diag(x) R(x)``: column ``k`` multiplies ``dW_k``."""
    x = np.asarray(x, dtype=float)
    return x[:, None] * spec.R_matrix(x)


def diffusion_col_matrix(spec: DiffusionSpec, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return y[:, None] * spec.S_matrix(y)


def check_orthogonality(spec: DiffusionSpec, x, side: str = "x") -> float:
    """``max_k |sum_i x_i R_ik(x)|``; zero for noise that keeps the simplex invariant."""
    x = np.asarray(x, dtype=float)
    M = spec.R_matrix(x) if side == "x" else spec.S_matrix(x)
    return float(np.max(np.abs(x @ M)))


def screen_custom(spec: DiffusionSpec, n: int, m: int, samples: int = 1000,
                  seed: int = 0) -> DiffusionSpec:
    """Check orthogonality on random states; returns the spec marked as screened."""
    if spec.is_diagonal:
        return spec
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in random_simplex(rng, n, samples):
        worst = max(worst, check_orthogonality(spec, x, "x"))
    for y in random_simplex(rng, m, samples):
        worst = max(worst, check_orthogonality(spec, y, "y"))
    if worst > ORTHO_TOL:
        raise DiffusionError(
            f"custom diffusion violates x^T R(x) = 0 (max violation {worst:.3g}); "
            "simulation refused"
        )
    return DiffusionSpec("custom", R=spec.R, S=spec.S, screened=True)


def _drift_noise_update(x, drift_u, noise_u):
    w = drift_u + noise_u
    return x + x * (w - x @ w)


def em_increment(g: Game, spec: DiffusionSpec, x, y, dt: float, xi, zeta):
    """Pre-projection Euler-Maruyama update; ``xi``, ``zeta`` are unit normals."""
    x, y = _pair(g, x, y)
    sq = math.sqrt(dt)
    xi = np.asarray(xi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    u = g.A @ y
    v = g.B @ x
    if spec.is_diagonal:
        x_new = _drift_noise_update(x, u * dt, spec.sigma * xi * sq)
        y_new = _drift_noise_update(y, v * dt, spec.eta * zeta * sq)
    else:
        x_new = x + x * (u - x @ u) * dt + diffusion_row_matrix(spec, x) @ xi * sq
        y_new = y + y * (v - y @ v) * dt + diffusion_col_matrix(spec, y) @ zeta * sq
    return x_new, y_new


def project(z: np.ndarray, prev: np.ndarray, clamp_eps: float = 0.0):
    """Floor positive-support components at ``clamp_eps`` and renormalize.

    Components that were exactly zero stay zero, so boundary faces remain
    invariant. Returns ``(z, clamped)``.
    """
    z = z.copy()
    low = (z < clamp_eps) & (prev > 0)
    clamped = bool(np.any(low))
    z[low] = clamp_eps
    z[prev == 0] = 0.0
    return z / z.sum(), clamped


def em_step(g: Game, spec: DiffusionSpec, s, dt: float, noise, clamp_eps: float = 0.0):
    """One Euler-Maruyama step followed by clamp-and-renormalize.

    Returns the new :class:`StrategyProfile`.
    """
    x, y = (s.x.w, s.y.w) if isinstance(s, StrategyProfile) else s
    xi, zeta = noise
    xn, yn = em_increment(g, spec, x, y, dt, xi, zeta)
    if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(yn))):
        raise IntegrationError("non-finite state in Euler-Maruyama step",
                               state=(np.array(x), np.array(y)))
    xn, _ = project(xn, np.asarray(x), clamp_eps)
    yn, _ = project(yn, np.asarray(y), clamp_eps)
    return StrategyProfile(xn, yn)


@njit(cache=True)
def _em_side(z, w, red_scale, reduce2):
    # z <- z + z (w - z.w), in place; returns 1 on non-finite result
    k = z.size
    if reduce2 and k == 2:
        d = z[0] * z[1] * (w[0] - w[1] + red_scale)
        z[0] = z[0] + d
        z[1] = z[1] - d
    else:
        zw = 0.0
        for i in range(k):
            zw += z[i] * w[i]
        for i in range(k):
            z[i] = z[i] + z[i] * (w[i] - zw)
    for i in range(k):
        if not np.isfinite(z[i]):
            return 1
    return 0


@njit(cache=True)
def _em_project(z, prev_pos, clamp_eps):
    clamped = 0
    s = 0.0
    for i in range(z.size):
        if not prev_pos[i]:
            z[i] = 0.0
        elif z[i] < clamp_eps:
            z[i] = clamp_eps
            clamped = 1
        s += z[i]
    for i in range(z.size):
        z[i] /= s
    return clamped


@njit(cache=True)
def _em_diag_chunk(A, sig, eta, x, y, dt, step0, nsteps, thin, total, zx, zy,
                   clamp_eps, reduce2, out_x, out_y, rec):
    """Advance ``nsteps`` steps in place; returns (rec, clamps, bad_step)."""
    n, m = A.shape
    sq = math.sqrt(dt)
    wx = np.empty(n)
    wy = np.empty(m)
    xpos = np.empty(n, dtype=np.bool_)
    ypos = np.empty(m, dtype=np.bool_)
    sig_red = math.sqrt(np.sum(sig * sig))
    eta_red = math.sqrt(np.sum(eta * eta))
    clamps = 0
    for s in range(nsteps):
        for i in range(n):
            ui = 0.0
            for j in range(m):
                ui += A[i, j] * y[j]
            wx[i] = ui * dt
            xpos[i] = x[i] > 0.0
        for j in range(m):
            vj = 0.0
            for i in range(n):
                vj -= A[i, j] * x[i]
            wy[j] = vj * dt
            ypos[j] = y[j] > 0.0
        if reduce2 and n == 2:
            rx = sig_red * zx[s, 0] * sq
        else:
            rx = 0.0
            for i in range(n):
                wx[i] += sig[i] * zx[s, i] * sq
        if reduce2 and m == 2:
            ry = eta_red * zy[s, 0] * sq
        else:
            ry = 0.0
            for j in range(m):
                wy[j] += eta[j] * zy[s, j] * sq
        if _em_side(x, wx, rx, reduce2) or _em_side(y, wy, ry, reduce2):
            return rec, clamps, step0 + s + 1
        clamps += _em_project(x, xpos, clamp_eps)
        clamps += _em_project(y, ypos, clamp_eps)
        step = step0 + s + 1
        if step % thin == 0 or step == total:
            out_x[rec] = x
            out_y[rec] = y
            rec += 1
    return rec, clamps, 0


@dataclass(frozen=True)
class SdeConfig:
    t_end: float
    init: StrategyProfile
    seed: int = 0
    dt: float = 1e-3
    thin: int = 1
    burn_in: Optional[float] = None
    clamp_eps: float = 0.0
    replica: int = 0
    reduce_two_strategy: bool = False

    def __post_init__(self):
        if not isinstance(self.init, StrategyProfile):
            object.__setattr__(self, "init", StrategyProfile(*self.init))
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt exceeds t_end")
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")
        if self.clamp_eps < 0:
            raise ValueError("clamp_eps must be non-negative")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 0.1 * self.t_end)
        if not 0 <= self.burn_in < self.t_end:
            raise ValueError("burn_in must lie in [0, t_end)")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


def _record_count(nsteps: int, thin: int) -> int:
    return nsteps // thin + 1 + (1 if nsteps % thin else 0)


def _record_times(nsteps: int, thin: int, dt: float) -> np.ndarray:
    steps = list(range(0, nsteps + 1, thin))
    if steps[-1] != nsteps:
        steps.append(nsteps)
    return np.array(steps, dtype=float) * dt


def simulate_sde(g: Game, spec: DiffusionSpec, cfg: SdeConfig) -> Trajectory:
    """Seeded Euler-Maruyama path; identical inputs give a bit-identical path."""
    cfg.init.check(g)
    spec.check_dims(g.n, g.m)
    if not spec.is_diagonal:
        if not spec.screened:
            raise DiffusionError("custom diffusion must pass screen_custom before simulation")
        return _simulate_python(g, spec, cfg)
    nsteps = cfg.nsteps
    stream = NoiseStream(cfg.seed, cfg.replica, g.n + g.m)
    nrec = _record_count(nsteps, cfg.thin)
    out_x = np.empty((nrec, g.n))
    out_y = np.empty((nrec, g.m))
    x = cfg.init.x.w.copy()
    y = cfg.init.y.w.copy()
    out_x[0], out_y[0] = x, y
    rec, clamps = 1, 0
    A = np.ascontiguousarray(g.A)
    for start in range(0, nsteps, CHUNK):
        k = min(CHUNK, nsteps - start)
        z = stream.normals(start, k)
        rec, c, bad = _em_diag_chunk(
            A, spec.sigma, spec.eta, x, y, cfg.dt, start, k, cfg.thin, nsteps,
            np.ascontiguousarray(z[:, :g.n]), np.ascontiguousarray(z[:, g.n:]),
            cfg.clamp_eps, cfg.reduce_two_strategy, out_x, out_y, rec)
        clamps += c
        if bad:
            raise IntegrationError(f"non-finite state at step {bad}", step=bad,
                                   state=(x.copy(), y.copy()))
    return Trajectory(_record_times(nsteps, cfg.thin, cfg.dt), out_x, out_y,
                      _meta(spec, cfg, nsteps, clamps))


def _meta(spec, cfg, nsteps, clamps):
    return {"integrator": "euler_maruyama", "dt": cfg.dt, "t_end": cfg.t_end,
            "thin": cfg.thin, "seed": int(cfg.seed), "replica": cfg.replica,
            "burn_in": cfg.burn_in, "clamp_eps": cfg.clamp_eps,
            "reduce_two_strategy": cfg.reduce_two_strategy, "steps": nsteps,
            "clamp_events": int(clamps), "noise": spec.to_dict()}


def _simulate_python(g, spec, cfg):
    nsteps = cfg.nsteps
    stream = NoiseStream(cfg.seed, cfg.replica, g.n + g.m)
    x, y = cfg.init.x.w.copy(), cfg.init.y.w.copy()
    xs, ys = [x.copy()], [y.copy()]
    clamps = 0
    for start in range(0, nsteps, CHUNK):
        z = stream.normals(start, min(CHUNK, nsteps - start))
        for s, zs in enumerate(z, start=start + 1):
            xn, yn = em_increment(g, spec, x, y, cfg.dt, zs[:g.n], zs[g.n:])
            if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(yn))):
                raise IntegrationError(f"non-finite state at step {s}", step=s,
                                       state=(x.copy(), y.copy()))
            xn, cx = project(xn, x, cfg.clamp_eps)
            yn, cy = project(yn, y, cfg.clamp_eps)
            clamps += cx + cy
            x, y = xn, yn
            if s % cfg.thin == 0 or s == nsteps:
                xs.append(x.copy())
                ys.append(y.copy())
    return Trajectory(_record_times(nsteps, cfg.thin, cfg.dt), np.array(xs), np.array(ys),
                      _meta(spec, cfg, nsteps, clamps))


def worker_count() -> int:
    """Thread cap from ``REPLAB_THREADS`` (default: CPU count)."""
    env = os.environ.get("REPLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def simulate_ensemble(g: Game, spec: DiffusionSpec, cfg: SdeConfig,
                      replicas: int) -> list[Trajectory]:
    """Independent replicas; replica ``r`` uses noise stream ``(cfg.seed, r)``."""
    from dataclasses import replace

    cfgs = [replace(cfg, replica=r) for r in range(replicas)]
    workers = min(worker_count(), replicas)
    if workers <= 1:
        return [simulate_sde(g, spec, c) for c in cfgs]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda c: simulate_sde(g, spec, c), cfgs))


def simulate_face(g: Game, spec: DiffusionSpec, cfg: SdeConfig,
                  face: tuple[SupportSet | tuple, SupportSet | tuple]) -> Trajectory:
    """Simulate with the initial state on a boundary face.

    ``face`` lists the (0-based) row and column strategies allowed to be
    positive. Components outside the face start at zero and stay exactly zero.
    """
    rows, cols = (tuple(f) for f in face)
    x0, y0 = cfg.init.x.w, cfg.init.y.w
    out_x = np.setdiff1d(np.arange(g.n), rows)
    out_y = np.setdiff1d(np.arange(g.m), cols)
    if np.any(x0[out_x] != 0) or np.any(y0[out_y] != 0):
        raise DiffusionError(f"initial state is not supported on face {rows}, {cols}")
    traj = simulate_sde(g, spec, cfg)
    traj.meta["face"] = [list(map(int, rows)), list(map(int, cols))]
    return traj


# -- weak-consistency probe for the generator --------------------------------

def em_increment_batch(g: Game, spec: DiffusionSpec, x, y, dt, xi, zeta):
    """Vectorized :func:`em_increment` over rows of ``xi`` and ``zeta`` (diagonal noise)."""
    if not spec.is_diagonal:
        raise DiffusionError("batched increments need the diagonal model")
    sq = math.sqrt(dt)
    u = g.A @ y
    v = g.B @ x
    wx = u * dt + spec.sigma * xi * sq
    wy = v * dt + spec.eta * zeta * sq
    X = x + x * (wx - (wx @ x)[:, None])
    Y = y + y * (wy - (wy @ y)[:, None])
    return X, Y


def mc_generator_estimate(g: Game, spec: DiffusionSpec, weights, s, dt: float = 1e-4,
                          replicas: int = 200_000, seed: int = 0):
    """Monte Carlo estimate of ``(E[W(Z_dt)] - W(z)) / dt`` for a log barrier ``W``.

    ``W(x, y) = -sum a_i ln x_i - sum b_j ln y_j`` with ``weights = (a, b)``.
    Antithetic pairs ``(+xi, -xi)`` are averaged before the standard error is
    formed. Returns ``(mean, standard_error)``.
    """
    a, b = (np.asarray(w, dtype=float) for w in weights)
    x, y = _pair(g, *s) if not isinstance(s, StrategyProfile) else (s.x.w, s.y.w)
    half = replicas // 2
    z = NoiseStream(seed, 0, g.n + g.m).normals(0, half)
    xi, zeta = z[:, :g.n], z[:, g.n:]

    def W(X, Y):
        return -(np.log(X) @ a) - (np.log(Y) @ b)

    w0 = -(np.log(x) @ a) - (np.log(y) @ b)
    Xp, Yp = em_increment_batch(g, spec, x, y, dt, xi, zeta)
    Xm, Ym = em_increment_batch(g, spec, x, y, dt, -xi, -zeta)
    pair = 0.5 * (W(Xp, Yp) + W(Xm, Ym)) - w0
    est = pair / dt
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(half))
