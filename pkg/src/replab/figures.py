"""Fixed experiment recipes for the four reference figures.

Each recipe writes its data files into an output directory and returns a
JSON-serializable summary. ``scale`` shrinks the time horizons for quick runs.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .equilibrium import maximal_support_equilibrium
from .game import Game, StrategyProfile, random_simplex
from .measures import corner_mass, occupation_histogram
from .ode import OdeConfig, cross_entropy_path, integrate_ode
from .sde import DiffusionSpec, SdeConfig, simulate_sde
from .trajectory import atomic_write_text

FIGURES = ("1a", "1b", "2a", "2b")


def bundled_game(name: str) -> Game:
    """``"matching_pennies"`` or ``"mp_3x2"``."""
    ref = resources.files("replab") / "data" / f"{name}.json"
    return Game.from_dict(json.loads(ref.read_text(encoding="utf-8")))


def bundled_games() -> list[Game]:
    return [bundled_game("matching_pennies"), bundled_game("mp_3x2")]


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _fig_1a(out: Path, seed: int, scale: float) -> dict:
    g = bundled_game("matching_pennies")
    eq = maximal_support_equilibrium(g)
    orbits = []
    for k, x1 in enumerate((0.55, 0.65, 0.75, 0.85, 0.95)):
        cfg = OdeConfig(t_end=100.0 * scale, init=StrategyProfile([x1, 1 - x1], [0.5, 0.5]),
                        dt=1e-3, thin=10)
        tr = integrate_ode(g, cfg)
        V = cross_entropy_path(eq.eq, tr)
        tr.to_csv(out / f"orbit_{k}.csv")
        orbits.append({"file": f"orbit_{k}.csv", "x1_0": x1, "V0": float(V[0]),
                       "max_V_drift": float(np.max(np.abs(V - V[0])))})
    return {"figure": "1a", "game": g.name, "orbits": orbits}


def _fig_1b(out: Path, seed: int, scale: float) -> dict:
    g = bundled_game("mp_3x2")
    eq = maximal_support_equilibrium(g)
    rng = np.random.default_rng(seed)
    xs = random_simplex(rng, 3, 5)
    ys = random_simplex(rng, 2, 5)
    orbits = []
    for k, (x0, y0) in enumerate(zip(xs, ys)):
        tr = integrate_ode(g, OdeConfig(t_end=100.0 * scale, init=StrategyProfile(x0, y0),
                                        dt=1e-3, thin=10))
        V = cross_entropy_path(eq.eq, tr)
        tr.to_csv(out / f"orbit_{k}.csv")
        orbits.append({"file": f"orbit_{k}.csv", "x3_end": float(tr.x[-1, 2]),
                       "max_V_increase": float(np.max(np.diff(V), initial=0.0))})
    return {"figure": "1b", "game": g.name, "orbits": orbits}


def _sde_figure(name, g, spec, init, out, seed, scale, axes, bins):
    t_end = 1e4 * scale
    cfg = SdeConfig(t_end=t_end, init=init, seed=seed, dt=1e-3, thin=100)
    tr = simulate_sde(g, spec, cfg)
    tr.to_csv(out / "traj.csv")
    hist = occupation_histogram(tr, axes, bins, cfg.burn_in)
    write_json(out / "hist.json", hist.to_dict())
    cm = corner_mass(tr, 0.1, cfg.burn_in)
    return {"figure": name, "game": g.name, "seed": seed, "t_end": t_end,
            "burn_in": cfg.burn_in, "noise": spec.to_dict(),
            "clamp_events": tr.meta["clamp_events"], "corner_mass": cm.to_dict(),
            "files": ["traj.csv", "hist.json"]}


def _fig_2a(out: Path, seed: int, scale: float) -> dict:
    g = bundled_game("matching_pennies")
    return _sde_figure("2a", g, DiffusionSpec.from_effective(0.2, 0.2),
                       StrategyProfile([0.6, 0.4], [0.6, 0.4]), out, seed, scale,
                       ("x1", "y1"), 60)


def _fig_2b(out: Path, seed: int, scale: float) -> dict:
    g = bundled_game("mp_3x2")
    return _sde_figure("2b", g, DiffusionSpec.uniform(0.2, 0.2, 3, 2),
                       StrategyProfile([1 / 3, 1 / 3, 1 / 3], [0.5, 0.5]), out, seed, scale,
                       ("x1", "x2", "y1"), 20)


_RECIPES = {"1a": _fig_1a, "1b": _fig_1b, "2a": _fig_2a, "2b": _fig_2b}


def reproduce_figure(name: str, out_dir, seed: int = 42, scale: float = 1.0) -> dict:
    if name not in _RECIPES:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = _RECIPES[name](out, seed, scale)
    write_json(out / "summary.json", summary)
    return summary
