"""Command-line entry point.

Every command prints a one-line JSON summary on success. Failures print a
JSON error object on stderr and exit with 2 (missing file), 3 (unparseable
input) or 4 (invalid parameters).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .equilibrium import maximal_support_equilibrium
from .figures import FIGURES, reproduce_figure, write_json
from .game import Game, StrategyProfile
from .generator import corner_H_exponents
from .measures import corner_mass, occupation_histogram, regret_report
from .ode import OdeConfig, integrate_ode
from .sde import DiffusionSpec, SdeConfig, simulate_ensemble, simulate_sde
from .trajectory import IntegrationError, Trajectory, atomic_write_text

EXIT_NOT_FOUND = 2
EXIT_PARSE = 3
EXIT_PRECONDITION = 4

MODES = ("solve", "simulate-ode", "simulate-sde", "analyze", "classify-corners",
         "occupancy", "corner-mass", "regret", "reproduce-figure")


class ParseError(Exception):
    pass


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    mode: str
    game: Optional[str] = None
    traj: Optional[str] = None
    figure: Optional[str] = None
    dt: Optional[float] = None
    t_end: Optional[float] = None
    seed: int = 0
    sigma: Optional[list] = None
    eta: Optional[list] = None
    effective: bool = False
    init: Optional[str] = None
    thin: Optional[int] = None
    burn_in: Optional[float] = None
    clamp_eps: float = 0.0
    replicas: int = 1
    bins: int = 60
    axes: str = "x1,y1"
    radius: float = 0.1
    scale: float = 1.0
    out: Optional[str] = None
    out_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        needs_game = self.mode in ("solve", "simulate-ode", "simulate-sde", "analyze",
                                   "classify-corners", "regret")
        if needs_game and not self.game:
            raise UsageError(f"{self.mode} needs a game file")
        if self.mode in ("occupancy", "corner-mass", "regret") and not self.traj:
            raise UsageError(f"{self.mode} needs a trajectory file")
        for name in ("dt", "t_end"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.thin is not None and self.thin < 1:
            raise UsageError("--thin must be a positive integer")
        if self.burn_in is not None and self.burn_in < 0:
            raise UsageError("--burn-in must be non-negative")
        if self.replicas < 1:
            raise UsageError("--replicas must be at least 1")
        if self.bins < 2:
            raise UsageError("--bins must be at least 2")
        if not 0 < self.radius < 0.5:
            raise UsageError("--radius must lie in (0, 0.5)")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.mode == "reproduce-figure" and self.figure not in FIGURES:
            raise UsageError(f"figure must be one of {', '.join(FIGURES)}")


# -- input loading -------------------------------------------------------------------

def _require(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return p


def load_game(path) -> Game:
    p = _require(path)
    raw = p.read_bytes()
    try:
        text = raw.decode("utf-8")
        data = json.loads(text)
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not UTF-8 at byte offset {e.start}") from e
    except json.JSONDecodeError as e:
        offset = len(text[:e.pos].encode("utf-8"))
        raise ParseError(f"{path}: invalid JSON at byte offset {offset} "
                         f"(line {e.lineno}, column {e.colno}): {e.msg}") from e
    return Game.from_dict(data)


def load_trajectory(path) -> Trajectory:
    p = _require(path)
    try:
        return Trajectory.from_csv(p)
    except (ValueError, IndexError, csv.Error) as e:
        raise ParseError(f"{path}: {e}") from e


def _floats(text) -> list[float]:
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"cannot read numbers from {text!r}") from e


def _side(vals: list[float], k: int, effective: bool, name: str) -> np.ndarray:
    if not vals:
        return np.zeros(k)
    if len(vals) == 1:
        s = vals[0]
        return np.full(k, s / np.sqrt(2.0) if effective and k == 2 else s)
    if len(vals) != k:
        raise UsageError(f"--{name} has {len(vals)} values for {k} strategies")
    return np.array(vals)


def build_noise(cfg: ExperimentConfig, g: Game) -> DiffusionSpec:
    sig = _side(_floats(cfg.sigma), g.n, cfg.effective, "sigma")
    eta = _side(_floats(cfg.eta), g.m, cfg.effective, "eta")
    return DiffusionSpec.diagonal(sig, eta)


def parse_init(text: Optional[str], g: Game) -> StrategyProfile:
    """``"x1,..,xn;y1,..,ym"``; default is the uniform profile."""
    if not text:
        return StrategyProfile(np.full(g.n, 1 / g.n), np.full(g.m, 1 / g.m))
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError("--init expects 'x1,..,xn;y1,..,ym'")
    prof = StrategyProfile(_floats(parts[0]), _floats(parts[1]))
    prof.check(g)
    return prof


# -- dispatch --------------------------------------------------------------------------

def _solve(cfg):
    g = load_game(cfg.game)
    rep = maximal_support_equilibrium(g)
    out = {"game": g.name, **rep.to_dict()}
    if cfg.out:
        write_json(cfg.out, out)
    return out


def _simulate_ode(cfg):
    g = load_game(cfg.game)
    oc = OdeConfig(t_end=cfg.t_end or 100.0, init=parse_init(cfg.init, g),
                   dt=cfg.dt or 1e-3, thin=cfg.thin or 10)
    tr = integrate_ode(g, oc)
    out = cfg.out or "traj.csv"
    tr.to_csv(out)
    return {"file": str(out), "samples": len(tr), **tr.meta,
            "x_end": tr.x[-1].tolist(), "y_end": tr.y[-1].tolist()}


def _simulate_sde(cfg):
    g = load_game(cfg.game)
    spec = build_noise(cfg, g)
    sc = SdeConfig(t_end=cfg.t_end or 100.0, init=parse_init(cfg.init, g), seed=cfg.seed,
                   dt=cfg.dt or 1e-3, thin=cfg.thin or 1, burn_in=cfg.burn_in,
                   clamp_eps=cfg.clamp_eps)
    out = Path(cfg.out or "traj.csv")
    if cfg.replicas == 1:
        tr = simulate_sde(g, spec, sc)
        tr.to_csv(out)
        return {"file": str(out), "samples": len(tr), **tr.meta,
                "x_end": tr.x[-1].tolist(), "y_end": tr.y[-1].tolist()}
    trajs = simulate_ensemble(g, spec, sc, cfg.replicas)
    files = []
    for r, tr in enumerate(trajs):
        f = out.with_name(f"{out.stem}_r{r:04d}{out.suffix or '.csv'}")
        tr.to_csv(f)
        files.append(f.name)
    summary = {"game": g.name, "replicas": cfg.replicas, "seed": cfg.seed,
               "files": files, "noise": spec.to_dict(),
               "clamp_events": [tr.meta["clamp_events"] for tr in trajs],
               "mean_x_end": np.mean([tr.x[-1] for tr in trajs], axis=0).tolist(),
               "mean_y_end": np.mean([tr.y[-1] for tr in trajs], axis=0).tolist()}
    sfile = out.with_name(f"{out.stem}_summary.json")
    write_json(sfile, summary)
    return {"summary": str(sfile), "replicas": cfg.replicas}


def _analyze(cfg):
    g = load_game(cfg.game)
    spec = build_noise(cfg, g)
    rep = corner_H_exponents(g, spec)
    out = {"game": g.name, "noise": spec.to_dict(), **rep.to_dict()}
    if cfg.out:
        write_json(cfg.out, out)
    return out


def _classify(cfg):
    g = load_game(cfg.game)
    rep = corner_H_exponents(g, build_noise(cfg, g))
    lines = ["i,j,H,Lambda,label"]
    lines += [f"{i},{j},{H!r},{L!r},{lab}" for i, j, H, L, lab in rep.csv_rows()]
    out = cfg.out or "corners.csv"
    atomic_write_text(out, "\n".join(lines) + "\n")
    return {"file": str(out), "lyapunov": rep.primary, "corners": len(rep.corners),
            "labels": sorted({r[4] for r in rep.csv_rows()})}


def _occupancy(cfg):
    tr = load_trajectory(cfg.traj)
    axes = [a for a in cfg.axes.split(",") if a]
    hist = occupation_histogram(tr, axes, cfg.bins, cfg.burn_in or 0.0)
    out = cfg.out or "hist.json"
    write_json(out, hist.to_dict())
    return {"file": str(out), "axes": hist.axes, "bins": hist.bins,
            "total_samples": hist.total_samples}


def _corner_mass(cfg):
    tr = load_trajectory(cfg.traj)
    rep = corner_mass(tr, cfg.radius, cfg.burn_in or 0.0)
    out = rep.to_dict()
    if cfg.out:
        write_json(cfg.out, out)
    return out


def _regret(cfg):
    g = load_game(cfg.game)
    tr = load_trajectory(cfg.traj)
    if (tr.n, tr.m) != g.shape:
        raise UsageError(f"trajectory is {tr.n}x{tr.m} but the game is {g.n}x{g.m}")
    spec = build_noise(cfg, g) if (cfg.sigma or cfg.eta) else None
    out = regret_report(g, tr, spec).to_dict()
    if cfg.out:
        write_json(cfg.out, out)
    return out


def _figure(cfg):
    return reproduce_figure(cfg.figure, cfg.out_dir or f"figure_{cfg.figure}",
                            seed=cfg.seed, scale=cfg.scale)


_DISPATCH = {"solve": _solve, "simulate-ode": _simulate_ode, "simulate-sde": _simulate_sde,
             "analyze": _analyze, "classify-corners": _classify, "occupancy": _occupancy,
             "corner-mass": _corner_mass, "regret": _regret, "reproduce-figure": _figure}


def run(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    return _DISPATCH[cfg.mode](cfg)


# -- argument parsing --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _noise_args(p):
    p.add_argument("--sigma", help="row-player intensities, comma separated (one value broadcasts)")
    p.add_argument("--eta", help="column-player intensities")
    p.add_argument("--effective", action="store_true",
                   help="treat a single value for a two-strategy side as the reduced-equation intensity")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="replab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="mode", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="value, maximal-support equilibrium and anti-equilibrium")
    p.add_argument("game")
    p.add_argument("--out")

    p = sub.add_parser("simulate-ode", help="deterministic replicator path (RK4)")
    p.add_argument("game")
    p.add_argument("--init")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--thin", type=int)
    p.add_argument("--out")

    p = sub.add_parser("simulate-sde", help="stochastic replicator path (Euler-Maruyama)")
    p.add_argument("game")
    _noise_args(p)
    p.add_argument("--init")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--thin", type=int)
    p.add_argument("--burn-in", type=float)
    p.add_argument("--clamp-eps", type=float, default=0.0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--out")

    for name, hlp in (("analyze", "generator report as JSON"),
                      ("classify-corners", "per-corner exponents as CSV")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("game")
        _noise_args(p)
        p.add_argument("--out")

    p = sub.add_parser("occupancy", help="occupation histogram of a trajectory")
    p.add_argument("traj")
    p.add_argument("--axes", default="x1,y1")
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--burn-in", type=float)
    p.add_argument("--out")

    p = sub.add_parser("corner-mass", help="time spent near each pure profile")
    p.add_argument("traj")
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--burn-in", type=float)
    p.add_argument("--out")

    p = sub.add_parser("regret", help="cumulative regret along a trajectory")
    p.add_argument("game")
    p.add_argument("traj")
    _noise_args(p)
    p.add_argument("--out")

    p = sub.add_parser("reproduce-figure", help="run a fixed figure recipe")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--scale", type=float, default=1.0)
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    d = {k: v for k, v in vars(ns).items() if v is not None}
    return ExperimentConfig.from_dict(d)


def _fail(code: int, kind: str, msg: str) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "message": msg}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(build_parser().parse_args(argv))
        summary = run(cfg)
    except FileNotFoundError as e:
        return _fail(EXIT_NOT_FOUND, "file_not_found", str(e))
    except ParseError as e:
        return _fail(EXIT_PARSE, "parse_error", str(e))
    except IntegrationError as e:
        return _fail(EXIT_PRECONDITION, "integration_error", str(e))
    except ValueError as e:
        return _fail(EXIT_PRECONDITION, "precondition", str(e))
    print(json.dumps(summary, sort_keys=True, default=_jsonable))
    return 0


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
