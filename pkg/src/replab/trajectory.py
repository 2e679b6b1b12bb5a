"""Recorded paths on the product of simplices, with a CSV round-trip."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .game import StrategyProfile


class IntegrationError(RuntimeError):
    """Non-finite state during integration."""

    def __init__(self, message, step=None, state=None):
        super().__init__(message)
        self.step = step
        self.state = state


@dataclass
class Trajectory:
    times: np.ndarray   # (N,)
    x: np.ndarray       # (N, n)
    y: np.ndarray       # (N, m)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if not (len(self.times) == len(self.x) == len(self.y)):
            raise ValueError("times and states have different lengths")

    def __len__(self):
        return len(self.times)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def profile(self, k: int) -> StrategyProfile:
        return StrategyProfile(self.x[k], self.y[k])

    def window(self, burn_in: float) -> "Trajectory":
        keep = self.times >= burn_in
        return Trajectory(self.times[keep], self.x[keep], self.y[keep], dict(self.meta))

    def columns(self) -> dict[str, np.ndarray]:
        cols = {f"x{i + 1}": self.x[:, i] for i in range(self.n)}
        cols.update({f"y{j + 1}": self.y[:, j] for j in range(self.m)})
        return cols

    def coordinate(self, name: str) -> np.ndarray:
        name = name.replace("_", "").lower()
        cols = self.columns()
        if name not in cols:
            raise KeyError(f"unknown coordinate {name!r}; have {sorted(cols)}")
        return cols[name]

    # CSV: header "t,x_1..x_n,y_1..y_m"; repr-precision floats so reads are exact
    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x_{i + 1}" for i in range(self.n)]
                   + [f"y_{j + 1}" for j in range(self.m)])
        for t, xs, ys in zip(self.times, self.x, self.y):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in xs]
                       + [repr(float(v)) for v in ys])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        atomic_write_text(path, self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "t":
            raise ValueError(f"{path}: missing 't,x_..,y_..' header")
        header = rows[0]
        xi = [k for k, h in enumerate(header) if h.startswith("x_")]
        yi = [k for k, h in enumerate(header) if h.startswith("y_")]
        if not xi or not yi or len(xi) + len(yi) + 1 != len(header):
            raise ValueError(f"{path}: unexpected header {header}")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
        if data.size == 0:
            raise ValueError(f"{path}: no samples")
        return cls(data[:, 0], data[:, xi], data[:, yi], {"source": str(path)})


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
