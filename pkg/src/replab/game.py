"""Zero-sum game representation, simplex points and definitional checks.

The payoff matrix ``A`` (row player) is the only stored payoff data; the
column player's matrix ``B = -A.T`` is recomputed on every access so the
zero-sum identity holds by construction.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: default threshold for "played with positive probability"
SUPPORT_TOL = 1e-9
#: accepted deviation of a probability vector's sum before renormalizing
SUM_TOL = 1e-9


class GameError(ValueError):
    """Invalid game data or mismatched dimensions."""


@dataclass(frozen=True)
class Game:
    """Two-player zero-sum game given by the row player's payoff matrix."""

    A: np.ndarray
    name: str = "game"
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2:
            raise GameError(f"payoff matrix must be 2-d, got shape {A.shape}")
        n, m = A.shape
        if n < 2 or m < 2:
            raise GameError(f"need at least 2 strategies per player, got {n}x{m}")
        if not np.all(np.isfinite(A)):
            raise GameError("payoff matrix has non-finite entries")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        rows = tuple(self.row_labels) or tuple(f"r{i + 1}" for i in range(n))
        cols = tuple(self.col_labels) or tuple(f"c{j + 1}" for j in range(m))
        if len(rows) != n or len(cols) != m:
            raise GameError(
                f"label counts ({len(rows)}, {len(cols)}) do not match shape {A.shape}"
            )
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def B(self) -> np.ndarray:
        """Column player's payoff matrix, always ``-A.T``."""
        return -self.A.T

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def negated(self) -> "Game":
        """The game with payoffs ``-A``; its equilibria are anti-equilibria."""
        return Game(-self.A, name=f"neg({self.name})",
                    row_labels=self.row_labels, col_labels=self.col_labels)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "A": self.A.tolist(),
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Game":
        if not isinstance(data, dict) or "A" not in data:
            raise GameError("game JSON must be an object with an 'A' matrix")
        unknown = set(data) - {"name", "A", "row_labels", "col_labels"}
        if unknown:
            raise GameError(f"unknown game keys: {sorted(unknown)}")
        rows = data["A"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise GameError("'A' must be a non-empty list of rows")
        if len({len(r) for r in rows}) != 1:
            raise GameError("'A' rows have unequal lengths")
        return cls(
            np.array(rows, dtype=float),
            name=str(data.get("name", "game")),
            row_labels=tuple(data.get("row_labels") or ()),
            col_labels=tuple(data.get("col_labels") or ()),
        )

    @classmethod
    def from_json(cls, path) -> "Game":
        """Read a game file; JSON syntax errors propagate as ``json.JSONDecodeError``."""
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SimplexPoint:
    """A probability vector on the closed simplex.

    Negative components are rejected. A sum within ``1 +/- 1e-9`` is
    renormalized; anything further off raises ``ValueError``.
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        if w.size < 1:
            raise ValueError("empty probability vector")
        if not np.all(np.isfinite(w)):
            raise ValueError(f"non-finite probability vector {w}")
        if np.any(w < 0):
            raise ValueError(f"negative probability in {w}")
        total = w.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.w.size

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def __len__(self):
        return self.dim

    def __getitem__(self, k):
        return self.w[k]

    @classmethod
    def vertex(cls, k: int, dim: int) -> "SimplexPoint":
        """Pure strategy ``e_k`` (0-based ``k``)."""
        w = np.zeros(dim)
        w[k] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, dim: int) -> "SimplexPoint":
        return cls(np.full(dim, 1.0 / dim))


@dataclass(frozen=True)
class StrategyProfile:
    """A pair of mixed strategies ``(x, y)``."""

    x: SimplexPoint
    y: SimplexPoint

    def __post_init__(self):
        if not isinstance(self.x, SimplexPoint):
            object.__setattr__(self, "x", SimplexPoint(self.x))
        if not isinstance(self.y, SimplexPoint):
            object.__setattr__(self, "y", SimplexPoint(self.y))

    def __iter__(self):
        return iter((self.x.w, self.y.w))

    def check(self, g: Game) -> None:
        if (self.x.dim, self.y.dim) != g.shape:
            raise GameError(
                f"profile dims ({self.x.dim}, {self.y.dim}) do not match game shape {g.shape}"
            )

    @property
    def is_interior(self) -> bool:
        return bool(np.all(self.x.w > 0) and np.all(self.y.w > 0))


@dataclass(frozen=True)
class SupportSet:
    """Indices (0-based) of components above ``tol``."""

    indices: tuple[int, ...]
    dim: int
    tol: float = SUPPORT_TOL

    @property
    def complement(self) -> tuple[int, ...]:
        inside = set(self.indices)
        return tuple(k for k in range(self.dim) if k not in inside)

    @property
    def one_based(self) -> list[int]:
        return [k + 1 for k in self.indices]

    @property
    def full(self) -> bool:
        return len(self.indices) == self.dim

    def __contains__(self, k):
        return k in self.indices

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


class SupportVerdict(enum.Enum):
    BOTH_INTERIOR = "BothInterior"
    MUTUALLY_NON_NESTED = "MutuallyNonNested"
    VIOLATION = "Violation"


def _vec(w) -> np.ndarray:
    if isinstance(w, SimplexPoint):
        return w.w
    return np.asarray(w, dtype=float)


def _pair(g: Game, x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = _vec(x), _vec(y)
    if x.shape != (g.n,) or y.shape != (g.m,):
        raise GameError(
            f"strategy shapes {x.shape} and {y.shape} do not match game shape {g.shape}"
        )
    return x, y


def utilities(g: Game, x, y=None):
    """Pure-strategy utilities and the two scalar payoffs.

    Accepts either a :class:`StrategyProfile` or separate ``x, y``.

    Returns
    -------
    u : ndarray (n,)
        ``A @ y``, the row player's utility per pure strategy.
    v : ndarray (m,)
        ``B @ x``, the column player's utility per pure strategy.
    payoff_x, payoff_y : float
        ``x.A.y`` and ``y.B.x``; their sum is zero.
    """
    if y is None:
        x, y = x.x, x.y
    x, y = _pair(g, x, y)
    u = g.A @ y
    v = g.B @ x
    return u, v, float(x @ u), float(y @ v)


def is_nash(g: Game, p, q, tol: float = 1e-9) -> bool:
    """No pure deviation improves either player's payoff by more than ``tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    p, q = _pair(g, p, q)
    Aq = g.A @ q
    Bp = g.B @ p
    return bool(np.all(Aq <= p @ Aq + tol) and np.all(Bp <= q @ Bp + tol))


def is_anti_equilibrium(g: Game, p, q, tol: float = 1e-9) -> bool:
    """No pure deviation lowers either player's payoff by more than ``tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    p, q = _pair(g, p, q)
    Aq = g.A @ q
    Bp = g.B @ p
    return bool(np.all(Aq >= p @ Aq - tol) and np.all(Bp >= q @ Bp - tol))


def support(w, tol: float = SUPPORT_TOL) -> SupportSet:
    w = _vec(w)
    if not 0 <= tol < 1.0 / w.size:
        raise ValueError(f"tol must lie in [0, 1/dim), got {tol}")
    return SupportSet(tuple(int(k) for k in np.flatnonzero(w > tol)), w.size, tol)


def check_support_lemma(g: Game, eq, anti, tol: float = 1e-8,
                        support_tol: float = SUPPORT_TOL) -> SupportVerdict:
    """Classify how the supports of an equilibrium and an anti-equilibrium relate.

    In generic games either both are interior or neither support contains the
    other. ``VIOLATION`` signals a non-generic game.
    """
    p, q = eq
    ps, qs = anti
    if not is_nash(g, p, q, tol):
        raise GameError("first profile is not a Nash equilibrium")
    if not is_anti_equilibrium(g, ps, qs, tol):
        raise GameError("second profile is not an anti-equilibrium")
    sp, sq = support(p, support_tol), support(q, support_tol)
    sps, sqs = support(ps, support_tol), support(qs, support_tol)
    if sp.full and sq.full and sps.full and sqs.full:
        return SupportVerdict.BOTH_INTERIOR
    # tag indices by player so row 1 and column 1 stay distinct
    eq_set = {("x", i) for i in sp} | {("y", j) for j in sq}
    anti_set = {("x", i) for i in sps} | {("y", j) for j in sqs}
    if eq_set - anti_set and anti_set - eq_set:
        return SupportVerdict.MUTUALLY_NON_NESTED
    return SupportVerdict.VIOLATION


def random_game(rng: np.random.Generator, n: int, m: int, low=-1.0, high=1.0) -> Game:
    return Game(rng.uniform(low, high, size=(n, m)), name=f"random{n}x{m}")


def random_simplex(rng: np.random.Generator, dim: int, size=None) -> np.ndarray:
    """Uniform samples from the open simplex."""
    return rng.dirichlet(np.ones(dim), size=size)
