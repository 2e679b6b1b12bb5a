"""Backward Kolmogorov generator on log-barrier Lyapunov functions.

Every Lyapunov function used here has the form

    W(x, y) = -sum_i a_i ln x_i - sum_j b_j ln y_j

with non-negative weights ``a``, ``b``. For the stochastic replicator
dynamics its generator is log-free:

    LW = -sum_i a_i ((Ay)_i - x.Ay) - sum_j b_j ((Bx)_j - y.Bx)
         + 1/2 sum_i a_i sum_k R_ik(x)^2 + 1/2 sum_j b_j sum_k S_jk(y)^2

so it extends continuously to the closed simplex product and can be
evaluated at corners and faces. The sign of ``-LW`` at boundary points
classifies them as attracting or repelling for the interior process.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .equilibrium import EquilibriumReport, maximal_support_equilibrium
from .game import Game, StrategyProfile, _pair, random_simplex
from .sde import DiffusionSpec

LABEL_TOL = 1e-10
WEIGHT_TOL = 1e-12
GRID = 101


class GeneratorError(ValueError):
    pass


# -- Lyapunov functions --------------------------------------------------------

@dataclass(frozen=True)
class LyapunovSpec:
    """Log-barrier Lyapunov function given by its weights ``a`` (rows) and ``b`` (columns).

    ``kind`` is one of ``"V"``, ``"V0"``, ``"V1"``, ``"V2"``, ``"mixture"``;
    ``mix`` holds ``(alpha, beta, gamma)`` for mixtures.
    """

    kind: str
    a: np.ndarray
    b: np.ndarray
    mix: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if np.any(a < 0) or np.any(b < 0):
            raise GeneratorError("Lyapunov weights must be non-negative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def cross_entropy(cls, p, q, kind: str = "V") -> "LyapunovSpec":
        return cls(kind, np.asarray(p, dtype=float), np.asarray(q, dtype=float))

    @classmethod
    def V0(cls, report: EquilibriumReport) -> "LyapunovSpec":
        return cls.cross_entropy(report.p.w, report.q.w, "V0")

    @classmethod
    def V1(cls, report: EquilibriumReport, restrict: bool = False) -> "LyapunovSpec":
        """Cross entropy against the anti-equilibrium.

        With ``restrict`` only the coordinates outside the equilibrium
        support are kept (``p*_i`` for ``i`` not in ``I``, ``q*_j`` for ``j``
        not in ``J``); for the 3x2 example this is ``-ln X3``.
        """
        a, b = report.p_star.w.copy(), report.q_star.w.copy()
        if restrict:
            a[list(report.I)] = 0.0
            b[list(report.J)] = 0.0
        return cls("V1", a, b)

    @classmethod
    def V2(cls, report: EquilibriumReport) -> "LyapunovSpec":
        a = np.zeros(report.p.dim)
        b = np.zeros(report.q.dim)
        a[list(report.tilde_I)] = 1.0
        b[list(report.tilde_J)] = 1.0
        return cls("V2", a, b)

    @classmethod
    def mixture(cls, report: EquilibriumReport, alpha: float, beta: float, gamma: float,
                restrict_v1: bool = False) -> "LyapunovSpec":
        """``alpha V0 + beta V1 + gamma V2``; ``gamma`` is dropped when V2 is empty."""
        w = np.array([alpha, beta, gamma], dtype=float)
        if np.any(w < 0) or np.any(w > 1) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise GeneratorError(f"mixture weights {w.tolist()} must lie in [0,1] and sum to 1")
        if not report.tilde_I and not report.tilde_J and w[2] > 0:
            if w[0] + w[1] == 0:
                raise GeneratorError("V2 is empty for this game; gamma cannot carry all weight")
            w[2] = 0.0
            w /= w.sum()
        parts = [cls.V0(report), cls.V1(report, restrict_v1), cls.V2(report)]
        a = sum(wk * s.a for wk, s in zip(w, parts))
        b = sum(wk * s.b for wk, s in zip(w, parts))
        return cls("mixture", a, b, tuple(float(v) for v in w))

    def value(self, s) -> float:
        x, y = _state(s)
        with np.errstate(divide="ignore"):
            return -float(_wlog(self.a, x) + _wlog(self.b, y))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "a": self.a.tolist(), "b": self.b.tolist()}
        if self.mix is not None:
            d["mix"] = list(self.mix)
        return d


def _wlog(w, z):
    on = w > 0
    return float(np.sum(w[on] * np.log(z[on])))


def _state(s, y=None):
    if y is not None:
        return np.asarray(s, dtype=float), np.asarray(y, dtype=float)
    if isinstance(s, StrategyProfile):
        return s.x.w, s.y.w
    x, y = s
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


# -- generator -----------------------------------------------------------------

def _diag_row_sq(sig: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``sum_k R_ik^2`` for the diagonal model, for every ``i``."""
    s2x2 = sig ** 2 * x ** 2
    return s2x2.sum() - s2x2 + sig ** 2 * (1.0 - x) ** 2


def _row_sq(spec: DiffusionSpec, z: np.ndarray, side: str) -> np.ndarray:
    if spec.is_diagonal:
        return _diag_row_sq(spec.sigma if side == "x" else spec.eta, z)
    M = spec.R_matrix(z) if side == "x" else spec.S_matrix(z)
    return np.sum(M ** 2, axis=1)


def drift_part(g: Game, a, b, s) -> float:
    x, y = _pair(g, *_state(s))
    u = g.A @ y
    v = g.B @ x
    return -float(a @ (u - x @ u) + b @ (v - y @ v))


def diffusion_part(spec: DiffusionSpec, a, b, s) -> float:
    x, y = _state(s)
    return 0.5 * float(a @ _row_sq(spec, x, "x") + b @ _row_sq(spec, y, "y"))


def apply_generator(g: Game, spec: DiffusionSpec, lyap: LyapunovSpec, s) -> float:
    """``L W`` at ``s`` for the log-barrier ``W`` described by ``lyap``.

    Defined on the closed simplex product; no logarithms are evaluated.
    """
    spec.check_dims(g.n, g.m)
    if lyap.a.size != g.n or lyap.b.size != g.m:
        raise GeneratorError(f"Lyapunov weights {lyap.a.size}x{lyap.b.size} vs game {g.n}x{g.m}")
    return drift_part(g, lyap.a, lyap.b, s) + diffusion_part(spec, lyap.a, lyap.b, s)


def apply_to_cross_entropy(g: Game, spec: DiffusionSpec, ref, s) -> float:
    p, q = _state(ref)
    return apply_generator(g, spec, LyapunovSpec.cross_entropy(p, q), s)


def apply_generator_via_transformed_coords(g: Game, spec: DiffusionSpec,
                                          lyap: LyapunovSpec, s) -> float:
    """``L W`` computed through unnormalized weights ``Z`` with ``X = Z / sum(Z)``.

    Take ``dZ_i = Z_i ((AY)_i + sigma_i^2 X_i) dt + sigma_i Z_i dW_i``, whose
    normalization reproduces the diagonal model. Then
    ``S = sum Z`` solves ``dS = S (X.AY + sum_k sigma_k^2 X_k^2) dt + S sum_k sigma_k X_k dW_k``,
    and ``-ln X_i = -ln Z_i + ln S`` is evaluated from the Ito drifts of
    ``ln Z_i`` and ``ln S`` separately. Interior states only.
    """
    if not spec.is_diagonal:
        raise GeneratorError("the transformed-coordinate route needs the diagonal model")
    x, y = _pair(g, *_state(s))
    if np.any(x <= 0) or np.any(y <= 0):
        raise GeneratorError("the transformed-coordinate route needs an interior state")
    return (_transformed_side(g.A @ y, x, spec.sigma, lyap.a)
            + _transformed_side(g.B @ x, y, spec.eta, lyap.b))


def _transformed_side(rate, z, sig, w):
    s2 = sig ** 2
    # Ito drifts of ln Z_i and ln S
    lnZ = rate + s2 * z - 0.5 * s2
    qv = np.sum(s2 * z ** 2)
    lnS = z @ rate + qv - 0.5 * qv
    return float(w @ (lnS - lnZ))


def mixture_consistent(g, spec, report, alpha, beta, gamma, s) -> float:
    """``|L(aV0+bV1+cV2) - (a LV0 + b LV1 + c LV2)|`` (linearity probe)."""
    mix = LyapunovSpec.mixture(report, alpha, beta, gamma)
    al, be, ga = mix.mix
    parts = [LyapunovSpec.V0(report), LyapunovSpec.V1(report), LyapunovSpec.V2(report)]
    lin = sum(w * apply_generator(g, spec, L, s) for w, L in zip((al, be, ga), parts))
    return abs(apply_generator(g, spec, mix, s) - lin)


# -- corners and boundary edges ----------------------------------------------

def label_for(Lambda: float, tol: float = LABEL_TOL) -> str:
    if Lambda < -tol:
        return "attracting"
    if Lambda > tol:
        return "repelling"
    return "neutral"


def corner_profile(g: Game, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    return np.eye(g.n)[i], np.eye(g.m)[j]


def edge_exponent(g: Game, spec: DiffusionSpec, corner: tuple[int, int],
                  target: tuple[int, int]) -> float:
    """``H`` at a corner for the barrier of the coordinate that grows along an edge.

    ``target`` differs from ``corner`` in one player's strategy. On that edge
    only the moving player's coordinate ``z_k`` varies, and
    ``L(-ln z_k)`` at the corner measures the escape rate into the edge:
    negative ``H`` means the corner repels along the edge.
    """
    (i, j), (ti, tj) = corner, target
    if (i != ti) == (j != tj):
        raise GeneratorError(f"{corner} and {target} are not joined by a boundary edge")
    a = np.zeros(g.n)
    b = np.zeros(g.m)
    if i != ti:
        a[ti] = 1.0
    else:
        b[tj] = 1.0
    x, y = corner_profile(g, i, j)
    return drift_part(g, a, b, (x, y)) + diffusion_part(spec, a, b, (x, y))


def corner_name(g: Game, i: int, j: int) -> str:
    """``d{a}{b}`` with ``a = x_1``, ``b = y_1`` for 2x2 games, ``v{i},{j}`` otherwise."""
    if g.n == 2 and g.m == 2:
        return f"d{int(i == 0)}{int(j == 0)}"
    return f"v{i + 1},{j + 1}"


@dataclass
class CornerEntry:
    i: int
    j: int
    name: str
    block: str
    H: dict
    Lambda: dict
    label: dict

    def to_dict(self) -> dict:
        return {"i": self.i + 1, "j": self.j + 1, "name": self.name, "block": self.block,
                "H": self.H, "Lambda": self.Lambda, "label": self.label}


@dataclass
class EdgeEntry:
    source: tuple[int, int]
    target: tuple[int, int]
    H: float
    Lambda: float
    label: str

    def to_dict(self) -> dict:
        return {"source": [self.source[0] + 1, self.source[1] + 1],
                "target": [self.target[0] + 1, self.target[1] + 1],
                "H": self.H, "Lambda": self.Lambda, "label": self.label}


@dataclass
class NoiseConditions:
    large: bool
    small: bool
    large_margin: float
    small_margin: float
    exact: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {"large_noise": self.large, "small_noise": self.small,
                "large_margin": self.large_margin, "small_margin": self.small_margin,
                "exact": self.exact, "note": self.note}


@dataclass
class GeneratorReport:
    corners: list[CornerEntry]
    kinds: list[str]
    primary: str
    Lambda_plus: dict
    Lambda_minus: dict
    edges: list[EdgeEntry] = field(default_factory=list)
    flow: list[tuple] = field(default_factory=list)
    cycle: Optional[list[str]] = None
    conditions: Optional[NoiseConditions] = None
    faces: dict = field(default_factory=dict)

    def corner(self, i: int, j: int) -> CornerEntry:
        return next(c for c in self.corners if (c.i, c.j) == (i, j))

    def to_dict(self) -> dict:
        return {
            "kinds": self.kinds,
            "primary": self.primary,
            "corners": [c.to_dict() for c in self.corners],
            "Lambda_plus": self.Lambda_plus,
            "Lambda_minus": self.Lambda_minus,
            "edges": [e.to_dict() for e in self.edges],
            "flow": [[a, b] for a, b in self.flow],
            "cycle": self.cycle,
            "noise_conditions": None if self.conditions is None else self.conditions.to_dict(),
            "faces": self.faces,
        }

    def csv_rows(self) -> list[tuple]:
        """``(i, j, H, Lambda, label)`` rows (1-based) under the primary Lyapunov function."""
        k = self.primary
        return [(c.i + 1, c.j + 1, c.H[k], c.Lambda[k], c.label[k]) for c in self.corners]


def lyapunov_family(report: EquilibriumReport) -> dict[str, LyapunovSpec]:
    """Lyapunov functions relevant to the equilibrium structure."""
    if report.interior:
        return {"V": LyapunovSpec.cross_entropy(report.p.w, report.q.w)}
    fam = {"V0": LyapunovSpec.V0(report), "V1": LyapunovSpec.V1(report)}
    if report.tilde_I or report.tilde_J:
        fam["V2"] = LyapunovSpec.V2(report)
    return fam


def _block(report, i, j) -> str:
    return f"A{int(i in report.I)}{int(j in report.J)}"


def corner_H_exponents(g: Game, spec: DiffusionSpec,
                       report: Optional[EquilibriumReport] = None) -> GeneratorReport:
    """Corner exponents ``Lambda = -H``, boundary-edge flow and noise conditions."""
    report = report or maximal_support_equilibrium(g)
    fam = lyapunov_family(report)
    kinds = list(fam)
    corners = []
    for i, j in itertools.product(range(g.n), range(g.m)):
        s = corner_profile(g, i, j)
        H = {k: apply_generator(g, spec, L, s) + 0.0 for k, L in fam.items()}
        Lam = {k: -h + 0.0 for k, h in H.items()}
        corners.append(CornerEntry(i, j, corner_name(g, i, j), _block(report, i, j), H, Lam,
                                   {k: label_for(v) for k, v in Lam.items()}))
    Lp = {k: -min(c.H[k] for c in corners) + 0.0 for k in kinds}
    Lm = {k: -max(c.H[k] for c in corners) + 0.0 for k in kinds}

    edges = []
    for i, j in itertools.product(range(g.n), range(g.m)):
        nbrs = [(ti, j) for ti in range(g.n) if ti != i] + [(i, tj) for tj in range(g.m) if tj != j]
        for t in nbrs:
            h = edge_exponent(g, spec, (i, j), t)
            edges.append(EdgeEntry((i, j), t, h + 0.0, -h + 0.0, label_for(-h)))
    flow = boundary_flow(g, edges)
    cycle = find_cycle(g, flow) if g.n == 2 and g.m == 2 else None

    conds = None
    if spec.is_diagonal:
        conds = check_noise_conditions(g, spec, report)
    faces = {}
    for c in corners:
        faces.setdefault(c.block, []).append(c.name)
    faces = {blk: {"corners": names,
                   "labels": sorted({lab for c in corners if c.block == blk
                                     for lab in c.label.values()})}
             for blk, names in sorted(faces.items())}
    primary = "V" if report.interior else "V0"
    return GeneratorReport(corners, kinds, primary, Lp, Lm, edges, flow, cycle, conds, faces)


def boundary_flow(g: Game, edges: list[EdgeEntry]) -> list[tuple[str, str]]:
    """Directed corner pairs joined by an edge that the boundary process traverses.

    The edge ``c -> c'`` is traversed when ``c`` repels along it and ``c'``
    attracts along the reverse direction.
    """
    lab = {(e.source, e.target): e.label for e in edges}
    out = []
    for (src, dst), l in lab.items():
        if l == "repelling" and lab[(dst, src)] == "attracting":
            out.append((corner_name(g, *src), corner_name(g, *dst)))
    return out


def find_cycle(g: Game, flow: list[tuple[str, str]], start: Optional[str] = None):
    """Follow unique outgoing flow edges from ``start``; returns the closed cycle or None."""
    succ: dict[str, list[str]] = {}
    for a, b in flow:
        succ.setdefault(a, []).append(b)
    start = start or corner_name(g, g.n - 1, g.m - 1)
    path = [start]
    while True:
        nxt = succ.get(path[-1], [])
        if len(nxt) != 1:
            return None
        if nxt[0] == start:
            return path + [start]
        if nxt[0] in path:
            return None
        path.append(nxt[0])


def flip_threshold(g: Game, corner, target, make_spec, lo: float, hi: float) -> float:
    """Noise level where the edge exponent at ``corner`` towards ``target`` changes sign.

    ``make_spec(level)`` builds the diffusion for a given level.
    """
    f = lambda lvl: edge_exponent(g, make_spec(lvl), corner, target)
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


# -- noise conditions --------------------------------------------------------------

def _rat(v, exact):
    return Fraction(float(v)).limit_denominator(10 ** 9) if exact else float(v)


def check_noise_conditions(g: Game, spec: DiffusionSpec,
                           report: Optional[EquilibriumReport] = None,
                           exact: bool = False) -> NoiseConditions:
    """Large- and small-noise sufficient conditions for non-interior equilibria.

    Margins are ``LHS - RHS``; a condition holds when its margin is positive.
    A max over an empty index set contributes 0 and a min over an empty set
    is ``+inf``. With ``exact`` the inputs are snapped to nearby rationals
    (denominator at most 1e9) and the inequalities are decided exactly.
    """
    if not spec.is_diagonal:
        raise GeneratorError("noise conditions are stated for the diagonal model")
    report = report or maximal_support_equilibrium(g)
    if report.interior:
        return NoiseConditions(False, False, math.nan, math.nan, exact,
                               "equilibrium is interior; the conditions do not apply")
    n, m = g.n, g.m
    R = lambda v: _rat(v, exact)
    A = [[R(v) for v in row] for row in g.A]
    B = [[-A[i][j] for i in range(n)] for j in range(m)]
    p = [R(v) for v in report.p.w]
    q = [R(v) for v in report.q.w]
    s2 = [R(v) ** 2 for v in spec.sigma]
    e2 = [R(v) ** 2 for v in spec.eta]
    I, J = list(report.I), list(report.J)
    Ic = [i for i in range(n) if i not in I]
    Jc = [j for j in range(m) if j not in J]

    row_terms = [sum(q[k] * B[k][i] for k in J) for i in Ic]
    col_terms = [sum(p[l] * A[l][j] for l in I) for j in Jc]

    # large noise
    lhs_large = min(p[i] * min(s2) / (2 * n) + q[j] * min(e2) / (2 * m) for i in I for j in J)
    Aq = [sum(A[i][j] * q[j] for j in range(m)) for i in range(n)]
    rhs_large = (sum(p[i] * Aq[i] for i in I) + (max(row_terms) if row_terms else 0)
                 + (max(col_terms) if col_terms else 0))
    # small noise
    terms = row_terms + col_terms
    rhs_small = max(n * a / 2 + m * b / 2 for a in s2 for b in e2)
    if terms:
        small_margin = min(terms) - rhs_small
    else:
        small_margin = math.inf
    large_margin = lhs_large - rhs_large
    return NoiseConditions(bool(large_margin > 0), bool(small_margin > 0),
                           float(large_margin), float(small_margin), exact)


# -- ellipticity -------------------------------------------------------------------

@dataclass
class EllipticityReport:
    xi: float
    degenerate: list
    consistent: bool
    elliptic: bool

    def to_dict(self) -> dict:
        return {"xi_lower_bound": self.xi, "degenerate_points": len(self.degenerate),
                "consistent": self.consistent, "elliptic": self.elliptic}


def check_ellipticity(spec: DiffusionSpec, samples: int = 1000, n: Optional[int] = None,
                      m: Optional[int] = None, seed: int = 0, tol: float = 1e-14) -> EllipticityReport:
    """Sampled lower bound on ``min_{i != j} (sum_k R_ik^2 + sum_k R_jk^2)`` for both blocks.

    Vertices are always probed. A vanishing row ``i`` is expected exactly at
    ``z_i = 1``; ``consistent`` reports whether that holds at every probe.
    """
    if samples < 1:
        raise GeneratorError("samples must be at least 1")
    if spec.is_diagonal:
        n, m = spec.sigma.size, spec.eta.size
    elif n is None or m is None:
        raise GeneratorError("custom diffusion needs explicit dimensions")
    rng = np.random.default_rng(seed)
    xi = math.inf
    degenerate = []
    consistent = True
    for side, d in (("x", n), ("y", m)):
        pts = np.vstack([np.eye(d), random_simplex(rng, d, samples)])
        for z in pts:
            rs = _row_sq(spec, z, side)
            srt = np.sort(rs)
            xi = min(xi, float(srt[0] + srt[1]))
            for i in np.flatnonzero(rs <= tol):
                degenerate.append((side, z.copy(), int(i)))
                if abs(z[i] - 1.0) > 1e-12:
                    consistent = False
    return EllipticityReport(xi, degenerate, consistent, xi > tol and consistent)


# -- the 3x2 example -------------------------------------------------------------

MP_3X2 = np.array([[1.0, -1.0], [-1.0, 1.0], [-2.0, -2.0]])


def _closed_H0(sig, eta, X, Y1):
    """Generator of V0 for the 3x2 example (full drift of both players)."""
    s1, s2, s3 = sig ** 2
    e1, e2 = eta ** 2
    X1, X2, X3 = X
    Y2 = 1.0 - Y1
    L0 = -2.0 * X3
    K0 = 0.5 * (0.5 * s1 * (1 - X1) ** 2 + 0.5 * s2 * X2 ** 2 + 0.5 * s3 * X3 ** 2
                + 0.5 * s2 * (1 - X2) ** 2 + 0.5 * s1 * X1 ** 2 + 0.5 * s3 * X3 ** 2)
    K0 += 0.5 * (0.5 * e2 * Y2 ** 2 + 0.5 * e1 * (1 - Y1) ** 2
                 + 0.5 * e1 * Y1 ** 2 + 0.5 * e2 * (1 - Y2) ** 2)
    return L0 + K0


def _closed_H1(sig, X, Y1):
    """Generator of ``-ln X3`` for the 3x2 example."""
    s1, s2, s3 = sig ** 2
    X1, X2, X3 = X
    L1 = 2 * (1 - X3) + X2 * (1 - 2 * Y1) + X1 * (2 * Y1 - 1)
    K1 = 0.5 * s3 * (1 - X3) ** 2 + 0.5 * s2 * X2 ** 2 + 0.5 * s1 * X1 ** 2
    return L1 + K1


@dataclass
class FaceReport:
    H0_top: np.ndarray            # H0 on {X=(0,0,1)} over the Y1 grid
    H1_face: np.ndarray           # H1 on {X3=0}, shape (grid, grid) over (X1, Y1)
    H1_bound: float
    H1_min: float
    top_label: str
    face_label: str
    closed_form_error: float
    x_only_L0_error_at_top: float
    conditions: NoiseConditions

    def to_dict(self) -> dict:
        return {"H0_top_max": float(self.H0_top.max()), "H0_top_min": float(self.H0_top.min()),
                "H1_face_min": self.H1_min, "H1_bound": self.H1_bound,
                "top_label": self.top_label, "face_label": self.face_label,
                "closed_form_error": self.closed_form_error,
                "noise_conditions": self.conditions.to_dict()}


def classify_3x2_faces(g: Game, spec: DiffusionSpec, grid: int = GRID) -> FaceReport:
    """Sweep ``H0`` over ``{X=(0,0,1)}`` and ``H1 = L(-ln X3)`` over ``{X3=0}``.

    The face ``{X3=0}`` is attracting when ``-H1 < 0`` throughout and the
    top ``{X=(0,0,1)}`` is repelling when ``-H0 > 0`` throughout. Generator
    values are cross-checked against the closed forms for this game.
    """
    if g.shape != (3, 2):
        raise GeneratorError(f"expected a 3x2 game, got {g.n}x{g.m}")
    if not spec.is_diagonal:
        raise GeneratorError("face classification needs the diagonal model")
    spec.check_dims(3, 2)
    report = maximal_support_equilibrium(g)
    V0 = LyapunovSpec.V0(report)
    V1 = LyapunovSpec.V1(report, restrict=True)
    ts = np.linspace(0.0, 1.0, grid)
    known = np.array_equal(g.A, MP_3X2)
    err = 0.0
    top = np.empty(grid)
    X = np.array([0.0, 0.0, 1.0])
    for k, y1 in enumerate(ts):
        Y = np.array([y1, 1.0 - y1])
        top[k] = apply_generator(g, spec, V0, (X, Y))
        if known:
            err = max(err, abs(top[k] - _closed_H0(spec.sigma, spec.eta, X, y1)))
    face = np.empty((grid, grid))
    for a, x1 in enumerate(ts):
        X = np.array([x1, 1.0 - x1, 0.0])
        for k, y1 in enumerate(ts):
            Y = np.array([y1, 1.0 - y1])
            face[a, k] = apply_generator(g, spec, V1, (X, Y))
            if known:
                err = max(err, abs(face[a, k] - _closed_H1(spec.sigma, X, y1)))
    if known and err > 1e-10:
        raise GeneratorError(f"generator disagrees with the closed forms by {err:.3g}")
    # the player-x-only drift formula for L0 is exact at the top vertex
    l0_err = 0.0
    if known:
        X = np.array([0.0, 0.0, 1.0])
        for y1 in ts:
            x_only = -2 * X[2] + X[0] * (2 * y1 - 1) + X[1] * (1 - 2 * y1)
            full = drift_part(g, V0.a, V0.b, (X, np.array([y1, 1 - y1])))
            l0_err = max(l0_err, abs(x_only - full))
    s2 = spec.sigma ** 2
    bound = 1.0 + s2[2] / 2 + min(s2[0], s2[1]) / 4
    top_lab = _uniform_label(-top)
    face_lab = _uniform_label(-face)
    return FaceReport(top, face, float(bound), float(face.min()), top_lab, face_lab,
                      float(err), float(l0_err), check_noise_conditions(g, spec, report))


def _uniform_label(Lams: np.ndarray) -> str:
    labs = {label_for(v) for v in np.ravel(Lams)}
    return labs.pop() if len(labs) == 1 else "mixed"
