"""Game value, maximal-support equilibria and anti-equilibria.

The value and one optimal pair come from a linear program (HiGHS via
``scipy.optimize.linprog``). The optimal-strategy polytopes are explored
independently by enumerating basic solutions of the maximin program: for
every support ``S`` of the row strategy and every equally sized set ``T``
of tight columns, the square system

    sum_{i in S} p_i A[i, j] = v   (j in T),    sum_{i in S} p_i = 1

is solved for ``(p_S, v)``. Feasible solutions are vertices of the maximin
polyhedron; those attaining the game value are the vertices of the optimal
face. Their barycenter is an optimal strategy of maximal support.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .game import (
    SUPPORT_TOL,
    Game,
    SimplexPoint,
    SupportSet,
    is_anti_equilibrium,
    is_nash,
    support,
)

log = logging.getLogger(__name__)

#: largest n or m accepted by the vertex enumeration
ENUMERATION_CAP = 8
DEDUP_TOL = 1e-7
FEAS_TOL = 1e-9
#: square systems with a condition number above this are skipped and flagged
COND_LIMIT = 1e12


class EquilibriumError(RuntimeError):
    pass


def _clean(w: np.ndarray) -> SimplexPoint:
    w = np.where(np.abs(w) < 1e-13, 0.0, w)
    w = np.clip(w, 0.0, None)
    return SimplexPoint(w / w.sum())


_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10,
                  "dual_feasibility_tolerance": 1e-10}


def _row_lp(M: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximize min_j (p^T M)_j over the simplex. Returns (value, p)."""
    n, m = M.shape
    # variables (p_1..p_n, v); minimize -v
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((m, 1))])
    b_ub = np.zeros(m)
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    bounds = [(0, None)] * n + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:  # pragma: no cover - bounded matrices are always feasible
        raise EquilibriumError(f"LP failed: {res.message}")
    # re-evaluate the guarantee of the returned strategy, free of solver slack
    p = np.clip(res.x[:n], 0.0, None)
    p /= p.sum()
    return float(np.min(p @ M)) + 0.0, p


def solve_value(g: Game) -> tuple[float, SimplexPoint, SimplexPoint]:
    """Minimax value and one optimal pair ``(p, q)`` via linear programming."""
    value, p = _row_lp(g.A)
    neg_value, q = _row_lp(-g.A.T)
    if abs(value + neg_value) > 1e-7 * max(1.0, abs(value)):
        raise EquilibriumError(f"primal/dual values disagree: {value} vs {-neg_value}")
    return value, _clean(p), _clean(q)


@dataclass
class VertexSet:
    """Vertices of one player's optimal-strategy polytope."""

    value: float
    vertices: np.ndarray          # (k, dim)
    skipped_ill_conditioned: int = 0

    @property
    def barycenter(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def optimal_vertices(M: np.ndarray, cap: int = ENUMERATION_CAP) -> VertexSet:
    """Vertices of the maximin-optimal strategies of the row player of ``M``."""
    n, m = M.shape
    if n > cap or m > cap:
        raise EquilibriumError(f"game {n}x{m} exceeds the enumeration cap of {cap}")
    candidates = []
    skipped = 0
    for k in range(1, min(n, m) + 1):
        pairs = list(itertools.product(itertools.combinations(range(n), k),
                                       itertools.combinations(range(m), k)))
        # unknowns (p_S, v); k indifference rows plus the sum row
        lhs = np.zeros((len(pairs), k + 1, k + 1))
        for idx, (S, T) in enumerate(pairs):
            lhs[idx, :k, :k] = M[np.ix_(S, T)].T
        lhs[:, :k, k] = -1.0
        lhs[:, k, :k] = 1.0
        rhs = np.zeros(k + 1)
        rhs[k] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.linalg.cond(lhs)
        singular = ~np.isfinite(cond)
        ill = ~singular & (cond > COND_LIMIT)
        skipped += int(ill.sum())
        ok = np.flatnonzero(~singular & ~ill)
        if ok.size == 0:
            continue
        sols = np.linalg.solve(lhs[ok], np.broadcast_to(rhs, (ok.size, k + 1))[..., None])[..., 0]
        for idx, sol in zip(ok, sols):
            S = pairs[idx][0]
            pS, v = sol[:k], sol[k]
            if np.any(pS < -FEAS_TOL):
                continue
            p = np.zeros(n)
            p[list(S)] = pS
            if np.min(p @ M) < v - FEAS_TOL:
                continue
            candidates.append((float(v), p))
    if not candidates:  # pragma: no cover
        raise EquilibriumError("no basic feasible solution found")
    value = max(v for v, _ in candidates)
    verts: list[np.ndarray] = []
    for v, p in candidates:
        if v < value - FEAS_TOL:
            continue
        p = np.clip(p, 0.0, None)
        p /= p.sum()
        if not any(np.max(np.abs(p - w)) < DEDUP_TOL for w in verts):
            verts.append(p)
    return VertexSet(float(value), np.array(verts), skipped)


def value_by_enumeration(g: Game) -> float:
    return optimal_vertices(g.A).value


@dataclass
class EquilibriumReport:
    value: float
    p: SimplexPoint
    q: SimplexPoint
    p_star: SimplexPoint
    q_star: SimplexPoint
    I: SupportSet
    J: SupportSet
    I_star: SupportSet
    J_star: SupportSet
    interior: bool
    interior_anti: bool
    anti_value: float = 0.0
    row_vertices: np.ndarray | None = None
    col_vertices: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def eq(self) -> tuple[np.ndarray, np.ndarray]:
        return self.p.w, self.q.w

    @property
    def anti(self) -> tuple[np.ndarray, np.ndarray]:
        return self.p_star.w, self.q_star.w

    @property
    def tilde_I(self) -> tuple[int, ...]:
        """Row strategies played in neither the equilibrium nor the anti-equilibrium."""
        used = set(self.I) | set(self.I_star)
        return tuple(i for i in range(self.p.dim) if i not in used)

    @property
    def tilde_J(self) -> tuple[int, ...]:
        used = set(self.J) | set(self.J_star)
        return tuple(j for j in range(self.q.dim) if j not in used)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p.w.tolist(),
            "q": self.q.w.tolist(),
            "p_star": self.p_star.w.tolist(),
            "q_star": self.q_star.w.tolist(),
            "anti_value": self.anti_value,
            "I": self.I.one_based,
            "J": self.J.one_based,
            "I_star": self.I_star.one_based,
            "J_star": self.J_star.one_based,
            "interior": self.interior,
            "interior_anti": self.interior_anti,
            "flags": list(self.flags),
        }


def _max_support_pair(M: np.ndarray, cap: int):
    rows = optimal_vertices(M, cap)
    cols = optimal_vertices(-M.T, cap)
    flags = []
    if rows.skipped_ill_conditioned or cols.skipped_ill_conditioned:
        flags.append("ill_conditioned_basis_skipped")
    if abs(rows.value + cols.value) > 1e-7 * max(1.0, abs(rows.value)):
        flags.append("enumeration_duality_gap")
    return rows, cols, flags


def maximal_support_equilibrium(g: Game, cap: int = ENUMERATION_CAP,
                                support_tol: float = SUPPORT_TOL) -> EquilibriumReport:
    """Barycentric (maximal-support) equilibrium and anti-equilibrium of ``g``."""
    lp_value, _, _ = solve_value(g)
    rows, cols, flags = _max_support_pair(g.A, cap)
    if abs(rows.value - lp_value) > 1e-7 * max(1.0, abs(lp_value)):
        flags.append("lp_enumeration_disagree")
        log.warning("LP value %r and enumeration value %r disagree", lp_value, rows.value)
    # anti-equilibria are equilibria of the negated game
    arows, acols, aflags = _max_support_pair(-g.A, cap)
    flags += [f"anti:{f}" for f in aflags]
    if len(rows.vertices) > 1 or len(cols.vertices) > 1:
        flags.append("non_unique_equilibrium")
    if len(arows.vertices) > 1 or len(acols.vertices) > 1:
        flags.append("non_unique_anti_equilibrium")

    p, q = _clean(rows.barycenter), _clean(cols.barycenter)
    ps, qs = _clean(arows.barycenter), _clean(acols.barycenter)
    I, J = support(p, support_tol), support(q, support_tol)
    Is, Js = support(ps, support_tol), support(qs, support_tol)
    report = EquilibriumReport(
        value=lp_value, p=p, q=q, p_star=ps, q_star=qs,
        I=I, J=J, I_star=Is, J_star=Js,
        interior=I.full and J.full,
        interior_anti=Is.full and Js.full,
        anti_value=-arows.value + 0.0,
        row_vertices=rows.vertices, col_vertices=cols.vertices,
        flags=flags,
    )
    if not is_nash(g, p, q, 1e-8):  # pragma: no cover
        raise EquilibriumError("barycenter failed the Nash check")
    if not is_anti_equilibrium(g, ps, qs, 1e-8):  # pragma: no cover
        raise EquilibriumError("anti barycenter failed the anti-equilibrium check")
    return report
