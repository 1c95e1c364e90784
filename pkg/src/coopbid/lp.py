"""Dense two-phase simplex.

Problems are converted to standard form (slack/surplus columns, shifted or
split variables) and solved on a full tableau. Sizes in this package stay in
the low thousands of columns, so no sparse machinery is used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9
BLAND_AFTER = 1000
MAX_PIVOTS = 200_000

_RELATIONS = {
    "<=": "<=", "≤": "<=", "le": "<=",
    ">=": ">=", "≥": ">=", "ge": ">=",
    "=": "=", "==": "=", "eq": "=",
}


class MalformedProgram(ValueError):
    pass


class LpError(RuntimeError):
    """Raised when the simplex fails to terminate."""


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``sense`` c.x subject to A x (rel) rhs and per-variable bounds.

    Bounds default to ``(0, inf)``. Use ``-np.inf`` / ``np.inf`` for free
    directions.
    """

    cost: np.ndarray
    A: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray
    bounds: tuple[tuple[float, float], ...] | None = None
    sense: str = "min"

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float).reshape(-1)
        n = cost.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise MalformedProgram(
                f"constraint matrix has shape {A.shape}, expected (m, {n})")
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if rhs.size != A.shape[0] or len(self.relations) != A.shape[0]:
            raise MalformedProgram("rhs/relations length does not match rows")
        try:
            rels = tuple(_RELATIONS[r] for r in self.relations)
        except KeyError as exc:
            raise MalformedProgram(f"unknown relation {exc.args[0]!r}") from None
        bounds = self.bounds
        if bounds is None:
            bounds = ((0.0, np.inf),) * n
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != n:
            raise MalformedProgram("bounds length does not match cost")
        for j, (lo, hi) in enumerate(bounds):
            if lo > hi or lo == np.inf or hi == -np.inf:
                raise MalformedProgram(f"invalid bounds for variable {j}: {(lo, hi)}")
        if self.sense not in ("min", "max"):
            raise MalformedProgram(f"sense must be 'min' or 'max', got {self.sense!r}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))
                and np.all(np.isfinite(cost))):
            raise MalformedProgram("non-finite coefficient")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def from_rows(cls, cost: Sequence[float],
                  rows: Sequence[tuple[Sequence[float], str, float]],
                  bounds=None, sense: str = "min") -> "LinearProgram":
        n = len(cost)
        for i, (coeffs, _, _) in enumerate(rows):
            if len(coeffs) != n:
                raise MalformedProgram(
                    f"row {i} has {len(coeffs)} coefficients, expected {n}")
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
        return cls(cost=cost, A=A, relations=tuple(r[1] for r in rows),
                   rhs=[r[2] for r in rows], bounds=bounds, sense=sense)

    @property
    def n_vars(self) -> int:
        return self.cost.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x`` (0 if feasible)."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.n_rows:
            ax = self.A @ x
            for val, rel, b in zip(ax, self.relations, self.rhs):
                if rel == "<=":
                    worst = max(worst, val - b)
                elif rel == ">=":
                    worst = max(worst, b - val)
                else:
                    worst = max(worst, abs(val - b))
        for xj, (lo, hi) in zip(x, self.bounds):
            worst = max(worst, lo - xj, xj - hi)
        return float(worst)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    primal: np.ndarray
    objective: float
    # d(objective)/d(rhs_i) per original row; zero unless optimal.
    duals: np.ndarray
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _StandardForm:
    """min c.y s.t. M y = b, y >= 0, with a map back to the original x."""

    def __init__(self, lp: LinearProgram):
        m, n = lp.A.shape
        sign = -1.0 if lp.sense == "max" else 1.0
        lo = np.array([b[0] for b in lp.bounds])
        hi = np.array([b[1] for b in lp.bounds])
        lo_fin, hi_fin = np.isfinite(lo), np.isfinite(hi)
        free = ~lo_fin & ~hi_fin
        # x_j = offset_j + sum over its columns of sgn * y_col; free variables
        # get a (+, -) column pair, upper-bounded-only ones are mirrored.
        src = np.repeat(np.arange(n), np.where(free, 2, 1))
        first = np.ones(src.size, dtype=bool)
        first[1:] = src[1:] != src[:-1]
        sgn = np.where(first, np.where((~lo_fin & hi_fin)[src], -1.0, 1.0), -1.0)
        self.offset = np.where(lo_fin, lo, np.where(hi_fin, hi, 0.0))
        self.src, self.sgn = src, sgn
        n_struct = src.size
        bounded = np.flatnonzero(lo_fin[src] & hi_fin[src] & first)
        n_bound = bounded.size
        rels = list(lp.relations) + ["<="] * n_bound
        is_le = np.array([r == "<=" for r in rels], dtype=bool)
        is_ge = np.array([r == ">=" for r in rels], dtype=bool)
        has_slack = is_le | is_ge
        n_slack = int(has_slack.sum())
        rows = m + n_bound
        M = np.zeros((rows, n_struct + n_slack))
        M[:m, :n_struct] = lp.A[:, src] * sgn
        M[m + np.arange(n_bound), bounded] = 1.0
        slack_rows = np.flatnonzero(has_slack)
        slack_cols = n_struct + np.arange(n_slack)
        M[slack_rows, slack_cols] = np.where(is_le[slack_rows], 1.0, -1.0)
        rhs = lp.rhs - (lp.A @ self.offset if m else 0.0)
        b = np.concatenate([rhs, (hi - lo)[src[bounded]]])
        flip = np.where(b < 0, -1.0, 1.0)
        M *= flip[:, None]
        self.M = M
        self.b = b * flip
        self.c = np.concatenate([sign * lp.cost[src] * sgn, np.zeros(n_slack)])
        self.flip = flip
        slack_of_row = np.full(rows, -1)
        slack_of_row[slack_rows] = slack_cols
        self.slack_of_row = slack_of_row
        self.n_orig_rows = m
        self.sign = sign
        self.n = n

    def to_original(self, y: np.ndarray) -> np.ndarray:
        return self.offset + np.bincount(self.src, weights=self.sgn * y[:self.src.size],
                                         minlength=self.n)


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: list[int], allowed: int, budget: list[int]) -> str:
    """Minimise on tableau T (last row = reduced costs, last col = rhs).

    Only columns ``< allowed`` may enter. Returns 'optimal' or 'unbounded'.
    """
    rows = T.shape[0] - 1
    stalled = 0
    bland = False
    basis_arr = np.asarray(basis)
    while True:
        d = T[-1, :allowed]
        if bland:
            neg = np.flatnonzero(d < -TOL)
            if neg.size == 0:
                return "optimal"
            j = int(neg[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -TOL:
                return "optimal"
        col = T[:rows, j]
        pos = np.flatnonzero(col > TOL)
        if pos.size == 0:
            return "unbounded"
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + TOL * (1.0 + abs(best))]
        r = int(ties[np.argmin(basis_arr[ties])])
        _pivot(T, r, j)
        basis[r] = j
        basis_arr[r] = j
        budget[0] += 1
        if budget[0] > MAX_PIVOTS:
            raise LpError("simplex pivot limit exceeded")
        if best <= TOL:
            stalled += 1
            if stalled >= BLAND_AFTER:
                bland = True
        else:
            stalled = 0


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` with a two-phase dense-tableau simplex.

    Dantzig pricing with lowest-index tie breaks; after 1000 consecutive
    degenerate pivots the phase continues under Bland's rule.
    """
    sf = _StandardForm(lp)
    M, b, c = sf.M, sf.b, sf.c
    rows, N = M.shape
    n = lp.n_vars
    budget = [0]
    empty = np.full(n, np.nan)

    # Phase 1: artificial columns only where no slack can start in the basis.
    basis = []
    art_rows = []
    for i in range(rows):
        s = sf.slack_of_row[i]
        if s >= 0 and M[i, s] > 0:
            basis.append(s)
        else:
            basis.append(N + len(art_rows))
            art_rows.append(i)
    n_art = len(art_rows)
    T = np.zeros((rows + 1, N + n_art + 1))
    T[:rows, :N] = M
    T[:rows, -1] = b
    for a, i in enumerate(art_rows):
        T[i, N + a] = 1.0
    if n_art:
        T[-1, :N + n_art] = 0.0
        T[-1, N:N + n_art] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        _run(T, basis, N + n_art, budget)
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if -T[-1, -1] > TOL * scale:
            return LpSolution(Status.INFEASIBLE, empty, np.nan, np.zeros(lp.n_rows), budget[0])
        keep = []
        for r in range(rows):
            if basis[r] < N:
                keep.append(r)
                continue
            row = np.abs(T[r, :N])
            j = int(np.argmax(row)) if N else 0
            if N and row[j] > TOL:
                _pivot(T, r, j)
                basis[r] = j
                keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        T = np.delete(T, np.s_[N:N + n_art], axis=1)
        basis = [basis[r] for r in keep]
    else:
        keep = list(range(rows))

    # Phase 2
    cb = c[basis] if basis else np.zeros(0)
    T[-1, :N] = c - cb @ T[:-1, :N]
    T[-1, -1] = -float(cb @ T[:-1, -1])
    status = _run(T, basis, N, budget)
    if status == "unbounded":
        return LpSolution(Status.UNBOUNDED, empty,
                          -np.inf if lp.sense == "min" else np.inf,
                          np.zeros(lp.n_rows), budget[0])

    y = np.zeros(N)
    y[basis] = np.maximum(T[:-1, -1], 0.0)
    x = sf.to_original(y)
    objective = float(lp.cost @ x)

    duals_std = np.zeros(rows)
    if basis:
        B = M[np.ix_(keep, basis)]
        duals_std[keep] = np.linalg.solve(B.T, c[basis])
    duals = sf.sign * sf.flip[:sf.n_orig_rows] * duals_std[:sf.n_orig_rows]
    return LpSolution(Status.OPTIMAL, x, objective, duals, budget[0])
