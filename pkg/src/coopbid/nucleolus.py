"""Nucleolus of a characteristic form game.

The staged scheme lowers the largest unfixed excess one level at a time.
Each stage LP has one row per coalition but only ``n_players + 1``
variables, so it is solved through its dual, whose tableau has
``n_players + 1`` rows; the stage allocation is read off the dual
multipliers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bargaining import CharacteristicGame
from .lp import LinearProgram, solve_lp

TIGHT_TOL = 1e-7
SUPPORT_TOL = 1e-9
SPAN_TOL = 1e-9
ORACLE_MAX_PLAYERS = 4


class NucleolusError(RuntimeError):
    def __init__(self, message: str, stages: list | None = None):
        super().__init__(message)
        self.stages = stages or []


class OracleTooLarge(ValueError):
    pass


@dataclass
class StageInfo:
    epsilon: float
    fixed: list[int] = field(default_factory=list)
    aux_solves: int = 0


def _coalition_bits(m: int) -> tuple[np.ndarray, np.ndarray]:
    masks = np.arange(1, (1 << m) - 1)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(float)
    return masks, bits


def _min_free(c, G, h, E, f):
    """min c.u s.t. G u >= h, E u = f with u free; returns (u, y_G)."""
    ny = G.shape[0]
    nw = E.shape[0]
    A = np.hstack([G.T, E.T])
    bounds = ((0.0, np.inf),) * ny + ((-np.inf, np.inf),) * nw
    dual = LinearProgram(np.concatenate([h, f]), A, ("=",) * len(c), c,
                         bounds=bounds, sense="max")
    sol = solve_lp(dual)
    if not sol.optimal:
        raise NucleolusError(f"stage LP dual returned {sol.status.value}")
    return sol.duals, sol.primal[:ny]


def _residual(rows: np.ndarray, Q: np.ndarray) -> np.ndarray:
    if Q.shape[1] == 0:
        return np.linalg.norm(rows, axis=1)
    return np.linalg.norm(rows - (rows @ Q) @ Q.T, axis=1)


def _orthobasis(E: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(E.T)
    return q


def compute_nucleolus(game: CharacteristicGame, return_stages: bool = False):
    """Nucleolus by the iterated LP scheme.

    A coalition is fixed after a stage only if its slack is zero on the
    whole optimal face: positive dual weight proves this outright, positive
    slack at the found optimum disproves it. The undecided rest are settled
    in batches: one auxiliary LP maximises their total slack over the face;
    a zero optimum fixes the whole batch, otherwise the loose ones leave it.
    """
    m = game.n_players
    if m < 2:
        raise ValueError("nucleolus needs at least two players")
    masks, bits = _coalition_bits(m)
    nu = game.values[masks]
    scale = 1.0 + float(np.abs(game.values).max())
    relax = SUPPORT_TOL * scale

    E_rows = [np.ones(m)]
    f_vals = [game.value(game.grand)]
    Q = _orthobasis(np.array(E_rows))
    unfixed = np.ones(len(masks), dtype=bool)
    stages: list[StageInfo] = []

    while len(E_rows) < m:
        if len(stages) >= m:
            raise NucleolusError(f"no convergence after {len(stages)} stages", stages)
        idx = np.flatnonzero(unfixed)
        dep = _residual(bits[idx], Q) <= SPAN_TOL
        unfixed[idx[dep]] = False
        idx = idx[~dep]
        if idx.size == 0:
            raise NucleolusError("coalition rows exhausted before x was pinned", stages)
        E = np.array(E_rows)
        f = np.array(f_vals)
        G = np.hstack([bits[idx], np.ones((idx.size, 1))])
        c = np.zeros(m + 1)
        c[-1] = 1.0
        u, y = _min_free(c, G, nu[idx], np.hstack([E, np.zeros((E.shape[0], 1))]), f)
        x, eps = u[:m], float(u[m])
        info = StageInfo(eps)
        stages.append(info)

        slack = bits[idx] @ x + eps - nu[idx]
        tight = slack <= TIGHT_TOL * scale
        fixed = tight & (y > SUPPORT_TOL)
        undecided = tight & ~fixed
        h_aux = nu[idx] - eps - relax
        while undecided.any():
            # Maximise the total slack of the undecided coalitions over the
            # optimal face. Zero total means each of them is tight everywhere.
            xa, _ = _min_free(-bits[idx[undecided]].sum(axis=0), bits[idx], h_aux, E, f)
            info.aux_solves += 1
            loose = (bits[idx] @ xa + eps - nu[idx]) > TIGHT_TOL * scale
            if not (loose & undecided).any():
                fixed |= undecided
                break
            undecided &= ~loose

        added = False
        for a in np.flatnonzero(fixed):
            row = bits[idx[a]]
            unfixed[idx[a]] = False
            info.fixed.append(int(masks[idx[a]]))
            if _residual(row[None, :], Q)[0] > SPAN_TOL:
                E_rows.append(row)
                f_vals.append(nu[idx[a]] - eps)
                Q = _orthobasis(np.array(E_rows))
                added = True
        if not added:
            raise NucleolusError(f"stage {len(stages)} fixed no new independent coalition", stages)

    x = np.linalg.solve(np.array(E_rows), np.array(f_vals)) + 0.0  # no -0.0
    return (x, stages) if return_stages else x


def excess_vector(game: CharacteristicGame, x: np.ndarray) -> np.ndarray:
    """Excesses of all proper nonempty coalitions, in mask order."""
    masks, bits = _coalition_bits(game.n_players)
    return game.values[masks] - bits @ np.asarray(x, dtype=float)


def core_check(game: CharacteristicGame, x) -> float:
    """Largest excess over all nonempty coalitions (<= 0 means x is in the core)."""
    m = game.n_players
    masks = np.arange(1, 1 << m)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(float)
    return float((game.values[masks] - bits @ np.asarray(x, dtype=float)).max())


def brute_force_nucleolus(game: CharacteristicGame, tol: float = 1e-9) -> np.ndarray:
    """Nucleolus by enumeration, for at most four players.

    At the nucleolus the coalitions split into levels of equal excess, and
    the equal-excess equations together with efficiency determine x. So x
    is among the solutions of efficiency plus ``m - 1`` independent
    equations ``e(C) = e(D)``; every such candidate is enumerated and the
    one with the lexicographically smallest descending excess vector wins.
    """
    m = game.n_players
    if m > ORACLE_MAX_PLAYERS:
        raise OracleTooLarge(f"brute-force oracle supports at most {ORACLE_MAX_PLAYERS} players")
    if m < 2:
        raise ValueError("nucleolus needs at least two players")
    masks, bits = _coalition_bits(m)
    nu = game.values[masks]
    # e(C) = e(D)  <=>  (1_D - 1_C) . x = nu(D) - nu(C)
    pairs = list(itertools.combinations(range(len(masks)), 2))
    P = np.array([bits[d] - bits[c] for c, d in pairs])
    q = np.array([nu[d] - nu[c] for c, d in pairs])
    keep = np.linalg.norm(P, axis=1) > 0
    Pq = np.unique(np.column_stack([P[keep], q[keep]]), axis=0)
    P, q = Pq[:, :m], Pq[:, m]
    combos = np.array(list(itertools.combinations(range(len(P)), m - 1)))
    A = np.empty((len(combos), m, m))
    b = np.empty((len(combos), m))
    A[:, 0, :] = 1.0
    b[:, 0] = game.value(game.grand)
    A[:, 1:, :] = P[combos]
    b[:, 1:] = q[combos]
    ok = np.abs(np.linalg.det(A)) > 1e-9
    X = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    X = np.unique(np.round(X, 10), axis=0)
    ex = -np.sort(-(nu[None, :] - X @ bits.T), axis=1)
    alive = np.arange(len(X))
    for col in range(ex.shape[1]):
        vals = ex[alive, col]
        alive = alive[vals <= vals.min() + tol]
        if alive.size == 1:
            break
    return X[alive[0]]
