"""Locally envy-free bids per winning set, and the LP that turns a
nucleolus utility vector into a correlated bid profile."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .gsp import Market, allocate
from .lp import LinearProgram, solve_lp

MAX_BIDDERS = 20
MAX_SLOTS = 10
PROB_FLOOR = 1e-12


class MappingError(RuntimeError):
    pass


@dataclass(frozen=True)
class LefBidProfile:
    """LEF bids of one winning set; ``winners[j]`` occupies slot ``j``."""

    winners: tuple[int, ...]
    bids: tuple[float, ...]
    payments: tuple[float, ...]
    reserve: float

    def slot_of(self, bidder: int) -> int | None:
        try:
            return self.winners.index(bidder)
        except ValueError:
            return None

    def bid_vector(self, n: int) -> list[float]:
        """Full bid profile: winners bid their LEF bids, everybody else the reserve."""
        out = [self.reserve] * n
        for i, b in zip(self.winners, self.bids):
            out[i] = b
        return out

    def utilities(self, market: Market) -> dict[int, float]:
        return {i: market.ctr[j] * (market.valuations[i] - p)
                for j, (i, p) in enumerate(zip(self.winners, self.payments))}

    def revenue(self, market: Market) -> float:
        return sum(market.ctr[j] * p for j, p in enumerate(self.payments))


def _winning_size(market: Market, active: Sequence[int]) -> int:
    return min(market.k, len(active))


def lef_bids(market: Market, c: Iterable[int], active: Iterable[int] | None = None) -> LefBidProfile:
    """Bids for winning set ``c`` solving the adjacent-slot indifference recursion.

    Winners take slots by descending valuation (ties to the lower id). The
    first non-winner bids the reserve; slot ``j`` is priced so its winner is
    indifferent to moving up one slot. The top winner bids its valuation.
    """
    ids = market.bidders(active)
    c = tuple(c)
    need = _winning_size(market, ids)
    if len(c) != need or len(set(c)) != len(c):
        raise ValueError(f"winning set must hold {need} distinct bidders, got {c}")
    if not set(c) <= set(ids):
        raise ValueError(f"winning set {c} contains inactive bidders")
    vals = market.valuations
    ctr = market.ctr
    order = tuple(sorted(c, key=lambda i: (-vals[i], i)))
    k = len(order)
    bids = [0.0] * (k + 1)
    bids[k] = market.reserve
    for j in range(k - 1, 0, -1):
        v = vals[order[j]]
        bids[j] = v - ctr[j] / ctr[j - 1] * (v - bids[j + 1])
    bids[0] = vals[order[0]]
    return LefBidProfile(order, tuple(bids[:k]), tuple(bids[1:]), market.reserve)


@dataclass(frozen=True)
class ProfileEntry:
    winners: tuple[int, ...]  # slot order
    probability: float
    lef: LefBidProfile

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(sorted(self.winners))


@dataclass(frozen=True)
class CorrelatedBidProfile:
    active: tuple[int, ...]
    entries: tuple[ProfileEntry, ...]
    expected_utility: tuple[float, ...]  # per market bidder
    expected_revenue: float

    def sample(self, u: float) -> ProfileEntry:
        """Entry selected by a uniform draw ``u`` in [0, 1)."""
        acc = 0.0
        for e in self.entries:
            acc += e.probability
            if u < acc:
                return e
        return self.entries[-1]


@dataclass(frozen=True)
class MappingResult:
    profile: CorrelatedBidProfile
    x: tuple[float, ...]          # target utilities, auctioneer first
    residuals: tuple[float, ...]  # |expected - target|, auctioneer first
    objective: float


class MappingProgram(NamedTuple):
    lp: LinearProgram
    candidates: list[LefBidProfile]
    offset: float  # constant part of the objective
    active: tuple[int, ...]


def build_mapping_lp(market: Market, x: Sequence[float], active: Iterable[int] | None = None,
                     weighting: bool = True) -> MappingProgram:
    """Variables: one probability per candidate winning set, then one
    residual per player (auctioneer first). Rows: two absolute-value rows
    per bidder, two for revenue, and the normalisation row."""
    ids = market.bidders(active)
    x = np.asarray(x, dtype=float)
    if x.shape != (len(ids) + 1,):
        raise ValueError(f"utility vector has {x.size} entries, expected {len(ids) + 1}")
    if len(ids) > MAX_BIDDERS or market.k > MAX_SLOTS:
        raise ValueError("candidate enumeration limited to n <= 20 and k <= 10")
    size = _winning_size(market, ids)
    candidates = [lef_bids(market, c, ids) for c in itertools.combinations(ids, size)]
    S = len(candidates)
    m = len(ids)
    pos = {i: p for p, i in enumerate(ids)}
    U = np.zeros((m, S))   # bidder utility per candidate
    R = np.zeros(S)        # revenue per candidate
    for s, cand in enumerate(candidates):
        for i, u in cand.utilities(market).items():
            U[pos[i], s] = u
        R[s] = cand.revenue(market)

    vals = np.array([market.valuations[i] for i in ids])
    cost = np.concatenate([np.zeros(S), np.ones(m + 1)])
    offset = 0.0
    if weighting:
        cost[:S] -= vals @ U
        offset = float(vals @ x[1:])

    rows = []
    rhs = []
    nv = S + m + 1
    for p in range(m):
        zcol = S + 1 + p
        r = np.zeros(nv)
        r[:S] = -U[p]
        r[zcol] = 1.0
        rows.append(r)
        rhs.append(-x[p + 1])
        r = np.zeros(nv)
        r[:S] = U[p]
        r[zcol] = 1.0
        rows.append(r)
        rhs.append(x[p + 1])
    r = np.zeros(nv)
    r[:S] = -R
    r[S] = 1.0
    rows.append(r)
    rhs.append(-x[0])
    r = np.zeros(nv)
    r[:S] = R
    r[S] = 1.0
    rows.append(r)
    rhs.append(x[0])
    r = np.zeros(nv)
    r[:S] = 1.0
    rows.append(r)
    rhs.append(1.0)
    rels = (">=",) * (2 * m + 2) + ("=",)
    bounds = ((0.0, np.inf),) * S + ((-np.inf, np.inf),) * (m + 1)
    lp = LinearProgram(cost, np.array(rows), rels, rhs, bounds=bounds)
    return MappingProgram(lp, candidates, offset, ids)


def _profile(market: Market, ids: tuple[int, ...], chosen: list[tuple[LefBidProfile, float]]) -> CorrelatedBidProfile:
    entries = sorted((ProfileEntry(l.winners, p, l) for l, p in chosen),
                     key=lambda e: (-e.probability, e.members))
    eu = [0.0] * market.n
    er = 0.0
    for e in entries:
        for i, u in e.lef.utilities(market).items():
            eu[i] += e.probability * u
        er += e.probability * e.lef.revenue(market)
    return CorrelatedBidProfile(ids, tuple(entries), tuple(eu), er)


def map_to_correlated(market: Market, x: Sequence[float], active: Iterable[int] | None = None,
                      weighting: bool = True) -> MappingResult:
    prog = build_mapping_lp(market, x, active, weighting)
    sol = solve_lp(prog.lp)
    if not sol.optimal:
        raise MappingError(f"mapping LP returned {sol.status.value}")
    S = len(prog.candidates)
    p = np.where(sol.primal[:S] < PROB_FLOOR, 0.0, sol.primal[:S])
    p = p / p.sum()
    chosen = [(prog.candidates[s], float(p[s])) for s in np.flatnonzero(p)]
    profile = _profile(market, prog.active, chosen)
    x = np.asarray(x, dtype=float)
    got = np.array([profile.expected_revenue] + [profile.expected_utility[i] for i in prog.active])
    resid = np.abs(got - x)
    objective = float(resid.sum())
    if weighting:
        objective += float(np.dot([market.valuations[i] for i in prog.active], x[1:] - got[1:]))
    return MappingResult(profile, tuple(float(v) for v in x), tuple(float(v) for v in resid), objective)


def point_mass(market: Market, winners: Iterable[int], active: Iterable[int] | None = None) -> CorrelatedBidProfile:
    """Profile putting all probability on one winning set."""
    ids = market.bidders(active)
    return _profile(market, ids, [(lef_bids(market, winners, ids), 1.0)])


def entry_priority(entry: ProfileEntry, active: Sequence[int]) -> list[int]:
    """GSP tie-break order that keeps the recommended winners in their slots."""
    rest = [i for i in active if i not in entry.winners]
    return list(entry.winners) + rest


@dataclass(frozen=True)
class EntryDeviation:
    winners: tuple[int, ...]
    probability: float
    gains: dict[int, float]   # best unilateral gain per active bidder

    @property
    def max_gain(self) -> float:
        return max(self.gains.values())


@dataclass(frozen=True)
class EquilibriumReport:
    entries: tuple[EntryDeviation, ...]

    @property
    def max_gain(self) -> float:
        return max(e.max_gain for e in self.entries)

    @property
    def expected_gain(self) -> float:
        return sum(e.probability * e.max_gain for e in self.entries)


def equilibrium_report(market: Market, profile: CorrelatedBidProfile, grid: int = 101) -> EquilibriumReport:
    """Best unilateral deviation gain per entry, scanning a uniform bid grid.

    This is a numeric diagnostic: a positive gain means the recommended bid
    vector of that entry is not a Nash equilibrium of the one-shot GSP.
    """
    if grid < 10:
        raise ValueError("grid must have at least 10 points")
    active = profile.active
    out = []
    for e in profile.entries:
        base = e.lef.bid_vector(market.n)
        prio = entry_priority(e, active)
        u0 = allocate(market, base, active, prio).utility
        gains = {}
        for i in active:
            best = -np.inf
            bids = list(base)
            for b in np.linspace(0.0, market.valuations[i], grid):
                bids[i] = float(b)
                best = max(best, allocate(market, bids, active, prio).utility[i])
            gains[i] = best - u0[i]
        out.append(EntryDeviation(e.winners, e.probability, gains))
    return EquilibriumReport(tuple(out))


def n_candidates(n_active: int, k: int) -> int:
    return comb(n_active, min(k, n_active))
