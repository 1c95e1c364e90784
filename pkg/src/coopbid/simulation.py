"""Repeated keyword auctions with discounted-history drop-outs.

Randomness
----------
Everything derives from ``master_seed`` through ``numpy.random.SeedSequence``
with a spawn key naming the stream:

* ``(seed_index, 0)`` draws the bidders' valuations for that seed (shared
  by every mechanism, so comparisons are paired);
* ``(seed_index, 1 + mechanism_index)`` drives the rounds of one mechanism.
  Round ``r`` consumes exactly ``2n + 1`` uniforms from it, in the order
  ``[entry, click_0..click_{n-1}, stay_0..stay_{n-1}]``, whether or not a
  given draw ends up being used.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .bargaining import build_game
from .gsp import Market, allocate, geometric_ctr
from .lef import CorrelatedBidProfile, MappingResult, entry_priority, map_to_correlated
from .nucleolus import compute_nucleolus

MECHANISMS = ("gsp-truthful", "coop-optimizer")
OUTCOMES = ("click-sampled", "slot-allocated")


class SimulationTerminated(Exception):
    """No active bidders remain."""


def engagement_cap(gamma: float) -> float:
    return gamma / (1.0 - gamma)


@dataclass(frozen=True)
class BidderState:
    """``num`` is the discounted click history sum_{i>=1} gamma^i x_{-i}."""

    id: int
    valuation: float
    gamma: float
    num: float
    active: bool = True

    @classmethod
    def fresh(cls, id: int, valuation: float, gamma: float) -> "BidderState":
        # Pre-history counts as all clicks, so nobody leaves before round 1.
        return cls(id, valuation, gamma, engagement_cap(gamma))


def participation_probability(state: BidderState) -> float:
    """Probability that the bidder stays for the next round."""
    return min(1.0, max(0.0, state.num / engagement_cap(state.gamma)))


# Name kept for callers that think of it as the drop-out model.
dropout_probability = participation_probability


def record_outcome(state: BidderState, clicked: int) -> BidderState:
    """Shift the history one round back and insert ``clicked`` as the newest outcome."""
    return dataclasses.replace(state, num=state.gamma * (int(clicked) + state.num))


@dataclass(frozen=True)
class SimulationConfig:
    n: int = 10
    k: int = 5
    ctr: tuple[float, ...] | None = None  # default 0.9 * 0.8**j
    reserve: float = 0.0
    valuations: tuple[float, ...] | None = None  # fixed; overrides the generator
    base_value: float = 10.0
    spread: float = 0.1
    gamma: float | tuple[float, ...] = 0.95
    rounds: int = 500
    seeds: int = 200
    master_seed: int = 0
    mechanisms: tuple[str, ...] = MECHANISMS
    outcome: str = "click-sampled"
    dropout: bool = True
    weighting: bool = True

    def __post_init__(self):
        if self.k >= self.n:
            raise ValueError("k < n required")
        if self.k < 1:
            raise ValueError("k >= 1 required")
        if self.ctr is not None and len(self.ctr) != self.k:
            raise ValueError(f"ctr must have k={self.k} entries")
        if self.valuations is not None and len(self.valuations) != self.n:
            raise ValueError(f"valuations must have n={self.n} entries")
        if self.rounds < 1:
            raise ValueError("rounds >= 1 required")
        if self.seeds < 1:
            raise ValueError("seeds >= 1 required")
        if self.spread < 0 or self.spread > 1:
            raise ValueError("spread must lie in [0, 1]")
        if self.base_value < 0:
            raise ValueError("base_value must be >= 0")
        gammas = self.gammas()
        if len(gammas) != self.n or any(not 0.0 < g < 1.0 for g in gammas):
            raise ValueError("gamma must lie in the open interval (0, 1), one value or n values")
        bad = [m for m in self.mechanisms if m not in MECHANISMS]
        if bad or not self.mechanisms:
            raise ValueError(f"unknown mechanism(s) {bad}; choose from {MECHANISMS}")
        object.__setattr__(self, "mechanisms", tuple(sorted(set(self.mechanisms))))
        if isinstance(self.gamma, (list, tuple)):
            object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        for name in ("ctr", "valuations"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be >= 0")
        self.template()  # validates ctr / reserve

    def gammas(self) -> tuple[float, ...]:
        if isinstance(self.gamma, (int, float)):
            return (float(self.gamma),) * self.n
        return tuple(float(g) for g in self.gamma)

    def ctr_values(self) -> tuple[float, ...]:
        return tuple(self.ctr) if self.ctr is not None else geometric_ctr(self.k)

    def template(self) -> Market:
        vals = self.valuations or (max(self.base_value, self.reserve),) * self.n
        return Market(tuple(vals), self.ctr_values(), self.reserve)

    def digest(self) -> str:
        blob = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def market_for_seed(self, seed_index: int) -> Market:
        if self.valuations is not None:
            vals = self.valuations
        else:
            rng = np.random.default_rng(_seed_seq(self.master_seed, seed_index, 0))
            lo = self.base_value * (1.0 - self.spread)
            hi = self.base_value * (1.0 + self.spread)
            vals = tuple(float(v) for v in np.maximum(rng.uniform(lo, hi, self.n), self.reserve))
        return Market(tuple(vals), self.ctr_values(), self.reserve)

    def round_rng(self, seed_index: int, mechanism: str) -> np.random.Generator:
        return np.random.default_rng(
            _seed_seq(self.master_seed, seed_index, 1 + MECHANISMS.index(mechanism)))


def _seed_seq(master: int, seed_index: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=(seed_index, stream))


class OptimizerCache:
    """Memoises nucleoli per (market, active set) and profiles per weighting."""

    def __init__(self):
        self.nucleoli: dict = {}
        self.mappings: dict = {}

    def mapping(self, market: Market, active: tuple[int, ...], weighting: bool) -> MappingResult:
        key = (market, active, weighting)
        hit = self.mappings.get(key)
        if hit is None:
            x = self.nucleoli.get((market, active))
            if x is None:
                x = compute_nucleolus(build_game(market, active))
                self.nucleoli[(market, active)] = x
            hit = map_to_correlated(market, x, active, weighting)
            self.mappings[key] = hit
        return hit


@dataclass(frozen=True)
class RoundRecord:
    round: int
    revenue: float
    cumulative_revenue: float
    active_count: int
    clicks: tuple[int, ...]


@dataclass
class SimulationWorld:
    market: Market
    mechanism: str
    outcome: str = "click-sampled"
    gamma: np.ndarray = None
    num: np.ndarray = None
    active: np.ndarray = None
    dropout: bool = True
    weighting: bool = True
    cache: OptimizerCache = field(default_factory=OptimizerCache)
    round: int = 0
    cumulative_revenue: float = 0.0
    recomputations: int = 0
    _profile_key: tuple | None = None
    _profile: CorrelatedBidProfile | None = None

    def __post_init__(self):
        n = self.market.n
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome definition {self.outcome!r}")
        g = np.full(n, 0.95) if self.gamma is None else np.broadcast_to(
            np.asarray(self.gamma, dtype=float), (n,)).copy()
        self.gamma = g
        self.cap = g / (1.0 - g)
        if self.num is None:
            self.num = self.cap.copy()
        if self.active is None:
            self.active = np.ones(n, dtype=bool)

    @classmethod
    def from_config(cls, config: SimulationConfig, market: Market, mechanism: str,
                    cache: OptimizerCache | None = None) -> "SimulationWorld":
        return cls(market, mechanism, config.outcome, np.array(config.gammas()),
                   dropout=config.dropout, weighting=config.weighting,
                   cache=cache if cache is not None else OptimizerCache())

    def active_ids(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.active))

    def states(self) -> list[BidderState]:
        return [BidderState(i, self.market.valuations[i], float(self.gamma[i]),
                            float(self.num[i]), bool(self.active[i]))
                for i in range(self.market.n)]

    def profile(self) -> CorrelatedBidProfile:
        """Correlated profile for the current active set (recomputed on change only)."""
        ids = self.active_ids()
        if ids != self._profile_key:
            self._profile = self.cache.mapping(self.market, ids, self.weighting).profile
            self._profile_key = ids
            self.recomputations += 1
        return self._profile


def run_round(world: SimulationWorld, rng: np.random.Generator) -> tuple[SimulationWorld, RoundRecord]:
    """Advance ``world`` (in place) by one auction."""
    market = world.market
    n = market.n
    draws = rng.random(2 * n + 1)
    ids = world.active_ids()
    if not ids:
        raise SimulationTerminated("no active bidders")

    if world.mechanism == "gsp-truthful":
        out = allocate(market, market.valuations, ids)
    else:
        entry = world.profile().sample(draws[0])
        out = allocate(market, entry.lef.bid_vector(n), ids, entry_priority(entry, ids))

    clicks = np.zeros(n)
    ctr = market.ctr
    sampled = world.outcome == "click-sampled"
    for j, i in enumerate(out.slot_winner):
        clicks[i] = float(draws[1 + i] < ctr[j]) if sampled else 1.0
    act = world.active
    world.num = np.where(act, world.gamma * (clicks + world.num), world.num)
    if world.dropout:
        stay = draws[1 + n:] < np.minimum(world.num / world.cap, 1.0)
        world.active = act & stay
    world.round += 1
    world.cumulative_revenue += out.revenue
    record = RoundRecord(world.round, out.revenue, world.cumulative_revenue,
                         int(world.active.sum()), tuple(int(c) for c in clicks))
    return world, record


class MetricsRow(NamedTuple):
    round: int
    mechanism: str
    mean_cum_revenue: float
    mean_active_bidders: float
    mean_round_revenue: float


@dataclass(frozen=True)
class MetricsTable:
    rows: tuple[MetricsRow, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: (r.mechanism, r.round)))
        seen = {(r.mechanism, r.round) for r in rows}
        if len(seen) != len(rows):
            raise ValueError("duplicate (mechanism, round) rows")
        object.__setattr__(self, "rows", rows)

    def series(self, mechanism: str, column: str) -> np.ndarray:
        return np.array([getattr(r, column) for r in self.rows if r.mechanism == mechanism])

    @property
    def mechanisms(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.mechanism for r in self.rows))


def run_seed(config: SimulationConfig, seed_index: int, mechanism: str,
             cache: OptimizerCache | None = None) -> np.ndarray:
    """Per-round (revenue, cumulative revenue, active count) for one seed."""
    market = config.market_for_seed(seed_index)
    world = SimulationWorld.from_config(config, market, mechanism, cache)
    rng = config.round_rng(seed_index, mechanism)
    out = np.zeros((config.rounds, 3))
    for t in range(config.rounds):
        try:
            world, rec = run_round(world, rng)
        except SimulationTerminated:
            out[t:, 1] = world.cumulative_revenue
            break
        out[t] = (rec.revenue, rec.cumulative_revenue, rec.active_count)
    return out


def run_simulation(config: SimulationConfig, cache: OptimizerCache | None = None,
                   per_seed: list | None = None) -> MetricsTable:
    """Average per-round metrics across seeds for every configured mechanism.

    ``per_seed``, when given, receives ``(seed, mechanism, array)`` tuples.
    """
    totals = {m: np.zeros((config.rounds, 3)) for m in config.mechanisms}
    for s in range(config.seeds):
        seed_cache = cache if cache is not None else OptimizerCache()
        for mech in config.mechanisms:
            arr = run_seed(config, s, mech, seed_cache)
            totals[mech] += arr
            if per_seed is not None:
                per_seed.append((s, mech, arr))
    rows = []
    for mech, tot in totals.items():
        mean = tot / config.seeds
        for t in range(config.rounds):
            rows.append(MetricsRow(t + 1, mech, float(mean[t, 1]), float(mean[t, 2]), float(mean[t, 0])))
    meta = {"config_digest": config.digest(), "seeds": config.seeds}
    return MetricsTable(tuple(rows), meta)
