"""Nash bargaining between the auctioneer and an aggregated bidder.

Coalitions are integer bitmasks over players ``0..n``; bit 0 is the
auctioneer and bit ``i + 1`` is bidder ``i`` of the market.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .gsp import Market

MAX_BIDDERS = 20
AUCTIONEER = 1


class GameTooLarge(ValueError):
    pass


def members(mask: int) -> list[int]:
    """Player ids contained in ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(players: Iterable[int]) -> int:
    m = 0
    for p in players:
        m |= 1 << int(p)
    return m


class SurplusStats(NamedTuple):
    ua_max: float       # auctioneer revenue when everybody bids truthfully
    ub_truthful: float  # aggregated bidder utility at that profile
    ub_max: float       # efficient welfare at zero prices


@dataclass(frozen=True)
class BargainingPoint:
    ua_star: float
    ub_star: float
    ua_max: float
    ub_max: float
    ub_truthful: float

    @property
    def total(self) -> float:
        return self.ua_star + self.ub_star


def _stats_sorted(vals: Sequence[float], ctr: Sequence[float], reserve: float) -> SurplusStats:
    # vals sorted descending
    slots = min(len(ctr), len(vals))
    ua = ub_t = ub = 0.0
    for j in range(slots):
        below = vals[j + 1] if j + 1 < len(vals) else reserve
        ua += ctr[j] * below
        ub_t += ctr[j] * (vals[j] - below)
        ub += ctr[j] * vals[j]
    return SurplusStats(ua, ub_t, ub)


def coalition_surplus_stats(market: Market, c: int) -> SurplusStats:
    """Truthful revenue, truthful bidder surplus and zero-price welfare of ``c``."""
    if not c & AUCTIONEER:
        raise ValueError("coalition must contain the auctioneer (player 0)")
    ids = [p - 1 for p in members(c >> 1 << 1)]
    if ids and ids[-1] >= market.n:
        raise ValueError(f"coalition {c:#b} names players beyond n={market.n}")
    vals = sorted((market.valuations[i] for i in ids), reverse=True)
    return _stats_sorted(vals, market.ctr, market.reserve)


def nbs_solve(stats: SurplusStats) -> BargainingPoint:
    """Nash bargaining solution on the segment from (0, ub_max) to (ua_max, ub_truthful).

    The disagreement point is (0, 0). The product U_A * U_B along the
    segment peaks at U_A = ub_max / 2 unless the segment ends first.
    """
    ua_max, ub_truthful, ub_max = stats
    if ua_max <= ub_max / 2:
        ua, ub = ua_max, ub_truthful
    else:
        ua = ub = ub_max / 2
    return BargainingPoint(ua, ub, ua_max, ub_max, ub_truthful)


def characteristic_value(market: Market, c: int) -> float:
    if not c & AUCTIONEER:
        return 0.0
    return nbs_solve(coalition_surplus_stats(market, c)).total


@dataclass(frozen=True, eq=False)
class CharacteristicGame:
    """Coalition values ``values[mask]`` over ``n_players`` players.

    ``bidders[p - 1]`` is the market bidder id behind player ``p`` when the
    game was built from a market.
    """

    n_players: int
    values: np.ndarray
    bidders: tuple[int, ...] | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (1 << self.n_players,):
            raise ValueError(f"expected {1 << self.n_players} coalition values")
        if vals[0] != 0.0:
            raise ValueError("empty coalition must have value 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grand(self) -> int:
        return (1 << self.n_players) - 1

    def value(self, mask: int) -> float:
        return float(self.values[mask])

    def items(self):
        for mask in range(1 << self.n_players):
            yield mask, float(self.values[mask])

    @classmethod
    def from_mapping(cls, n_players: int, values: Mapping[frozenset | tuple, float]) -> "CharacteristicGame":
        """Build from ``{players: value}``; unlisted coalitions are worth 0."""
        arr = np.zeros(1 << n_players)
        for players, v in values.items():
            m = mask_of(players)
            if m >> n_players:
                raise ValueError(f"coalition {tuple(players)} out of range")
            arr[m] = v
        return cls(n_players, arr)

    @classmethod
    def additive(cls, weights: Sequence[float]) -> "CharacteristicGame":
        w = np.asarray(weights, dtype=float)
        m = w.size
        masks = np.arange(1 << m)
        bits = (masks[:, None] >> np.arange(m)) & 1
        return cls(m, bits @ w)


def build_game(market: Market, active: Iterable[int] | None = None) -> CharacteristicGame:
    """Characteristic game over the auctioneer and the ``active`` bidders."""
    ids = market.bidders(active)
    if len(ids) > MAX_BIDDERS:
        raise GameTooLarge(f"{len(ids)} bidders exceeds the enumeration limit of {MAX_BIDDERS}")
    m = len(ids) + 1
    vals = np.array([market.valuations[i] for i in ids])
    values = np.zeros(1 << m)
    ctr, reserve = market.ctr, market.reserve
    for sub in range(1 << len(ids)):
        chosen = [vals[p] for p in range(len(ids)) if sub >> p & 1]
        chosen.sort(reverse=True)
        values[(sub << 1) | AUCTIONEER] = nbs_solve(_stats_sorted(chosen, ctr, reserve)).total
    return CharacteristicGame(m, values, ids)
