"""Generalized second price auction for one keyword and one round."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

BID_TOL = 1e-12


class BidOutOfRange(ValueError):
    """A bid lies outside the bidder's strategy set [0, valuation]."""


def geometric_ctr(k: int, top: float = 0.9, decay: float = 0.8) -> tuple[float, ...]:
    return tuple(top * decay ** j for j in range(k))


@dataclass(frozen=True)
class Market:
    """Keyword auction instance.

    Bidder ids are 0-based positions in ``valuations``; in coalition
    bitmasks bidder ``i`` is player ``i + 1`` (player 0 is the auctioneer).
    """

    valuations: tuple[float, ...]
    ctr: tuple[float, ...]
    reserve: float = 0.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.valuations)
        ctr = tuple(float(b) for b in self.ctr)
        object.__setattr__(self, "valuations", vals)
        object.__setattr__(self, "ctr", ctr)
        object.__setattr__(self, "reserve", float(self.reserve))
        if not ctr:
            raise ValueError("at least one slot required")
        if len(ctr) >= len(vals):
            raise ValueError(f"k < n required (k={len(ctr)}, n={len(vals)})")
        if any(not 0.0 < b <= 1.0 for b in ctr):
            raise ValueError("click-through rates must lie in (0, 1]")
        if any(a < b for a, b in zip(ctr, ctr[1:])):
            raise ValueError("click-through rates must be non-increasing")
        if self.reserve < 0:
            raise ValueError("reserve must be >= 0")
        if any(v < self.reserve for v in vals):
            raise ValueError("every valuation must be >= reserve")

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def k(self) -> int:
        return len(self.ctr)

    def bidders(self, active: Iterable[int] | None = None) -> tuple[int, ...]:
        if active is None:
            return tuple(range(self.n))
        ids = tuple(sorted(set(int(i) for i in active)))
        if ids and (ids[0] < 0 or ids[-1] >= self.n):
            raise ValueError(f"bidder ids out of range: {ids}")
        return ids


@dataclass(frozen=True)
class AllocationOutcome:
    slot_winner: tuple[int, ...]   # occupied slots only, top slot first
    payment_per_click: tuple[float, ...]
    revenue: float
    utility: tuple[float, ...]     # one per bidder, 0 for losers


def allocate(market: Market, bids: Sequence[float],
             active: Iterable[int] | None = None,
             priority: Sequence[int] | None = None) -> AllocationOutcome:
    """Run GSP on ``bids``.

    Ties are broken by ``priority`` (earlier listed wins) when given,
    otherwise by lower bidder id. Bids below the reserve are not eligible.
    The lowest occupied slot pays the highest losing eligible bid, or the
    reserve when nobody is left over. Unfilled slots are charged to nobody.
    """
    n = market.n
    if len(bids) != n:
        raise ValueError(f"expected {n} bids, got {len(bids)}")
    vals = market.valuations
    for i, b in enumerate(bids):
        if b < -BID_TOL or b > vals[i] + BID_TOL:
            raise BidOutOfRange(f"bid {b} of bidder {i} outside [0, {vals[i]}]")
    ids = market.bidders(active)
    if priority is None:
        rank = {i: i for i in ids}
    else:
        rank = {i: r for r, i in enumerate(priority)}
        rank = {i: rank.get(i, n + i) for i in ids}
    reserve = market.reserve
    eligible = [i for i in ids if bids[i] >= reserve]
    eligible.sort(key=lambda i: (-bids[i], rank[i]))
    ctr = market.ctr
    k = market.k
    winners = eligible[:k]
    payments = []
    for j in range(len(winners)):
        nxt = bids[eligible[j + 1]] if j + 1 < len(eligible) else reserve
        payments.append(max(float(nxt), reserve))
    utility = [0.0] * n
    revenue = 0.0
    for j, (i, p) in enumerate(zip(winners, payments)):
        utility[i] = ctr[j] * (vals[i] - p)
        revenue += ctr[j] * p
    return AllocationOutcome(tuple(winners), tuple(payments), revenue, tuple(utility))


def truthful_revenue(market: Market, active: Iterable[int] | None = None) -> float:
    """Revenue when every participating bidder bids its valuation."""
    ids = market.bidders(active)
    return allocate(market, market.valuations, active=ids).revenue
