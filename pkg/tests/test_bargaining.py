import itertools

import numpy as np
import pytest

from coopbid.bargaining import (
    CharacteristicGame, GameTooLarge, SurplusStats, build_game, characteristic_value,
    coalition_surplus_stats, mask_of, members, nbs_solve,
)
from coopbid.gsp import Market
from oracles import efficient_welfare


def test_members_and_mask_roundtrip():
    assert members(0b1011) == [0, 1, 3]
    assert mask_of([0, 1, 3]) == 0b1011


def test_stats_single_slot():
    m = Market((10, 6, 1), (1.0,))
    assert coalition_surplus_stats(m, mask_of([0, 1, 2])) == (6, 4, 10)


def test_stats_reserve_backstop():
    m = Market((10, 6, 1), (1.0, 0.5))
    assert coalition_surplus_stats(m, mask_of([0, 1, 2])) == (6, 7, 13)


def test_stats_auctioneer_alone():
    m = Market((10, 6, 1), (1.0,))
    assert coalition_surplus_stats(m, mask_of([0])) == (0, 0, 0)


def test_stats_require_auctioneer():
    m = Market((10, 6, 1), (1.0,))
    with pytest.raises(ValueError):
        coalition_surplus_stats(m, mask_of([1, 2]))


@pytest.mark.parametrize("stats,expected", [
    ((6, 4, 10), (5, 5)),
    ((4, 6, 10), (4, 6)),
    ((5, 5, 10), (5, 5)),
])
def test_nbs_closed_form(stats, expected):
    pt = nbs_solve(SurplusStats(*stats))
    assert (pt.ua_star, pt.ub_star) == expected


def test_characteristic_values():
    m = Market((10, 6, 1), (1.0,))
    assert characteristic_value(m, mask_of([1, 2])) == 0
    assert characteristic_value(m, mask_of([0, 1, 2])) == 10
    assert characteristic_value(m, mask_of([0])) == 0


def test_build_game_two_bidders():
    game = build_game(Market((10, 6), (1.0,)))
    expected = {(): 0, (0,): 0, (1,): 0, (2,): 0, (1, 2): 0,
                (0, 1): 10, (0, 2): 6, (0, 1, 2): 10}
    for players, v in expected.items():
        assert game.value(mask_of(players)) == v
    # hand-sort oracle agrees
    for mask, v in game.items():
        ps = members(mask)
        if 0 in ps:
            vals = [(10, 6)[p - 1] for p in ps if p]
            assert v == pytest.approx(efficient_welfare(vals, (1.0,)))


def test_build_game_single_active_bidder():
    m = Market((7.0, 3.0), (0.8,))
    game = build_game(m, active=[0])
    assert game.n_players == 2
    assert game.value(0b11) == pytest.approx(0.8 * 7.0)
    assert game.value(0b01) == game.value(0b10) == game.value(0) == 0


def test_size_guard():
    m = Market(tuple(range(1, 23)), (1.0,))
    with pytest.raises(GameTooLarge):
        build_game(m)


def test_game_values_read_only():
    game = CharacteristicGame.additive([3, 2, 1])
    with pytest.raises(ValueError):
        game.values[1] = 5.0


def _random_market(rng, n_max=10):
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, n))
    ctr = np.sort(rng.uniform(0.05, 1.0, k))[::-1]
    return Market(tuple(rng.uniform(0, 10, n)), tuple(ctr))


@pytest.mark.parametrize("seed", range(5))
def test_properties_on_random_markets(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        m = _random_market(rng, n_max=6)
        game = build_game(m)
        for mask, v in game.items():
            ps = members(mask)
            if 0 not in ps:
                assert v == 0.0
                continue
            st = coalition_surplus_stats(m, mask)
            assert st.ua_max <= st.ub_max + 1e-12
            assert st.ua_max + st.ub_truthful == pytest.approx(st.ub_max, abs=1e-9)
            vals = sorted((m.valuations[p - 1] for p in ps if p), reverse=True)
            assert v == pytest.approx(sum(b * x for b, x in zip(m.ctr, vals)), abs=1e-9)
            # monotone: adding any player never lowers the value
            for p in range(game.n_players):
                assert game.value(mask | 1 << p) >= v - 1e-12
        # superadditivity on disjoint pairs
        full = game.grand
        for a in range(1, full + 1):
            rest = full ^ a
            b = rest
            while b:
                assert game.value(a | b) >= game.value(a) + game.value(b) - 1e-9
                b = (b - 1) & rest


def test_nash_product_maximal_on_segment():
    rng = np.random.default_rng(11)
    t = np.linspace(0, 1, 10_001)
    for _ in range(50):
        m = _random_market(rng)
        ids = [p for p in range(1, m.n + 1) if rng.random() < 0.6]
        st = coalition_surplus_stats(m, mask_of([0, *ids]))
        pt = nbs_solve(st)
        ua = t * st.ua_max
        ub = st.ub_max + t * (st.ub_truthful - st.ub_max)
        best = float((ua * ub).max())
        assert pt.ua_star * pt.ub_star >= best - 1e-9 * max(1.0, best)
        assert 0 <= pt.ua_star <= pt.ua_max
        assert pt.ub_truthful <= pt.ub_star <= pt.ub_max + 1e-12


def test_welfare_identity_brute_force_small():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = _random_market(rng, n_max=5)
        for r in range(m.n + 1):
            for ids in itertools.combinations(range(m.n), r):
                v = characteristic_value(m, mask_of([0] + [i + 1 for i in ids]))
                ref = efficient_welfare([m.valuations[i] for i in ids], m.ctr)
                assert v == pytest.approx(ref, abs=1e-9)
