import numpy as np
import pytest

from coopbid.lp import LinearProgram, MalformedProgram, Status, solve_lp
from oracles import vertex_enumeration

INF = np.inf


def test_single_binding_constraint():
    sol = solve_lp(LinearProgram.from_rows([1.0], [([1.0], ">=", 3.0)], bounds=[(-INF, INF)]))
    assert sol.status is Status.OPTIMAL
    assert sol.primal[0] == 3.0
    assert sol.objective == 3.0


def test_empty_feasible_set():
    lp = LinearProgram.from_rows([1.0], [([1.0], "<=", 1.0), ([1.0], ">=", 2.0)])
    assert solve_lp(lp).status is Status.INFEASIBLE


def test_binding_sum_constraint():
    lp = LinearProgram.from_rows([1.0, 1.0], [([1.0, 1.0], "<=", 4.0)], sense="max")
    sol = solve_lp(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == 4.0


def test_unbounded():
    lp = LinearProgram.from_rows([1.0, 0.0], [([1.0, -1.0], "<=", 1.0)], sense="max")
    assert solve_lp(lp).status is Status.UNBOUNDED


@pytest.mark.parametrize("rows", [
    [([1.0, 2.0], "<=", 1.0)],
    [([1.0], "<=", 1.0), ([1.0, 1.0, 1.0], ">=", 0.0)],
])
def test_dimension_mismatch_rejected(rows):
    with pytest.raises(MalformedProgram):
        LinearProgram.from_rows([1.0], rows)


def test_bad_bounds_and_relation_rejected():
    with pytest.raises(MalformedProgram):
        LinearProgram.from_rows([1.0], [([1.0], "<=", 1.0)], bounds=[(2.0, 1.0)])
    with pytest.raises(MalformedProgram):
        LinearProgram.from_rows([1.0], [([1.0], "<>", 1.0)])


def test_mixed_bounds_and_equalities():
    # min -x - 2y, x in [1, 3], y <= 2 free below, x + y = 4 -> x = 2, y = 2
    lp = LinearProgram.from_rows([-1.0, -2.0], [([1.0, 1.0], "=", 4.0)],
                                 bounds=[(1.0, 3.0), (-INF, 2.0)])
    sol = solve_lp(lp)
    np.testing.assert_allclose(sol.primal, [2.0, 2.0], atol=1e-12)
    assert sol.objective == pytest.approx(-6.0)


def test_duals_are_rhs_sensitivities():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n, m = 3, 5
        A = rng.normal(size=(m, n))
        b = rng.normal(size=m) + 2
        c = rng.normal(size=n)
        rels = [">=", "<=", "<=", ">=", "<="]
        lp = LinearProgram(c, A, rels, b, bounds=[(-4, 4)] * n)
        sol = solve_lp(lp)
        if not sol.optimal:
            continue
        h = 1e-6
        for i in range(m):
            bumped = b.copy()
            bumped[i] += h
            other = solve_lp(LinearProgram(c, A, rels, bumped, bounds=[(-4, 4)] * n))
            if other.optimal:
                assert (other.objective - sol.objective) / h == pytest.approx(sol.duals[i], abs=1e-4)


def _random_lp(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 9))
    A = rng.normal(size=(m, n)).round(3)
    b = (rng.normal(size=m) * 3).round(3)
    c = rng.normal(size=n).round(3)
    rels = list(rng.choice(["<=", ">="], size=m))
    bounds = [(-5.0, 5.0)] * n
    sense = str(rng.choice(["min", "max"]))
    return LinearProgram(c, A, rels, b, bounds=bounds, sense=sense)


@pytest.mark.parametrize("seed", range(40))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    lp = _random_lp(rng)
    sol = solve_lp(lp)
    ref = vertex_enumeration(lp.cost, lp.A, lp.relations, lp.rhs, lp.bounds, lp.sense)
    if ref is None:
        assert sol.status is Status.INFEASIBLE
    else:
        assert sol.status is Status.OPTIMAL
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        assert lp.max_violation(sol.primal) <= 1e-9


def test_deterministic_bit_for_bit():
    rng = np.random.default_rng(77)
    lp = _random_lp(rng)
    a, b = solve_lp(lp), solve_lp(lp)
    assert a.status == b.status
    assert a.primal.tobytes() == b.primal.tobytes()
    assert a.duals.tobytes() == b.duals.tobytes()


def test_degenerate_program_terminates():
    # Many redundant constraints through the same vertex.
    rows = [([1.0, t], "<=", 0.0) for t in np.linspace(0.1, 2.0, 40)]
    rows.append(([1.0, 1.0], "<=", 1.0))
    lp = LinearProgram.from_rows([1.0, 1.0], rows, sense="max")
    sol = solve_lp(lp)
    assert sol.optimal
    assert sol.objective == pytest.approx(0.0, abs=1e-12)
