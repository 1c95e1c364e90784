"""Independent reference computations used by the tests."""

import itertools

import numpy as np


def vertex_enumeration(cost, A, relations, rhs, bounds, sense="min", tol=1e-9):
    """Optimum of a box-bounded LP by enumerating basic solutions.

    Returns ``None`` when no vertex is feasible.
    """
    cost = np.asarray(cost, float)
    n = cost.size
    rows, vals, kinds = [], [], []
    for a, rel, b in zip(np.asarray(A, float), relations, rhs):
        rows.append(a)
        vals.append(b)
        kinds.append(rel)
    for j, (lo, hi) in enumerate(bounds):
        e = np.zeros(n)
        e[j] = 1.0
        rows += [e, e]
        vals += [lo, hi]
        kinds += [">=", "<="]
    G = np.array(rows)
    h = np.array(vals)
    eq = [i for i, k in enumerate(kinds) if k == "="]
    ineq = [i for i, k in enumerate(kinds) if k != "="]
    if len(eq) > n:
        return None
    combos = [eq + list(c) for c in itertools.combinations(ineq, n - len(eq))]
    M = G[combos]
    rhs_b = h[combos]
    ok = np.abs(np.linalg.det(M)) > 1e-12
    X = np.linalg.solve(M[ok], rhs_b[ok][..., None])[..., 0]
    GX = X @ G.T
    feas = np.ones(len(X), dtype=bool)
    for i, k in enumerate(kinds):
        if k == "<=":
            feas &= GX[:, i] <= h[i] + tol
        elif k == ">=":
            feas &= GX[:, i] >= h[i] - tol
        else:
            feas &= np.abs(GX[:, i] - h[i]) <= tol
    if not feas.any():
        return None
    obj = X[feas] @ cost
    return float(obj.min() if sense == "min" else obj.max())


def ternary_minimum(f, lo=0.0, hi=1.0, iters=200):
    """Minimum of a convex function on [lo, hi]."""
    for _ in range(iters):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if f(a) <= f(b):
            hi = b
        else:
            lo = a
    t = (lo + hi) / 2
    return min(f(t), f(0.0), f(1.0)), t


def efficient_welfare(values, ctr):
    """Best slot assignment by trying every ordering (tiny inputs only)."""
    best = 0.0
    k = len(ctr)
    for perm in itertools.permutations(values, min(k, len(values))):
        best = max(best, sum(b * v for b, v in zip(ctr, perm)))
    return best
