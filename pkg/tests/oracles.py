"""Independent reference evaluators shared by the tests."""

import itertools
import math

import mpmath
import numpy as np


def envelope_pairs_1d(points, values, x):
    """Lower envelope at x by enumerating every bracketing pair (and exact hits)."""
    z = np.asarray(points, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    best = math.inf
    for a, b in itertools.product(range(z.size), repeat=2):
        if z[a] == x:
            best = min(best, v[a])
        if z[a] < x < z[b]:
            t = (x - z[a]) / (z[b] - z[a])
            best = min(best, (1 - t) * v[a] + t * v[b])
    return best


def envelope_simplices(points, values, x, tol=1e-12):
    """Lower envelope at x by enumerating every support of at most d+1 points."""
    Z = np.asarray(points, dtype=float)
    v = np.asarray(values, dtype=float)
    k, d = Z.shape
    best = math.inf
    for size in range(1, min(k, d + 1) + 1):
        for S in itertools.combinations(range(k), size):
            A = np.vstack([Z[list(S)].T, np.ones(size)])
            rhs = np.r_[x, 1.0]
            w, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ w - rhs).max() > 1e-10 or w.min() < -tol:
                continue
            best = min(best, float(np.clip(w, 0, None) @ v[list(S)]))
    return best


def kahan_sum(xs):
    total = 0.0
    comp = 0.0
    for x in xs:
        y = x - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def straight_cost(game, i, x):
    """f_i written out term by term with Python loops."""
    n, d = game.n, game.d
    s = [sum(game.weights[j] * x[j][t] for j in range(n)) / n for t in range(d)]
    lin = sum(game.g[t].scalar(s[t]) * x[i][t] for t in range(d))
    h = sum(game.h[i].scalar(s[t]) for t in range(d))
    k = [tuple(p) for p in game.action_sets[i].tolist()].index(tuple(x[i]))
    return lin + h + game.r[i][k]


def golden_section(f, lo, hi, tol=1e-13):
    """Minimiser of a unimodal f on [lo, hi].

    In double precision the bracket cannot resolve a quadratic minimum better
    than about sqrt(eps); pass mpmath numbers and f for a sharper answer.
    """
    inv = (5 ** 0.5 - 1) / 2 if isinstance(lo, float) else (mpmath.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
