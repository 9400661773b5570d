"""From a convexified profile with generators back to feasible actions.

Deterministic route: purify the generator weights to a vertex of the
aggregate-preserving polytope (at most q players keep a split support), round
the split players, then search their supports for the smallest aggregate
deviation. Randomized route: each player samples a generator point with the
generator weights as probabilities.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .envelope import GeneratorWitness
from .errors import NumericalError
from .rng import make_rng

ENUM_LIMIT = 2 ** 16


@dataclass(frozen=True)
class MixedProfile:
    supports: tuple  # per player (s_i, d) arrays
    probabilities: tuple  # per player (s_i,) arrays

    @property
    def n(self):
        return len(self.supports)

    def mean(self) -> np.ndarray:
        return np.array([p @ z for z, p in zip(self.supports, self.probabilities)])

    def sample_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Support indices of ``size`` independent profiles, shape (size, n).

        One uniform per (draw, player), row-major, inverted through the
        cumulative probabilities.
        """
        u = rng.random((size, self.n))
        out = np.empty((size, self.n), dtype=np.int64)
        for i, p in enumerate(self.probabilities):
            cum = np.cumsum(p)
            idx = np.minimum(np.searchsorted(cum, u[:, i], side="right"), len(p) - 1)
            # never land on a zero-probability point through round-off in cum
            out[:, i] = np.where(p[idx] > 0, idx, np.flatnonzero(p > 0)[-1])
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` independent profiles, shape (size, n, d)."""
        idx = self.sample_indices(rng, size)
        return np.stack([z[idx[:, i]] for i, z in enumerate(self.supports)], axis=1)

    def to_dict(self) -> dict:
        return {"supports": [z.tolist() for z in self.supports],
                "probabilities": [p.tolist() for p in self.probabilities]}


@dataclass(frozen=True)
class DisaggregationResult:
    actions: np.ndarray  # (n, d), each row a generator point
    aggregate_deviation: float
    fractional_players: tuple
    bound: float

    def to_dict(self) -> dict:
        return {"actions": self.actions.tolist(), "aggregate_deviation": self.aggregate_deviation,
                "fractional_players": list(self.fractional_players), "bound": self.bound}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _check(x_tilde, witnesses):
    x_tilde = np.asarray(x_tilde, dtype=float)
    if x_tilde.ndim == 1:
        x_tilde = x_tilde[:, None]
    n = x_tilde.shape[0]
    if len(witnesses) != n:
        raise ValueError("one witness per player is required")
    sizes = [len(w) for w in witnesses]
    owner = np.repeat(np.arange(n), sizes)
    weights = np.concatenate([w.weights for w in witnesses])
    support = np.concatenate([w.support for w in witnesses])
    sums = np.bincount(owner, weights, minlength=n)
    bad = np.flatnonzero((np.abs(sums - 1.0) > 1e-9) | (np.minimum.reduceat(weights, np.cumsum([0] + sizes[:-1])) < 0))
    if bad.size:
        raise ValueError(f"player {bad[0]}: witness weights are not a simplex vector")
    bary = np.zeros_like(x_tilde)
    np.add.at(bary, owner, weights[:, None] * support)
    gap = np.abs(bary - x_tilde).max(axis=1)
    bad = np.flatnonzero(gap > 1e-9 * np.maximum(1.0, np.abs(x_tilde).max(axis=1)))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"player {i}: witness barycenter misses the action by {gap[i]:.3g}")
    return x_tilde


def witness_spread(witnesses) -> float:
    """max over players of max(point norm, support diameter)."""
    out = 0.0
    for w in witnesses:
        z = w.support
        out = max(out, float(np.linalg.norm(z, axis=1).max()))
        if len(z) > 1:
            out = max(out, float(np.sqrt(((z[:, None] - z[None]) ** 2).sum(-1)).max()))
    return out


def _null_direction(cols_agg, owners, n_block, q):
    """Null vector of [aggregate rows; per-player sum rows] for the given columns."""
    s = cols_agg.shape[0]
    A = np.zeros((q + n_block, s))
    A[:q] = cols_agg.T
    A[q + owners, np.arange(s)] = 1.0
    direction = np.linalg.svd(A)[2][-1]
    direction -= np.linalg.lstsq(A.T, direction, rcond=None)[0] @ A
    return direction


def purify(weights, witnesses, q: int):
    """Vertex purification; returns per-player weight arrays (zeros dropped)."""
    a = np.asarray(weights, dtype=float)
    alphas = [w.weights.astype(float).copy() for w in witnesses]
    supports = [w.support for w in witnesses]
    frac = [i for i, al in enumerate(alphas) if np.count_nonzero(al > 0) >= 2]
    retried = False
    while len(frac) > q:
        block = frac[: q + 1]
        idx = [(b, l) for bi, b in enumerate(block) for l in np.flatnonzero(alphas[b] > 0)]
        owners = np.array([block.index(b) for b, _ in idx])
        cols = np.array([a[b] * supports[b][l] for b, l in idx])
        direction = _null_direction(cols, owners, len(block), q)
        nrm = np.linalg.norm(direction)
        if nrm < 1e-13:
            if retried:
                raise NumericalError("degenerate purification pivot")
            retried = True
            for b in block:
                alphas[b] = alphas[b] + 1e-12 * (alphas[b] > 0)
                alphas[b] /= alphas[b].sum()
            continue
        direction /= nrm
        current = np.array([alphas[b][l] for b, l in idx])
        neg = direction < -1e-15
        if not np.any(neg):
            direction = -direction
            neg = direction < -1e-15
        steps = current[neg] / -direction[neg]
        t = steps.min()
        new = current + t * direction
        new[np.flatnonzero(neg)[np.argmin(steps)]] = 0.0
        new[new < 1e-15] = 0.0
        for (b, l), v in zip(idx, new):
            alphas[b][l] = v
        for b in block:
            alphas[b] /= alphas[b].sum()
        frac = [i for i in frac if np.count_nonzero(alphas[i] > 0) >= 2]
    return alphas


def _round(alpha, support):
    best = None
    for l in np.flatnonzero(alpha > 0):
        key = (-alpha[l], float(np.linalg.norm(support[l])), int(l))
        if best is None or key < best[0]:
            best = (key, int(l))
    return best[1]


def sf_disaggregate(x_tilde, witnesses, weights, Delta: float | None = None,
                    enum_limit: int = ENUM_LIMIT) -> DisaggregationResult:
    x_tilde = _check(x_tilde, witnesses)
    a = np.asarray(weights, dtype=float)
    n, q = x_tilde.shape
    alphas = purify(a, witnesses, q)
    fractional = tuple(i for i, al in enumerate(alphas) if np.count_nonzero(al > 0) >= 2)
    choice = [int(np.argmax(al)) for al in alphas]
    for i in fractional:
        choice[i] = _round(alphas[i], witnesses[i].support)
    target = a @ x_tilde
    actions = np.array([w.support[c] for w, c in zip(witnesses, choice)])
    fixed = a @ actions - sum(a[i] * actions[i] for i in fractional)
    options = [np.flatnonzero(alphas[i] > 0) for i in fractional]

    def dev(sel):
        tot = fixed + sum(a[i] * witnesses[i].support[l] for i, l in zip(fractional, sel))
        return float(np.linalg.norm(target - tot))

    start = tuple(choice[i] for i in fractional)
    best_sel, best_dev = start, dev(start)
    if fractional:
        if math.prod(len(o) for o in options) <= enum_limit:
            for sel in itertools.product(*options):
                dv = dev(sel)
                if dv < best_dev:
                    best_sel, best_dev = sel, dv
        else:
            sel = list(best_sel)
            for k, opts in enumerate(options):
                for l in opts:
                    trial = sel[:k] + [l] + sel[k + 1:]
                    dv = dev(trial)
                    if dv < best_dev:
                        sel, best_dev = trial, dv
            best_sel = tuple(sel)
        for i, l in zip(fractional, best_sel):
            actions[i] = witnesses[i].support[l]
    spread = witness_spread(witnesses) if Delta is None else Delta
    return DisaggregationResult(actions, float(np.linalg.norm(target - a @ actions)), fractional,
                                math.sqrt(q) * float(a.max()) * spread)


def exact_argmin(x_tilde, witnesses, weights, limit: int = ENUM_LIMIT):
    """Exhaustive minimum of the aggregate deviation over generator products."""
    x_tilde = np.asarray(x_tilde, dtype=float)
    if x_tilde.ndim == 1:
        x_tilde = x_tilde[:, None]
    a = np.asarray(weights, dtype=float)
    sizes = [len(w) for w in witnesses]
    if math.prod(sizes) > limit:
        raise ValueError(f"{math.prod(sizes)} products exceed the enumeration limit {limit}")
    target = a @ x_tilde
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)  # (P, n)
    total = np.zeros((idx.shape[0], x_tilde.shape[1]))
    for i, w in enumerate(witnesses):
        total += a[i] * w.support[idx[:, i]]
    devs = np.linalg.norm(total - target, axis=1)
    k = int(np.argmin(devs))
    actions = np.array([w.support[idx[k, i]] for i, w in enumerate(witnesses)])
    return actions, float(devs[k])


def randomized_disaggregate(witnesses, seed: int, size: int | None = None):
    """Mixed profile with the generator weights as probabilities, plus samples.

    Returns (MixedProfile, actions) where actions has shape (n, d), or
    (size, n, d) when ``size`` is given.
    """
    mixed = MixedProfile(tuple(w.support for w in witnesses),
                         tuple(w.weights / w.weights.sum() for w in witnesses))
    draws = mixed.sample(make_rng(seed), 1 if size is None else size)
    return mixed, (draws[0] if size is None else draws)
