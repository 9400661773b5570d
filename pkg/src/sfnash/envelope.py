"""Convex envelope of a function tabulated on a finite point set.

The envelope at x is the cheapest simplex combination of tabulated values whose
barycenter is x; the optimal combination (the generator) is returned alongside
the value. One-dimensional sets use a lower-hull scan; higher dimensions solve
the small LP and polish its basic solution.
"""

from __future__ import annotations

import bisect
import csv
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalError, OutsideHullError
from .simplex_qp import solve_simplex_qp

log = logging.getLogger(__name__)

EXACT_TOL = 1e-12
WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorWitness:
    """Simplex weights over at most d+1 tabulated points."""

    support: np.ndarray  # (s, d)
    weights: np.ndarray  # (s,)
    values: np.ndarray  # (s,) tabulated values at the support

    @property
    def barycenter(self) -> np.ndarray:
        return self.weights @ self.support

    @property
    def value(self) -> float:
        return float(self.weights @ self.values)

    def __len__(self):
        return self.weights.size

    @classmethod
    def singleton(cls, point, value) -> "GeneratorWitness":
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), np.ones(1),
                   np.array([float(value)]))

    def to_dict(self) -> dict:
        return {"support": self.support.tolist(), "weights": self.weights.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorWitness":
        return cls(np.atleast_2d(np.asarray(d["support"], dtype=float)),
                   np.asarray(d["weights"], dtype=float), np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class Envelope:
    points: np.ndarray  # (k, d), duplicates removed
    values: np.ndarray  # (k,)
    hull_x: tuple = ()  # d == 1: lower-hull breakpoints, strictly increasing
    hull_v: tuple = ()
    _hull_xl: list = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def hull_cache(self) -> list[tuple[float, float]]:
        return list(zip(self.hull_x, self.hull_v))

    def __call__(self, x) -> float:
        return eval_envelope(self, x)[0]


def _lower_hull_1d(xs, vs):
    hull: list[tuple[float, float]] = []
    for p in zip(xs, vs):
        while len(hull) >= 2:
            (x0, v0), (x1, v1) = hull[-2], hull[-1]
            # drop hull[-1] unless it lies strictly below the chord hull[-2] -> p
            if (x1 - x0) * (p[1] - v0) - (p[0] - x0) * (v1 - v0) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def build_envelope(points, values) -> Envelope:
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float).ravel()
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("cannot build an envelope of an empty point set")
    if pts.shape[0] != vals.size:
        raise ValueError("points and values differ in length")
    if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(vals))):
        raise ValueError("points and values must be finite")
    best: dict[tuple, float] = {}
    order: list[tuple] = []
    for p, v in zip(map(tuple, pts), vals):
        if p in best:
            if best[p] != v:
                warnings.warn(f"duplicate point {p} with values {best[p]} and {v}; keeping the smaller")
            best[p] = min(best[p], float(v))
        else:
            best[p] = float(v)
            order.append(p)
    pts = np.array(order, dtype=float)
    vals = np.array([best[p] for p in order])
    if pts.shape[1] != 1:
        return Envelope(pts, vals)
    idx = np.argsort(pts[:, 0], kind="stable")
    hull = _lower_hull_1d(pts[idx, 0].tolist(), vals[idx].tolist())
    hx = tuple(h[0] for h in hull)
    hv = tuple(h[1] for h in hull)
    return Envelope(pts, vals, hx, hv, list(hx))


def _eval_1d(env: Envelope, x: float):
    hx, hv = env.hull_x, env.hull_v
    lo, hi = hx[0], hx[-1]
    tol = EXACT_TOL * max(1.0, abs(lo), abs(hi))
    if x < lo - tol or x > hi + tol:
        dist = lo - x if x < lo else x - hi
        raise OutsideHullError(f"x={x!r} outside [{lo!r}, {hi!r}] (distance {dist:.3g})", dist)
    j = bisect.bisect_left(env._hull_xl, x)
    if j < len(hx) and abs(hx[j] - x) <= tol:
        return hv[j], GeneratorWitness.singleton([hx[j]], hv[j])
    if j > 0 and abs(hx[j - 1] - x) <= tol:
        return hv[j - 1], GeneratorWitness.singleton([hx[j - 1]], hv[j - 1])
    if j == 0 or j == len(hx):  # within tolerance outside the range
        k = 0 if j == 0 else len(hx) - 1
        return hv[k], GeneratorWitness.singleton([hx[k]], hv[k])
    x0, x1 = hx[j - 1], hx[j]
    t = (x - x0) / (x1 - x0)
    w = np.array([1.0 - t, t])
    vals = np.array([hv[j - 1], hv[j]])
    return float(w @ vals), GeneratorWitness(np.array([[x0], [x1]]), w, vals)


def distance_to_hull(points: np.ndarray, x: np.ndarray) -> float:
    """Euclidean distance from x to conv(points)."""
    Z = np.asarray(points, dtype=float)
    Q = Z @ Z.T
    b = -Z @ x
    alpha, _, _ = solve_simplex_qp(Q, b, tol=1e-14, max_iter=50000)
    return float(np.linalg.norm(alpha @ Z - x))


def _eval_lp(env: Envelope, x: np.ndarray):
    Z, r = env.points, env.values
    k, d = Z.shape
    for j in range(k):
        if np.all(np.abs(Z[j] - x) <= EXACT_TOL * (1 + np.abs(x))):
            # a vertex query: singleton unless a strictly cheaper combination exists
            break
    else:
        j = None
    A_eq = np.vstack([Z.T, np.ones((1, k))])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(r, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        dist = distance_to_hull(Z, x)
        raise OutsideHullError(f"x={x.tolist()} outside the convex hull (distance {dist:.3g})", dist)
    if res.status != 0:
        raise NumericalError(f"envelope LP failed: {res.message}")
    alpha = np.asarray(res.x)
    support = np.flatnonzero(alpha > 1e-12)
    # polish the basic solution exactly on its support
    M = A_eq[:, support]
    a_s, *_ = np.linalg.lstsq(M, b_eq, rcond=None)
    if a_s.min() >= -1e-12 and np.abs(M @ a_s - b_eq).max() <= 1e-11 * (1 + np.abs(b_eq).max()):
        a_s = np.clip(a_s, 0, None)
        a_s /= a_s.sum()
    else:
        a_s = alpha[support] / alpha[support].sum()
    w = GeneratorWitness(Z[support], a_s, r[support])
    if len(w) > d + 1:
        w = caratheodory_reduce(w)
    value = w.value
    if j is not None and r[j] <= value + EXACT_TOL * max(1.0, abs(value)):
        return float(r[j]), GeneratorWitness.singleton(Z[j], r[j])
    return value, w


def eval_envelope(env: Envelope, x) -> tuple[float, GeneratorWitness]:
    """Envelope value at x in conv(points) and a generator attaining it."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != env.dim:
        raise ValueError(f"query has dimension {x.size}, envelope has {env.dim}")
    if env.points.shape[0] == 1:
        if np.all(np.abs(env.points[0] - x) <= EXACT_TOL * (1 + np.abs(x))):
            return float(env.values[0]), GeneratorWitness.singleton(env.points[0], env.values[0])
        dist = float(np.linalg.norm(env.points[0] - x))
        raise OutsideHullError(f"x={x.tolist()} differs from the only point (distance {dist:.3g})", dist)
    if env.dim == 1:
        return _eval_1d(env, float(x[0]))
    return _eval_lp(env, x)


def caratheodory_reduce(witness: GeneratorWitness) -> GeneratorWitness:
    """Shrink a witness to at most d+1 affinely independent support points.

    Each pivot moves along a null direction of [Z; 1] oriented so the weighted
    value does not increase, until a weight vanishes.
    """
    Z = witness.support.copy()
    w = witness.weights.astype(float).copy()
    r = witness.values.astype(float).copy()
    keep = w > 0
    Z, w, r = Z[keep], w[keep], r[keep]
    d = Z.shape[1]
    while w.size > d + 1:
        A = np.vstack([Z.T, np.ones((1, w.size))])
        direction = np.linalg.svd(A)[2][-1]
        # reorthogonalise against the row space to clean round-off
        direction -= np.linalg.lstsq(A.T, direction, rcond=None)[0] @ A
        nrm = np.linalg.norm(direction)
        if nrm < 1e-14:
            raise NumericalError("degenerate Caratheodory pivot")
        direction /= nrm
        if direction @ r > 0:
            direction = -direction
        neg = direction < -1e-15
        if not np.any(neg):
            raise NumericalError("null direction without a negative component")
        steps = w[neg] / -direction[neg]
        t = steps.min()
        w = w + t * direction
        hit = np.flatnonzero(neg)[np.argmin(steps)]
        w[hit] = 0.0
        w[w < 1e-15] = 0.0
        keep = w > 0
        Z, w, r = Z[keep], w[keep], r[keep]
        w /= w.sum()
    return GeneratorWitness(Z, w, r)


def dump_hull_csv(env: Envelope, path) -> None:
    """Debug dump: one row per tabulated point with its envelope value."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["point", "raw_value", "envelope_value"])
        for p, v in zip(env.points, env.values):
            out.writerow([" ".join(repr(float(c)) for c in p), repr(float(v)), repr(env(p))])
