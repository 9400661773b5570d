"""Small random congestion instances for tests and experiments."""

from __future__ import annotations

import numpy as np

from .functions import FunctionSpec
from .game import AuxiliaryGame, Game


def random_price(rng: np.random.Generator, kind: str = "affine") -> FunctionSpec:
    """A price nondecreasing on [0, 1.5], which contains every aggregate of random_game."""
    if kind == "affine":
        return FunctionSpec.affine(rng.uniform(-1, 1), rng.uniform(0.1, 3))
    if kind == "quadratic":
        # c1 + 2 c2 s >= 0 on [0, 1.5] when c1 >= 0 and c1 + 3 c2 >= 0
        c1 = rng.uniform(0.1, 2)
        c2 = rng.uniform(-c1 / 3, 2)
        return FunctionSpec.quadratic(rng.uniform(-1, 1), c1, c2)
    if kind == "pwl":
        bp = np.linspace(-0.5, 1.5, 5)
        vals = np.cumsum(rng.uniform(0, 1.5, 5))
        return FunctionSpec.pwl(bp, vals)
    raise ValueError(kind)


def random_game(rng: np.random.Generator, n: int, k_max: int = 4, d: int = 1,
                price_kind: str = "affine", h_scale: float = 0.5, k_min: int = 1) -> Game:
    sets, tables = [], []
    for _ in range(n):
        k = int(rng.integers(k_min, k_max + 1))
        pts = rng.uniform(0, 1, (k, d))
        sets.append(pts)
        tables.append(rng.uniform(-1, 1, k))
    weights = rng.uniform(0.5, 1.5, n)
    g = [random_price(rng, price_kind) for _ in range(d)]
    h = [FunctionSpec.affine(rng.uniform(-1, 1) * h_scale, rng.uniform(-1, 1) * h_scale) for _ in range(n)]
    return Game(weights, sets, g, h, tables)


def random_aux(rng: np.random.Generator, n: int, **kw) -> AuxiliaryGame:
    return AuxiliaryGame(random_game(rng, n, **kw))
