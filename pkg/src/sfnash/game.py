"""Congestion-type sum-aggregative games and their auxiliary (anchored) version.

Player i's cost at profile x is

    <g(s), x_i> + h_i(s) + r_i(x_i),    s = (1/n) sum_j a_j x_j,

with a common coordinate-wise price g, a coordinate-separable h_i and a local
cost r_i tabulated on the finite action set X_i.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .envelope import Envelope, build_envelope
from .errors import GameValidationError, NotInActionSetError
from .functions import FunctionSpec

MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class Constants:
    m: float
    M: float
    Delta: float
    L_g: float
    L_h: float
    B_r: float
    B_g: float
    D1: float
    D2: float
    C: float
    d: int
    n: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class Game:
    """An n-player instance with finite action sets in R^d."""

    def __init__(self, weights, action_sets, g, h, r):
        self.weights = np.asarray(weights, dtype=float).ravel()
        self.n = self.weights.size
        if self.n < 1:
            raise GameValidationError("a game needs at least one player")
        sets = []
        for i, pts in enumerate(action_sets):
            arr = np.asarray(pts, dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2 or arr.shape[0] < 1:
                raise GameValidationError(f"player {i}: action set must be a non-empty list of points")
            if not np.all(np.isfinite(arr)):
                raise GameValidationError(f"player {i}: non-finite action point")
            sets.append(arr)
        if len(sets) != self.n:
            raise GameValidationError(f"{len(sets)} action sets for {self.n} players")
        self.d = sets[0].shape[1]
        if any(s.shape[1] != self.d for s in sets):
            raise GameValidationError("action points differ in dimension")
        self.q = self.d
        self.action_sets = tuple(sets)
        self.g = tuple(g)
        if len(self.g) != self.d:
            raise GameValidationError(f"need {self.d} price functions, got {len(self.g)}")
        self.h = tuple(h)
        if len(self.h) != self.n:
            raise GameValidationError(f"need {self.n} h functions, got {len(self.h)}")
        self.r = tuple(np.asarray(ri, dtype=float).ravel() for ri in r)
        if len(self.r) != self.n or any(ri.size != s.shape[0] for ri, s in zip(self.r, sets)):
            raise GameValidationError("r tables must list one value per action point")
        if not all(np.all(np.isfinite(ri)) for ri in self.r):
            raise GameValidationError("non-finite local cost value")
        if not np.all(np.isfinite(self.weights)) or self.weights.min() <= 0:
            raise GameValidationError("weights must be positive and finite")

        # padded arrays for vectorised evaluation
        kmax = max(s.shape[0] for s in sets)
        self.sizes = np.array([s.shape[0] for s in sets])
        self.actions_pad = np.zeros((self.n, kmax, self.d))
        self.r_pad = np.zeros((self.n, kmax))
        self.mask = np.zeros((self.n, kmax), dtype=bool)
        for i, (s, ri) in enumerate(zip(sets, self.r)):
            k = s.shape[0]
            self.actions_pad[i, :k] = s
            self.actions_pad[i, k:] = s[0]
            self.r_pad[i, :k] = ri
            self.r_pad[i, k:] = ri[0]
            self.mask[i, :k] = True
        if all(hi.is_polynomial for hi in self.h):
            self._h_coef = np.array([hi.poly3() for hi in self.h])
        else:
            self._h_coef = None

        self.constants = self._derive_constants()
        for t, gt in enumerate(self.g):
            if not gt.is_nondecreasing(self.constants.D1, self.constants.D2):
                raise GameValidationError(
                    f"price g[{t}] decreases somewhere on [{self.constants.D1}, {self.constants.D2}]")

    def _derive_constants(self) -> Constants:
        a = self.weights
        n, d = self.n, self.d
        lo = np.array([s.min(axis=0) for s in self.action_sets])  # (n, d)
        hi = np.array([s.max(axis=0) for s in self.action_sets])
        D1 = float(np.min(a @ lo / n))
        D2 = float(np.max(a @ hi / n))
        norm_max = max(float(np.linalg.norm(s, axis=1).max()) for s in self.action_sets)
        diam = 0.0
        for s in self.action_sets:
            if s.shape[0] > 1:
                diff = s[:, None, :] - s[None, :, :]
                diam = max(diam, float(np.sqrt((diff ** 2).sum(-1)).max()))
        Delta = max(norm_max, diam)
        L_g = max(gt.lipschitz(D1, D2) for gt in self.g)
        # h_i(y) = sum_t h(y_t): |h_i(y) - h_i(y')| <= L sqrt(d) ||y - y'||
        L_h = math.sqrt(d) * max(hi_.lipschitz(D1, D2) for hi_ in self.h)
        B_r = max(float(np.abs(ri).max()) for ri in self.r)
        B_g = max(gt.sup_abs(D1, D2) for gt in self.g)
        m, M = float(a.min()), float(a.max())
        C = (d * Delta * L_g + 2 * B_r) * M
        return Constants(m=m, M=M, Delta=Delta, L_g=L_g, L_h=L_h, B_r=B_r, B_g=B_g,
                         D1=D1, D2=D2, C=C, d=d, n=n)

    # evaluation -------------------------------------------------------
    def price(self, s) -> np.ndarray:
        """g applied coordinate-wise to s (..., d)."""
        s = np.asarray(s, dtype=float)
        return np.stack([self.g[t](s[..., t]) for t in range(self.d)], axis=-1)

    def h_all(self, s) -> np.ndarray:
        """h_i(s_i) for every player; s has shape (n, ..., d)."""
        s = np.asarray(s, dtype=float)
        if self._h_coef is not None:
            c = self._h_coef.reshape((self.n,) + (1,) * (s.ndim - 1) + (3,))
            vals = c[..., 0] + (c[..., 1] + c[..., 2] * s) * s
            return vals.sum(axis=-1)
        return np.stack([self.h[i](s[i]).sum(axis=-1) for i in range(self.n)])

    def h_value(self, i: int, s) -> float:
        return float(np.sum(self.h[i](np.asarray(s, dtype=float))))

    def index_of(self, i: int, x) -> int:
        """Position of x in X_i; raises NotInActionSetError if absent."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        dist = np.abs(self.action_sets[i] - x).max(axis=1)
        j = int(np.argmin(dist))
        if dist[j] > MEMBER_TOL * max(1.0, float(np.abs(x).max())):
            raise NotInActionSetError(f"player {i}: {x.tolist()} is not in the action set")
        return j

    def indices_of(self, x) -> np.ndarray:
        """index_of for a whole profile (n, d) at once."""
        x = np.asarray(x, dtype=float)
        dist = np.abs(self.actions_pad - x[:, None, :]).max(axis=2)
        dist = np.where(self.mask, dist, np.inf)
        idx = dist.argmin(axis=1)
        tol = MEMBER_TOL * np.maximum(1.0, np.abs(x).max(axis=1))
        bad = np.flatnonzero(dist[np.arange(self.n), idx] > tol)
        if bad.size:
            i = int(bad[0])
            raise NotInActionSetError(f"player {i}: {x[i].tolist()} is not in the action set")
        return idx

    def r_value(self, i: int, x) -> float:
        return float(self.r[i][self.index_of(i, x)])

    @cached_property
    def envelopes(self) -> tuple[Envelope, ...]:
        return tuple(build_envelope(s, ri) for s, ri in zip(self.action_sets, self.r))

    # serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "weights": self.weights.tolist(),
            "action_sets": [s.tolist() for s in self.action_sets],
            "g": [gt.to_dict() for gt in self.g],
            "h": [hi.to_dict() for hi in self.h],
            "r": [ri.tolist() for ri in self.r],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Game":
        try:
            game = cls(d["weights"], d["action_sets"],
                       [FunctionSpec.from_dict(x) for x in d["g"]],
                       [FunctionSpec.from_dict(x) for x in d["h"]], d["r"])
        except (KeyError, TypeError) as exc:
            raise GameValidationError(f"malformed game document: {exc!r}") from exc
        if "n" in d and d["n"] != game.n:
            raise GameValidationError(f"n={d['n']} but {game.n} weights given")
        if "d" in d and d["d"] != game.d:
            raise GameValidationError(f"d={d['d']} but action points have dimension {game.d}")
        return game


@dataclass(frozen=True)
class Profile:
    """Actions of all players; ``tag`` is 'nonconvex' (x_i in X_i) or 'convexified'."""

    actions: np.ndarray
    tag: str = "convexified"

    @classmethod
    def nonconvex(cls, game: Game, actions) -> "Profile":
        arr = _as_actions(game, actions)
        for i in range(game.n):
            arr[i] = game.action_sets[i][game.index_of(i, arr[i])]
        return cls(arr, "nonconvex")


def _as_actions(game: Game, profile) -> np.ndarray:
    arr = profile.actions if isinstance(profile, Profile) else profile
    arr = np.array(arr, dtype=float)
    if arr.ndim == 1 and game.d == 1:
        arr = arr[:, None]
    if arr.shape != (game.n, game.d):
        raise ValueError(f"profile has shape {arr.shape}, expected {(game.n, game.d)}")
    return arr


def derive_constants(game: Game) -> Constants:
    return game.constants


def aggregate(game: Game, profile) -> np.ndarray:
    """(1/n) sum_j a_j x_j."""
    x = _as_actions(game, profile)
    return game.weights @ x / game.n


def cost(game: Game, i: int, profile) -> float:
    x = _as_actions(game, profile)
    r_i = game.r_value(i, x[i])
    s = aggregate(game, x)
    return float(game.price(s) @ x[i]) + game.h_value(i, s) + r_i


def action_costs(game: Game, profile) -> np.ndarray:
    """f_i(y, x_-i) for every player i and every y in X_i, shape (n, kmax).

    Padding slots repeat the first action so min/max over a row are unaffected.
    """
    return batch_action_costs(game, _as_actions(game, profile)[None])[0]


def batch_action_costs(game: Game, X: np.ndarray) -> np.ndarray:
    """action_costs for a stack of profiles X of shape (S, n, d) -> (S, n, kmax).

    einsum keeps the summation order independent of S, so a profile gives the
    same bits alone or inside a batch.
    """
    a = game.weights
    total = np.einsum("j,sjd->sd", a, X)
    base = total[:, None, :] - a[None, :, None] * X  # (S, n, d)
    s = (base[:, :, None, :] + a[None, :, None, None] * game.actions_pad[None]) / game.n
    lin = (game.price(s) * game.actions_pad[None]).sum(axis=-1)
    h = game.h_all(np.moveaxis(s, 1, 0))  # (n, S, k)
    return lin + np.moveaxis(h, 0, 1) + game.r_pad[None]


@dataclass
class AuxiliaryGame:
    """The game with each player's own price contribution frozen at an anchor."""

    base: Game
    anchors: np.ndarray = None
    _anchor_idx: list = field(default=None, repr=False)

    def __post_init__(self):
        game = self.base
        if self.anchors is None:
            self.anchors = np.array([s[0] for s in game.action_sets])
        self.anchors = _as_actions(game, self.anchors)
        self._anchor_idx = [game.index_of(i, self.anchors[i]) for i in range(game.n)]

    @property
    def n(self):
        return self.base.n

    @property
    def d(self):
        return self.base.d

    def anchored_price(self, profile) -> np.ndarray:
        """g((1/n) sum_{j != i} a_j x_j + (1/n) a_i x_i^+) for every i, shape (n, d)."""
        game = self.base
        x = _as_actions(game, profile)
        a = game.weights
        s = (a @ x)[None, :] + a[:, None] * (self.anchors - x)
        return game.price(s / game.n)

    def to_dict(self) -> dict:
        out = self.base.to_dict()
        out["anchors"] = self.anchors.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "AuxiliaryGame":
        game = Game.from_dict(d)
        anchors = d.get("anchors")
        try:
            return cls(game, None if anchors is None else np.asarray(anchors, dtype=float))
        except (ValueError, NotInActionSetError) as exc:
            raise GameValidationError(f"bad anchors: {exc}") from exc


def auxiliary_cost(aux: AuxiliaryGame, i: int, x_i, profile) -> float:
    """Anchored cost of player i playing x_i against the others in ``profile``.

    x_i may lie in conv X_i; off the action set the local term is the envelope.
    """
    game = aux.base
    x = _as_actions(game, profile)
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    price = aux.anchored_price(x)[i]
    try:
        r_term = game.r_value(i, x_i)
    except NotInActionSetError:
        r_term = game.envelopes[i](x_i)
    return float(price @ x_i) + r_term


def load_instance(path) -> AuxiliaryGame:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameValidationError(f"{path}: not valid JSON ({exc})") from exc
    return AuxiliaryGame.from_dict(doc)


def dump_instance(aux: AuxiliaryGame, path) -> None:
    with open(path, "w") as fh:
        json.dump(aux.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
