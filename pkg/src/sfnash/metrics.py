"""Equilibrium quality by exhaustive best responses over the finite action sets."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .disaggregation import MixedProfile
from .envelope import eval_envelope
from .game import AuxiliaryGame, Constants, Game, _as_actions, action_costs, batch_action_costs
from .rng import make_rng


@dataclass(frozen=True)
class EquilibriumReport:
    best_response: np.ndarray  # (n, d)
    best_cost: np.ndarray
    current_cost: np.ndarray
    worst_cost: np.ndarray
    additive_eps: float
    relative_eps: float
    theory_bound: float | None = None

    @property
    def gaps(self) -> np.ndarray:
        return self.current_cost - self.best_cost

    @property
    def relative_gaps(self) -> np.ndarray:
        return _ratio(self.gaps, self.worst_cost - self.best_cost)

    def to_dict(self) -> dict:
        return {
            "additive_eps": self.additive_eps,
            "relative_eps": self.relative_eps,
            "theory_bound": self.theory_bound,
            "best_response": self.best_response.tolist(),
            "best_cost": self.best_cost.tolist(),
            "current_cost": self.current_cost.tolist(),
            "worst_cost": self.worst_cost.tolist(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["player", "current", "best", "worst", "gap", "relative_gap"])
        for i, row in enumerate(zip(self.current_cost, self.best_cost, self.worst_cost,
                                    self.gaps, self.relative_gaps)):
            out.writerow([i] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def save(self, json_path, csv_path=None) -> None:
        with open(json_path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        if csv_path is not None:
            with open(csv_path, "w", newline="") as fh:
                fh.write(self.to_csv())


def _ratio(gap, span):
    gap = np.asarray(gap, dtype=float)
    span = np.asarray(span, dtype=float)
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, np.clip(gap / safe, 0.0, 1.0), 0.0)


def relative_gap(costs, current: int) -> float:
    """(f_current - min) / (max - min) for one player's action costs; 0/0 -> 0."""
    costs = np.asarray(costs, dtype=float)
    lo, hi = costs.min(), costs.max()
    return float(_ratio(costs[current] - lo, hi - lo))


def best_response(game: Game, i: int, profile) -> tuple[np.ndarray, float]:
    """Exhaustive minimiser of f_i(., x_-i) over X_i; x_i in ``profile`` is ignored."""
    x = _as_actions(game, profile)
    a = game.weights
    pts = game.action_sets[i]
    s = (a @ x - a[i] * x[i] + a[i] * pts) / game.n  # (k, d)
    lin = (game.price(s) * pts).sum(axis=1)
    h = np.array([game.h_value(i, row) for row in s])
    vals = lin + h + game.r[i]
    j = int(np.argmin(vals))  # first minimum: ties go to the smaller index
    return pts[j].copy(), float(vals[j])


def _current_index(game: Game, x: np.ndarray) -> np.ndarray:
    return game.indices_of(x)


def _report(game: Game, costs: np.ndarray, cur_idx: np.ndarray, theory_bound=None):
    masked_lo = np.where(game.mask, costs, np.inf)
    masked_hi = np.where(game.mask, costs, -np.inf)
    best_idx = masked_lo.argmin(axis=1)
    rows = np.arange(game.n)
    best = masked_lo[rows, best_idx]
    worst = masked_hi.max(axis=1)
    current = costs[rows, cur_idx]
    gaps = current - best
    rel = _ratio(gaps, worst - best)
    return EquilibriumReport(
        best_response=game.actions_pad[rows, best_idx].copy(),
        best_cost=best, current_cost=current, worst_cost=worst,
        additive_eps=float(max(gaps.max(), 0.0)), relative_eps=float(rel.max()),
        theory_bound=theory_bound,
    )


def additive_epsilon(game: Game, profile, theory_bound: float | None = None) -> EquilibriumReport:
    """Best-response gaps of a profile with every x_i in X_i."""
    x = _as_actions(game, profile)
    return _report(game, action_costs(game, x), _current_index(game, x), theory_bound)


def relative_epsilon(game: Game, profile) -> float:
    return additive_epsilon(game, profile).relative_eps


def auxiliary_report(aux: AuxiliaryGame, profile) -> EquilibriumReport:
    """Same metrics for the anchored game (no h term, own contribution frozen)."""
    game = aux.base
    x = _as_actions(game, profile)
    price = aux.anchored_price(x)  # (n, d)
    costs = np.einsum("nd,nkd->nk", price, game.actions_pad) + game.r_pad
    return _report(game, costs, _current_index(game, x))


def mixed_epsilon(game: Game, mixed: MixedProfile, samples: int = 1000, seed: int = 0,
                  chunk: int = 512) -> tuple[float, float]:
    """Monte-Carlo estimate of the largest expected deviation gain.

    All deviations y are scored against the same draws of X_-i. Returns the
    estimate and a 95% normal-approximation half-width for the maximising pair.
    """
    if samples < 100:
        raise ValueError("mixed_epsilon needs at least 100 samples")
    rng = make_rng(seed)
    idx = mixed.sample_indices(rng, samples)  # (S, n)
    to_action = [np.array([game.index_of(i, z) for z in mixed.supports[i]]) for i in range(game.n)]
    act_idx = np.stack([to_action[i][idx[:, i]] for i in range(game.n)], axis=1)
    rows = np.arange(game.n)
    sums = np.zeros((game.n, game.actions_pad.shape[1]))
    sq = np.zeros_like(sums)
    shift = None
    for start in range(0, samples, chunk):
        ai = act_idx[start:start + chunk]
        X = game.actions_pad[rows[None, :], ai]  # (S, n, d)
        costs = batch_action_costs(game, X)
        cur = np.take_along_axis(costs, ai[:, :, None], axis=2)
        diff = cur - costs
        if shift is None:
            # accumulate around the first draw: exact for degenerate profiles, stabler variance
            shift = diff[0].copy()
        diff -= shift
        sums += diff.sum(axis=0)
        sq += (diff ** 2).sum(axis=0)
    centred = sums / samples
    mean = np.where(game.mask, shift + centred, -np.inf)
    flat = int(np.argmax(mean))
    i, y = divmod(flat, mean.shape[1])
    var = max(sq[i, y] / samples - centred[i, y] ** 2, 0.0) * samples / (samples - 1)
    half = 1.959963984540054 * math.sqrt(var / samples)
    return float(max(mean[i, y], 0.0)), half


def stability_slack(aux: AuxiliaryGame, profile, witnesses) -> float:
    """Smallest eta for which the profile is eta-stable w.r.t. the given generators."""
    game = aux.base
    x = _as_actions(game, profile)
    price = aux.anchored_price(x)
    worst = -np.inf
    for i, (env, w) in enumerate(zip(game.envelopes, witnesses)):
        here = float(price[i] @ x[i]) + eval_envelope(env, x[i])[0]
        for z in w.support:
            worst = max(worst, float(price[i] @ z) + eval_envelope(env, z)[0] - here)
    return float(worst)


def theorem_bound(c: Constants, delta: float) -> float:
    """Additive guarantee for the deterministic disaggregation after enough sweeps."""
    n, q = c.n, c.d
    return 2 * c.L_g * c.M * c.Delta * (n ** -delta + (q + 4) * c.Delta / n) + c.L_h * c.M * c.Delta / n


def mixed_bound(c: Constants, delta: float) -> float:
    """Expected-gap guarantee for the randomized disaggregation."""
    n = c.n
    return (2 * c.L_g * c.M * c.Delta * (n ** -delta + (math.sqrt(n) + 4) * c.Delta / n)
            + c.L_h * c.M * c.Delta / n)


def sweeps_required(c: Constants, delta: float) -> int:
    """Smallest K with K >= 2C/(m^2 L_g) n^(1+2 delta) + 1."""
    if c.L_g == 0:
        return 1
    return int(math.ceil(2 * c.C / (c.m ** 2 * c.L_g) * c.n ** (1 + 2 * delta) + 1))


def omega_additive_bound(c: Constants, omega: float) -> float:
    """Additive bound on the original game implied by an omega-level iterate."""
    q, n = c.d, c.n
    return (2 * omega * c.Delta + 2 * c.L_g * c.Delta * (math.sqrt(q) + 1) * c.M * c.Delta / n
            + c.L_h * c.M * c.Delta / n + 2 * c.L_g * c.M * c.Delta ** 2 / n)
