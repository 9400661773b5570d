"""Cyclic gradient-proximal sweeps on the convexified auxiliary game.

Each sweep updates players 1..n in order. Player i sees the price at the
mid-sweep aggregate (updated players at their new action, the rest at the old
one) and solves

    min_{x in conv X_i}  <price, x - x_prev> + (a_i L_g / 2n) ||x - x_prev||^2 + env_i(x)

exactly: a lower-hull scan in one dimension, a simplex QP over the tabulated
points otherwise.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .envelope import Envelope, GeneratorWitness, caratheodory_reduce, eval_envelope
from .errors import InnerSolveError, NumericalError
from .game import AuxiliaryGame, Constants, Game, _as_actions
from .rng import make_rng
from .simplex_qp import solve_simplex_qp

INIT_MODES = ("anchor", "uniform-vertex", "provided")


@dataclass
class SolverConfig:
    K: int = 100
    step_tol: float = 1e-12
    inner_tol: float = 1e-12
    seed: int = 0
    init: str = "anchor"
    x0: np.ndarray | None = None
    keep_trajectory: bool = True

    def __post_init__(self):
        if int(self.K) < 1:
            raise ValueError("K must be at least 1")
        self.K = int(self.K)
        if not (self.step_tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}")
        if self.init == "provided" and self.x0 is None:
            raise ValueError("init='provided' needs x0")


@dataclass
class SolveReport:
    step_norms: list[float]
    potential: list[float]  # potential[k] = G(x^k), k = 0..iterations
    k_star: int
    x_kstar: np.ndarray
    witnesses: list[GeneratorWitness]
    omega: float
    eta_kstar: float
    K: int
    constants: Constants
    trajectory: np.ndarray | None = None  # (iterations + 1, n, d)
    x_final: np.ndarray = field(default=None)

    @property
    def iterations(self) -> int:
        return len(self.step_norms)

    def to_dict(self, include_trajectory: bool = False) -> dict:
        out = {
            "K": self.K,
            "iterations": self.iterations,
            "k_star": self.k_star,
            "step_norms": list(self.step_norms),
            "potential": list(self.potential),
            "omega": self.omega,
            "eta_kstar": self.eta_kstar,
            "x_kstar": self.x_kstar.tolist(),
            "x_final": self.x_final.tolist(),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "constants": self.constants.to_dict(),
        }
        if include_trajectory and self.trajectory is not None:
            out["trajectory"] = self.trajectory.tolist()
        return out

    def trace_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["k", "step_norm", "potential"])
        out.writerow([0, "", repr(self.potential[0])])
        for k, (s, p) in enumerate(zip(self.step_norms, self.potential[1:]), start=1):
            out.writerow([k, repr(s), repr(p)])
        return buf.getvalue()


def omega_bound(K: int, n: int, c: Constants) -> float:
    """Approximation level reached after K sweeps with n players."""
    first = math.sqrt(2 * c.C * c.L_g) * c.M / c.m * math.sqrt(n / K)
    return first + 2 * c.L_g * c.M * c.Delta / n


def eta(u: float, c: Constants) -> float:
    return c.L_g * c.M * u / math.sqrt(c.n) + 2 * c.L_g * c.M * c.Delta / c.n


def step_budget(c: Constants) -> float:
    """Upper bound on the sum of squared sweep steps."""
    if c.L_g == 0:
        return math.inf
    return 2 * c.n ** 2 * c.C / (c.m ** 2 * c.L_g)


def certificate_bound(c: Constants, K: int) -> float:
    """Bound on the smallest step norm among the first K sweeps."""
    if c.L_g == 0:
        return math.inf
    return math.sqrt(2 * c.C) * c.n / (c.m * math.sqrt(c.L_g * K))


def potential(game_or_aux, profile, r_values=None) -> float:
    """sum_t G_t(s_t) + sum_j (a_j/n) env_j(x_j), with G_t(D1) = 0.

    ``r_values`` may carry envelope values already known for the profile.
    """
    game: Game = game_or_aux.base if isinstance(game_or_aux, AuxiliaryGame) else game_or_aux
    x = _as_actions(game, profile)
    s = game.weights @ x / game.n
    D1 = game.constants.D1
    g0 = sum(float(gt.antiderivative(s[t], D1)) for t, gt in enumerate(game.g))
    if r_values is None:
        r_values = [eval_envelope(env, xi)[0] for env, xi in zip(game.envelopes, x)]
    return g0 + float(np.dot(game.weights, r_values)) / game.n


def _prox_1d(hx, hv, slopes, p: float, c: float, xp: float):
    """Exact 1-D proximal step; returns (x, hull index left, weight on right or None)."""
    m = len(hx) - 1
    for j in range(m + 1):
        right = p + c * (hx[j] - xp) + (slopes[j] if j < m else math.inf)
        if right >= 0:
            return hx[j], j, None
        end = p + c * (hx[j + 1] - xp) + slopes[j]
        if end > 0:
            t = xp - (p + slopes[j]) / c
            t = min(max(t, hx[j]), hx[j + 1])
            if t == hx[j]:
                return hx[j], j, None
            if t == hx[j + 1]:
                return hx[j + 1], j + 1, None
            return t, j, (t - hx[j]) / (hx[j + 1] - hx[j])
    return hx[m], m, None  # unreachable: the last breakpoint has right = +inf


def _slopes(env: Envelope):
    hx, hv = env.hull_x, env.hull_v
    return [(hv[j + 1] - hv[j]) / (hx[j + 1] - hx[j]) for j in range(len(hx) - 1)]


def _witness_1d(hx, hv, j, w):
    if w is None:
        return GeneratorWitness.singleton([hx[j]], hv[j])
    weights = np.array([1.0 - w, w])
    return GeneratorWitness(np.array([[hx[j]], [hx[j + 1]]]), weights, np.array([hv[j], hv[j + 1]]))


def _prox_qp(env: Envelope, price, c: float, x_prev, tol: float, alpha0=None):
    Z, r = env.points, env.values
    Q = c * (Z @ Z.T)
    b = Z @ price - c * (Z @ x_prev) + r
    scale = max(1.0, float(np.abs(b).max()), float(np.abs(Q).max()))
    alpha, gap, _ = solve_simplex_qp(Q, b, alpha0=alpha0, tol=tol * scale)
    return alpha


def proximal_step(aux: AuxiliaryGame, i: int, price_vector, x_prev_i, env_i: Envelope,
                  inner_tol: float = 1e-12):
    """One player's update; returns (new action, generator witness)."""
    game = aux.base
    c = game.weights[i] * game.constants.L_g / game.n
    price = np.atleast_1d(np.asarray(price_vector, dtype=float))
    xp = np.atleast_1d(np.asarray(x_prev_i, dtype=float))
    if env_i.points.shape[0] == 1:
        return env_i.points[0].copy(), GeneratorWitness.singleton(env_i.points[0], env_i.values[0])
    if env_i.dim == 1:
        x, j, w = _prox_1d(env_i.hull_x, env_i.hull_v, _slopes(env_i), float(price[0]), c, float(xp[0]))
        return np.array([x]), _witness_1d(env_i.hull_x, env_i.hull_v, j, w)
    alpha = _prox_qp(env_i, price, c, xp, inner_tol)
    keep = alpha > 0
    wit = GeneratorWitness(env_i.points[keep], alpha[keep], env_i.values[keep])
    if len(wit) > env_i.dim + 1:
        wit = caratheodory_reduce(wit)
    return alpha @ env_i.points, wit


def initial_profile(aux: AuxiliaryGame, cfg: SolverConfig) -> np.ndarray:
    game = aux.base
    if cfg.init == "anchor":
        return aux.anchors.copy()
    if cfg.init == "provided":
        return _as_actions(game, cfg.x0)
    rng = make_rng(cfg.seed)
    return np.array([s[rng.integers(s.shape[0])] for s in game.action_sets])


def run(aux: AuxiliaryGame, cfg: SolverConfig) -> SolveReport:
    game = aux.base
    const = game.constants
    n, d = game.n, game.d
    a = game.weights
    envs = game.envelopes
    L_g = const.L_g
    x = initial_profile(aux, cfg)
    r_vals = np.array([eval_envelope(env, xi)[0] for env, xi in zip(envs, x)])
    pots = [potential(game, x, r_vals)]
    steps: list[float] = []
    traj = [x.copy()] if cfg.keep_trajectory else None

    one_d = d == 1
    if one_d:
        hulls = [(env.hull_x, env.hull_v, _slopes(env)) for env in envs]
        g0 = game.g[0]
        coef = [a[i] * L_g / n for i in range(n)]
        xs = x[:, 0].tolist()
    alphas: list = [None] * n

    for k in range(1, cfg.K + 1):
        x_prev = x.copy()
        if one_d:
            total = math.fsum(a[j] * xs[j] for j in range(n))
            for i in range(n):
                hx, hv, sl = hulls[i]
                if len(hx) == 1:
                    continue
                p = g0.scalar(total / n)
                xi, j, w = _prox_1d(hx, hv, sl, p, coef[i], xs[i])
                r_vals[i] = hv[j] if w is None else (1 - w) * hv[j] + w * hv[j + 1]
                total += a[i] * (xi - xs[i])
                xs[i] = xi
            x = np.array(xs)[:, None]
        else:
            total = a @ x
            for i in range(n):
                env = envs[i]
                if env.points.shape[0] == 1:
                    continue
                price = game.price(total / n)
                c = a[i] * L_g / n
                try:
                    alpha = _prox_qp(env, price, c, x[i], cfg.inner_tol, alphas[i])
                except InnerSolveError as exc:
                    raise InnerSolveError(f"sweep {k}, player {i}: {exc}", exc.gap) from exc
                alphas[i] = alpha
                xi = alpha @ env.points
                r_vals[i] = float(alpha @ env.values)
                total = total + a[i] * (xi - x[i])
                x[i] = xi
        step = float(np.linalg.norm(x - x_prev))
        steps.append(step)
        pots.append(potential(game, x, r_vals))
        if traj is not None:
            traj.append(x.copy())
        if step <= cfg.step_tol:
            break

    best = min(steps)
    k_star = max(k for k, s in enumerate(steps, start=1) if s == best)
    if traj is not None:
        x_kstar = traj[k_star].copy()
    elif k_star == len(steps):
        x_kstar = x.copy()
    else:
        raise NumericalError("k* iterate unavailable without a stored trajectory")
    witnesses = [eval_envelope(env, xi)[1] for env, xi in zip(envs, x_kstar)]
    return SolveReport(
        step_norms=steps,
        potential=pots,
        k_star=k_star,
        x_kstar=x_kstar,
        witnesses=witnesses,
        omega=omega_bound(cfg.K, n, const),
        eta_kstar=eta(steps[k_star - 1], const) * const.Delta,
        K=cfg.K,
        constants=const,
        trajectory=np.array(traj) if traj is not None else None,
        x_final=x.copy(),
    )


def save_report(report: SolveReport, json_path, csv_path=None, include_trajectory=False) -> None:
    with open(json_path, "w") as fh:
        json.dump(report.to_dict(include_trajectory), fh, indent=1, sort_keys=True)
        fh.write("\n")
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            fh.write(report.trace_csv())
