"""Electric-vehicle charging benchmark.

Each vehicle arrives in the evening, leaves the next morning and charges
contiguously from arrival at one of two constant powers. Its action is the
share of the battery capacity drawn during peak hours. The resulting game is
one-dimensional with

    g(y) = (a_P - a_OP)/n + beta0 e (2y - 1)
    h(y) = a_OP/n + beta0 e (1 - y)
    r_i(x) = (x - x_high)^2 / (1 - tau_i)

and player weights 1 - tau_i, where a_P and a_OP are affine in n.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .disaggregation import sf_disaggregate
from .envelope import eval_envelope
from .functions import FunctionSpec
from .game import AuxiliaryGame, Game
from .metrics import auxiliary_report, additive_epsilon, omega_additive_bound
from .rng import derive_seed, make_rng
from .solver import SolverConfig, omega_bound, run

MAX_RESAMPLE = 100
DESK_GRID = tuple(2 ** k for k in range(6, 11))
FULL_GRID = tuple(2 ** k for k in range(6, 16))

CSV_COLUMNS = ("instance_id", "n", "k", "relative_eps", "additive_eps", "deviation", "omega",
               "relative_eps_aux", "step_norm", "potential", "omega_additive_bound",
               "omega_relative_bound")


@dataclass
class EVParams:
    e: float = 40.0
    p_min: float = 3.7
    p_max: float = 7.0
    peak_window: tuple = (6.0, 22.0)
    alpha0P_coeffs: tuple = (-4.17, 0.59 * 12)
    alpha0OP_coeffs: tuple = (-4.17, 0.59 * 8)
    beta0: float = 0.295
    kappa: float = 1.0
    arrival_window: tuple = (17.0, 19.0)
    departure_window: tuple = (7.0, 9.0)  # next morning
    soc_beta: tuple = (2, 5)
    instances: int = 10
    n_grid: tuple = DESK_GRID
    K: int = 100
    seed: int = 0

    def __post_init__(self):
        self.peak_window = tuple(float(v) for v in self.peak_window)
        self.arrival_window = tuple(float(v) for v in self.arrival_window)
        self.departure_window = tuple(float(v) for v in self.departure_window)
        self.alpha0P_coeffs = tuple(float(v) for v in self.alpha0P_coeffs)
        self.alpha0OP_coeffs = tuple(float(v) for v in self.alpha0OP_coeffs)
        self.soc_beta = tuple(int(v) for v in self.soc_beta)
        self.n_grid = tuple(int(v) for v in self.n_grid)
        if not 0 < self.p_min <= self.p_max:
            raise ValueError("need 0 < p_min <= p_max")
        if self.e <= 0 or self.beta0 <= 0 or self.kappa <= 0:
            raise ValueError("e, beta0 and kappa must be positive")
        if min(self.soc_beta) < 1:
            raise ValueError("soc_beta shape parameters must be positive integers")
        if self.instances < 1 or self.K < 1 or not self.n_grid or min(self.n_grid) < 1:
            raise ValueError("instances, K and every n must be at least 1")

    @classmethod
    def full_scale(cls, **kw) -> "EVParams":
        kw.setdefault("n_grid", FULL_GRID)
        kw.setdefault("instances", 50)
        return cls(**kw)

    def alpha0P(self, n: int) -> float:
        return self.alpha0P_coeffs[0] + self.alpha0P_coeffs[1] * n

    def alpha0OP(self, n: int) -> float:
        return self.alpha0OP_coeffs[0] + self.alpha0OP_coeffs[1] * n

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "EVParams":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown EV parameters: {sorted(extra)}")
        return cls(**d)


# samplers ----------------------------------------------------------------

def von_mises(rng: np.random.Generator, kappa: float) -> float:
    """One draw on [-pi, pi] by Best and Fisher's wrapped-Cauchy rejection."""
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    while True:
        u1, u2, u3 = rng.random(3)
        z = math.cos(math.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        if c * (2.0 - c) - u2 > 0 or math.log(c / u2) + 1.0 - c >= 0:
            break
    return math.copysign(math.acos(max(-1.0, min(1.0, f))), u3 - 0.5)


def beta_int(rng: np.random.Generator, a: int, b: int) -> float:
    """Beta(a, b) for integer shapes: the a-th smallest of a + b - 1 uniforms."""
    u = np.sort(rng.random(a + b - 1))
    return float(u[a - 1])


def in_window(theta: float, window) -> float:
    lo, hi = window
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * theta / math.pi


def peak_overlap(start: float, end: float, peak) -> float:
    """Hours of [start, end] inside the daily peak window (hours may exceed 24)."""
    lo, hi = peak
    total = 0.0
    for day in range(int(math.floor(start / 24.0)) - 1, int(math.floor(end / 24.0)) + 1):
        a, b = lo + 24.0 * day, hi + 24.0 * day
        total += max(0.0, min(end, b) - max(start, a))
    return total


def peak_fraction(arrival: float, tau: float, p: float, params: EVParams) -> float:
    """Peak energy over capacity when charging at power p from arrival."""
    need = (1.0 - tau) * params.e
    return p * peak_overlap(arrival, arrival + need / p, params.peak_window) / params.e


# instances ---------------------------------------------------------------

@dataclass
class EVInstance:
    params: EVParams
    n: int
    seed: int
    arrival: np.ndarray
    departure: np.ndarray
    tau: np.ndarray
    x_low: np.ndarray
    x_high: np.ndarray
    resamples: int = 0

    @property
    def x_ref(self) -> np.ndarray:
        return self.x_high

    def to_dict(self) -> dict:
        return {
            "n": self.n, "seed": self.seed, "resamples": self.resamples,
            "params": self.params.to_dict(),
            "arrival": self.arrival.tolist(), "departure": self.departure.tolist(),
            "tau": self.tau.tolist(), "x_low": self.x_low.tolist(), "x_high": self.x_high.tolist(),
        }


def sample_instance(params: EVParams, n: int, seed: int) -> EVInstance:
    rng = make_rng(seed)
    arr, dep, tau, lo, hi = (np.empty(n) for _ in range(5))
    resamples = 0
    for i in range(n):
        for attempt in range(MAX_RESAMPLE + 1):
            t_a = in_window(von_mises(rng, params.kappa), params.arrival_window)
            t_d = 24.0 + in_window(von_mises(rng, params.kappa), params.departure_window)
            s = beta_int(rng, *params.soc_beta)
            need = (1.0 - s) * params.e
            # both charging plans must end before departure
            if 0.0 < s < 1.0 and t_a + need / params.p_min <= t_d:
                break
            resamples += 1
        else:
            raise ValueError(f"player {i}: no feasible draw after {MAX_RESAMPLE} resamples")
        x_a = peak_fraction(t_a, s, params.p_min, params)
        x_b = peak_fraction(t_a, s, params.p_max, params)
        arr[i], dep[i], tau[i] = t_a, t_d, s
        lo[i], hi[i] = min(x_a, x_b), max(x_a, x_b)
    return EVInstance(params, n, int(seed), arr, dep, tau, lo, hi, resamples)


def build_game(instance: EVInstance) -> Game:
    p, n = instance.params, instance.n
    be = p.beta0 * p.e
    g = FunctionSpec.affine((p.alpha0P(n) - p.alpha0OP(n)) / n - be, 2 * be)
    h = FunctionSpec.affine(p.alpha0OP(n) / n + be, -be)
    sets, tables = [], []
    for lo, hi, t in zip(instance.x_low, instance.x_high, instance.tau):
        if hi - lo <= 1e-12:
            sets.append([hi])
            tables.append([0.0])
        else:
            sets.append([lo, hi])
            tables.append([(lo - hi) ** 2 / (1 - t), 0.0])
    return Game(1.0 - instance.tau, sets, [g], [h] * n, tables)


# experiment --------------------------------------------------------------

def checkpoint_rows(aux: AuxiliaryGame, report, instance_id: int) -> list[dict]:
    """One row per sweep k = 1..K; after an early stop the last iterate is repeated."""
    game = aux.base
    c = game.constants
    traj = report.trajectory
    rows = []
    for k in range(1, report.K + 1):
        kk = min(k, report.iterations)
        x = traj[kk]
        wits = [eval_envelope(env, xi)[1] for env, xi in zip(game.envelopes, x)]
        dis = sf_disaggregate(x, wits, game.weights, Delta=c.Delta)
        rep = additive_epsilon(game, dis.actions)
        spans = rep.worst_cost - rep.best_cost
        pos = spans[spans > 0]
        om = omega_bound(k, game.n, c)
        add_bound = omega_additive_bound(c, om)
        if pos.size:
            # every player's gap is below add_bound, so its ratio is below add_bound / its span
            rel_bound = min(1.0, add_bound / float(pos.min()))
        else:
            rel_bound = 0.0
        rows.append({
            "instance_id": instance_id, "n": game.n, "k": k,
            "relative_eps": rep.relative_eps, "additive_eps": rep.additive_eps,
            "deviation": dis.aggregate_deviation, "omega": om,
            "relative_eps_aux": auxiliary_report(aux, dis.actions).relative_eps,
            "step_norm": report.step_norms[kk - 1], "potential": report.potential[kk],
            "omega_additive_bound": add_bound, "omega_relative_bound": rel_bound,
        })
    return rows


def run_instance(params: EVParams, n: int, instance_id: int) -> list[dict]:
    seed = derive_seed(params.seed, n, instance_id)
    inst = sample_instance(params, n, seed)
    aux = AuxiliaryGame(build_game(inst))
    report = run(aux, SolverConfig(K=params.K, seed=derive_seed(seed, 1)))
    return checkpoint_rows(aux, report, instance_id)


def _job(args):
    params, n, i = args
    try:
        return (n, i, run_instance(params, n, i), None)
    except Exception as exc:  # recorded, the sweep carries on
        return (n, i, [], f"{type(exc).__name__}: {exc}")


@dataclass
class ExperimentResult:
    rows: list
    failures: list = field(default_factory=list)  # (instance_id, n, message)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for row in self.rows:
            out.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def summary(self) -> list[dict]:
        """Mean relative error per (n, k) with log-scale columns for plotting."""
        groups: dict = {}
        for row in self.rows:
            groups.setdefault((row["n"], row["k"]), []).append(row["relative_eps"])
        out = []
        for (n, k), vals in sorted(groups.items()):
            v = np.array(vals)
            mean = float(v.mean())
            out.append({
                "n": n, "k": k, "count": v.size, "mean_relative_eps": mean,
                "std_relative_eps": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                "log2_n": math.log2(n), "log10_k": math.log10(k),
                "log10_mean_relative_eps": math.log10(mean) if mean > 0 else float("-inf"),
            })
        return out

    def plot_csv(self) -> str:
        rows = self.summary()
        cols = ("n", "k", "count", "mean_relative_eps", "std_relative_eps", "log2_n", "log10_k",
                "log10_mean_relative_eps")
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(cols)
        for row in rows:
            out.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()

    def failures_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["instance_id", "n", "error"])
        out.writerows(self.failures)
        return buf.getvalue()

    def save(self, out_dir) -> dict:
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "table": os.path.join(out_dir, "experiment.csv"),
            "plot": os.path.join(out_dir, "plot_data.csv"),
            "failures": os.path.join(out_dir, "failures.csv"),
        }
        for key, text in (("table", self.to_csv()), ("plot", self.plot_csv()),
                          ("failures", self.failures_csv())):
            with open(paths[key], "w", newline="") as fh:
                fh.write(text)
        return paths


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def run_experiment(params: EVParams, jobs: int = 1) -> ExperimentResult:
    tasks = [(params, n, i) for n in params.n_grid for i in range(params.instances)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    rows, failures = [], []
    for n, i, r, err in results:
        rows.extend(r)
        if err is not None:
            failures.append((i, n, err))
    rows.sort(key=lambda row: (row["instance_id"], row["n"], row["k"]))
    failures.sort()
    return ExperimentResult(rows, failures)


def save_params(params: EVParams, path) -> None:
    with open(path, "w") as fh:
        json.dump(params.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
