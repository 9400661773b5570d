"""Command-line front end: gen, solve, disaggregate, verify, bench.

Exit status is 0 on success, 1 for invalid input and 2 for numerical failure.
The default output directory comes from $SFNASH_OUT (else ./out).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .disaggregation import sf_disaggregate
from .envelope import GeneratorWitness
from .errors import GameValidationError, NumericalError
from .ev import EVParams, build_game, run_experiment, sample_instance
from .game import AuxiliaryGame, dump_instance, load_instance
from .metrics import additive_epsilon, theorem_bound
from .solver import SolverConfig, run, save_report

COMMANDS = ("gen", "solve", "disaggregate", "verify", "bench")
OUT_ENV = "SFNASH_OUT"


@dataclass
class RunConfig:
    command: str
    out: str
    input: str | None = None
    report: str | None = None
    profile: str | None = None
    n: list = field(default_factory=list)
    K: int | None = None
    seed: int = 0
    jobs: int = 1
    full_scale: bool = False
    ev: dict = field(default_factory=dict)
    verbose: int = 0


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise GameValidationError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise GameValidationError(f"{path}: not valid JSON ({exc})") from exc


def _ev_params(cfg: RunConfig) -> EVParams:
    kw = dict(cfg.ev)
    kw.setdefault("seed", cfg.seed)
    if cfg.n:
        kw["n_grid"] = cfg.n
    if cfg.K is not None:
        kw["K"] = cfg.K
    return EVParams.full_scale(**kw) if cfg.full_scale else EVParams.from_dict(kw)


def _need(value, flag):
    if value is None:
        raise GameValidationError(f"{flag} is required for this command")
    return value


def cmd_gen(cfg: RunConfig) -> list[str]:
    params = _ev_params(cfg)
    n = cfg.n[0] if cfg.n else params.n_grid[0]
    inst = sample_instance(params, n, cfg.seed)
    paths = [os.path.join(cfg.out, "instance.json"), os.path.join(cfg.out, "ev_instance.json")]
    dump_instance(AuxiliaryGame(build_game(inst)), paths[0])
    _write_json(paths[1], inst.to_dict())
    print(f"gen: n={n} seed={cfg.seed} resamples={inst.resamples}")
    return paths


def cmd_solve(cfg: RunConfig) -> list[str]:
    aux = load_instance(_need(cfg.input, "--input"))
    sc = SolverConfig(K=cfg.K if cfg.K is not None else 100, seed=cfg.seed, keep_trajectory=True)
    try:
        report = run(aux, sc)
    except NumericalError as exc:
        raise NumericalError(f"solver: {exc}") from exc
    paths = [os.path.join(cfg.out, "solve.json"), os.path.join(cfg.out, "trace.csv")]
    save_report(report, *paths)
    print(f"solve: iterations={report.iterations} k*={report.k_star} "
          f"step={report.step_norms[report.k_star - 1]!r} omega={report.omega!r}")
    return paths


def cmd_disaggregate(cfg: RunConfig) -> list[str]:
    aux = load_instance(_need(cfg.input, "--input"))
    doc = _read_json(_need(cfg.report, "--report"))
    try:
        x = np.asarray(doc["x_kstar"], dtype=float)
        wits = [GeneratorWitness.from_dict(w) for w in doc["witnesses"]]
    except (KeyError, TypeError) as exc:
        raise GameValidationError(f"{cfg.report}: not a solve report ({exc})") from exc
    game = aux.base
    res = sf_disaggregate(x, wits, game.weights, Delta=game.constants.Delta)
    path = os.path.join(cfg.out, "disaggregation.json")
    res.save(path)
    print(f"disaggregate: deviation={res.aggregate_deviation!r} bound={res.bound!r} "
          f"fractional={len(res.fractional_players)}")
    return [path]


def cmd_verify(cfg: RunConfig) -> list[str]:
    aux = load_instance(_need(cfg.input, "--input"))
    doc = _read_json(_need(cfg.profile, "--profile"))
    actions = doc["actions"] if isinstance(doc, dict) else doc
    game = aux.base
    rep = additive_epsilon(game, actions, theory_bound=theorem_bound(game.constants, 0.5))
    paths = [os.path.join(cfg.out, "verify.json"), os.path.join(cfg.out, "verify.csv")]
    rep.save(*paths)
    print(f"verify: additive_eps={rep.additive_eps!r} relative_eps={rep.relative_eps!r}")
    return paths


def cmd_bench(cfg: RunConfig) -> list[str]:
    params = _ev_params(cfg)
    res = run_experiment(params, jobs=cfg.jobs)
    paths = res.save(cfg.out)
    for n, i, err in ((f[1], f[0], f[2]) for f in res.failures):
        print(f"bench: instance {i} at n={n} failed: {err}", file=sys.stderr)
    print(f"bench: rows={len(res.rows)} failures={len(res.failures)}")
    return [paths["table"], paths["plot"], paths["failures"]]


HANDLERS = {"gen": cmd_gen, "solve": cmd_solve, "disaggregate": cmd_disaggregate,
            "verify": cmd_verify, "bench": cmd_bench}


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, so they exit with 1 rather than argparse's 2
    def error(self, message):
        raise GameValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sfnash", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file of option values; flags override it")
    ap.add_argument("--input", help="instance JSON (solve, disaggregate, verify)")
    ap.add_argument("--report", help="solve report JSON (disaggregate)")
    ap.add_argument("--profile", help="profile JSON with an 'actions' list (verify)")
    ap.add_argument("--n", type=int, nargs="+", help="player count(s)")
    ap.add_argument("--K", type=int, help="number of sweeps")
    ap.add_argument("--seed", type=int, help="master seed")
    ap.add_argument("--jobs", type=int, help="parallel bench jobs")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    ap.add_argument("--full-scale", action="store_true", default=None,
                    help="bench: n up to 2^15 and 50 instances")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def resolve(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    base = _read_json(args.config) if args.config else {}
    if not isinstance(base, dict):
        raise GameValidationError("--config must hold a JSON object")
    base = dict(base)
    ev = base.pop("ev", {})
    flags = {"input": args.input, "report": args.report, "profile": args.profile, "n": args.n,
             "K": args.K, "seed": args.seed, "jobs": args.jobs, "out": args.out,
             "full_scale": args.full_scale}
    merged = {**base, **{k: v for k, v in flags.items() if v is not None}}
    unknown = set(merged) - set(flags)
    if unknown:
        raise GameValidationError(f"unknown config keys: {sorted(unknown)}")
    n = merged.get("n") or []
    cfg = RunConfig(
        command=args.command,
        out=merged.get("out") or os.environ.get(OUT_ENV) or "out",
        input=merged.get("input"), report=merged.get("report"), profile=merged.get("profile"),
        n=[int(v) for v in ([n] if isinstance(n, int) else n)],
        K=merged.get("K"), seed=int(merged.get("seed", 0)), jobs=int(merged.get("jobs", 1)),
        full_scale=bool(merged.get("full_scale", False)), ev=ev, verbose=args.verbose,
    )
    if cfg.jobs < 1:
        raise GameValidationError("--jobs must be at least 1")
    if cfg.K is not None and cfg.K < 1:
        raise GameValidationError("--K must be at least 1")
    if any(v < 1 for v in cfg.n):
        raise GameValidationError("--n values must be at least 1")
    return cfg


def dispatch(cfg: RunConfig) -> list[str]:
    os.makedirs(cfg.out, exist_ok=True)
    return HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = resolve(argv)
        dispatch(cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GameValidationError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
