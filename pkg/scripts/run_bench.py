"""Run the EV benchmark and print the mean relative error table.

    python3 scripts/run_bench.py --out results/desk
    python3 scripts/run_bench.py --full-scale --jobs 8 --out results/full
"""

import argparse
import os
import time

from sfnash.ev import EVParams, run_experiment, save_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/desk")
    ap.add_argument("--n", type=int, nargs="+")
    ap.add_argument("--K", type=int, default=100)
    ap.add_argument("--instances", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--full-scale", action="store_true")
    args = ap.parse_args()

    kw = {"K": args.K, "seed": args.seed}
    if args.n:
        kw["n_grid"] = tuple(args.n)
    if args.instances:
        kw["instances"] = args.instances
    params = EVParams.full_scale(**kw) if args.full_scale else EVParams(**kw)

    t0 = time.perf_counter()
    res = run_experiment(params, jobs=args.jobs)
    res.save(args.out)
    save_params(params, os.path.join(args.out, "params.json"))

    table = {(r["n"], r["k"]): r["mean_relative_eps"] for r in res.summary()}
    ks = sorted({k for k in (1, 10, 100, params.K) if k <= params.K})
    print("n".rjust(6) + "".join(f"k={k}".rjust(10) for k in ks))
    for n in params.n_grid:
        print(f"{n:6d}" + "".join(f"{table.get((n, k), float('nan')):10.3f}" for k in ks))
    print(f"{len(res.rows)} rows, {len(res.failures)} failures, {time.perf_counter() - t0:.1f} s -> {args.out}")


if __name__ == "__main__":
    main()
