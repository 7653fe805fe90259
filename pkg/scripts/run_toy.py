"""Regret comparison on the two-context instance.

Runs every agent on the balanced (rho1=0.5) and unbalanced (rho1=0.99)
variants and writes one aggregate CSV per (algorithm, variant), plus a
summary table to stdout.  Defaults reproduce the desk-scale experiment:
50k steps, 20 seeds.

    python3 scripts/run_toy.py --out results/toy
    python3 scripts/run_toy.py --n 5000 --runs 4 --parallel 4   # quick pass
"""

import argparse
from pathlib import Path

import numpy as np

from solidbandit.envs import EnvConfig
from solidbandit.harness import AgentConfig, aggregate, aggregate_csv, default_checkpoints, run_many

ALGOS = ("solid", "linucb", "lints", "greedy", "uniform")
LINTS_V_SCALE = 3.0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=50_000)
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--parallel", type=int, default=8)
    parser.add_argument("--out", type=Path, default=Path("results/toy"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    checkpoints = default_checkpoints(args.n)
    for rho1, label in ((0.5, "balanced"), (0.99, "unbalanced")):
        env = EnvConfig(kind="toy", xi=0.1, rho1=rho1)
        print(f"--- toy xi=0.1 rho1={rho1} n={args.n} runs={args.runs}")
        for algo in ALGOS:
            agent = AgentConfig(kind=algo, lints_v_scale=LINTS_V_SCALE)
            traces = run_many(agent, env, args.n, args.runs, args.seed, args.parallel)
            agg = aggregate(traces, checkpoints)
            path = args.out / f"{algo}__{label}.csv"
            path.write_text(aggregate_csv(agg))
            finals = np.array([tr.cumulative[-1] for tr in traces])
            print(
                f"{algo:>8}: final regret {finals.mean():8.1f} "
                f"+- {finals.std(ddof=1) / np.sqrt(len(finals)):.1f}  -> {path}"
            )


if __name__ == "__main__":
    main()
