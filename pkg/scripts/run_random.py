"""Arm-count sweep on sparse random instances.

For each arm count, draws one instance per seed (d=8, four contexts) and runs
the primal-dual agent for 20k steps; reports how mean final regret scales
with the number of arms.

    python3 scripts/run_random.py
    python3 scripts/run_random.py --arms 4 16 --seeds 5
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from solidbandit.envs import EnvConfig
from solidbandit.harness import AgentConfig, run_many


def one_run(task: tuple[int, int, int, str]) -> float:
    n_arms, seed, n, algo = task
    env = EnvConfig(kind="random", n_arms=n_arms, seed=seed)
    trace = run_many(AgentConfig(kind=algo), env, n, 1, seed)[0]
    return float(trace.cumulative[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--arms", type=int, nargs="+", default=[4, 8, 16, 32])
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--n", type=int, default=20_000)
    parser.add_argument("--algo", default="solid")
    parser.add_argument("--parallel", type=int, default=8)
    parser.add_argument("--out", type=Path, default=Path("results/random__arms.csv"))
    args = parser.parse_args()

    lines = ["n_arms,mean_final_regret,sem"]
    with ProcessPoolExecutor(max_workers=args.parallel) as pool:
        for n_arms in args.arms:
            tasks = [(n_arms, s, args.n, args.algo) for s in range(args.seeds)]
            finals = np.array(list(pool.map(one_run, tasks)))
            sem = finals.std(ddof=1) / np.sqrt(len(finals))
            lines.append(f"{n_arms},{finals.mean():.17g},{sem:.17g}")
            print(f"|A|={n_arms:>3}: final regret {finals.mean():8.1f} +- {sem:.1f}")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")
    print(f"-> {args.out}")


if __name__ == "__main__":
    main()
