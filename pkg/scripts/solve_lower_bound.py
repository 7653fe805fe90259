"""Offline allocation solves for a chosen instance.

Prints the pure-exploration value and policy, the regret-per-log(n) constant
with its supporting quantities, and the z-normalized envelope; useful for
sizing lambda_max and for sanity-checking agent traces against the constants
they should approach.

    python3 scripts/solve_lower_bound.py
    python3 scripts/solve_lower_bound.py --kind random --n-arms 16 --env-seed 3
"""

import argparse

import numpy as np

from solidbandit.envs import EnvConfig, build_env
from solidbandit.oracles import pure_exploration_value, solve_P_offline, solve_Pz_offline


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=("toy", "random"), default="toy")
    parser.add_argument("--xi", type=float, default=0.1)
    parser.add_argument("--rho1", type=float, default=0.5)
    parser.add_argument("--n-arms", type=int, default=4)
    parser.add_argument("--env-seed", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0, help="solver restart seed")
    parser.add_argument("--z-multipliers", type=float, nargs="+", default=[2.0, 8.0])
    args = parser.parse_args()

    env = EnvConfig(
        kind=args.kind, xi=args.xi, rho1=args.rho1, n_arms=args.n_arms, seed=args.env_seed
    )
    inst = build_env(env)
    print(f"instance: {args.kind}, {inst.n_contexts} contexts x {inst.n_arms} arms, d={inst.dim}")

    rng = np.random.default_rng(args.seed)
    pe = pure_exploration_value(inst, rng=rng)
    print(f"\npure exploration: value {pe.value:.6g}, z_lower {pe.z_lower:.6g}")
    print(f"restart spread {max(pe.restart_values) - min(pe.restart_values):.2e}")
    print("policy rows:")
    for row in pe.omega:
        print("   ", np.array2string(row, precision=4, suppress_small=True))
    print(f"suggested lambda_max = 2 B L z_lower = {2 * inst.B * inst.L * pe.z_lower:.6g}")

    sol = solve_P_offline(inst, rng=np.random.default_rng(args.seed))
    print(
        f"\nregret constant: v* {sol.v_star:.6g}  (z_bar {sol.z_bar:.6g}, "
        f"z* {sol.z_star:.6g}, kkt residual {sol.kkt_residual:.2e})"
    )

    for mult in args.z_multipliers:
        z = mult * pe.z_lower
        pz = solve_Pz_offline(inst, z, rng=np.random.default_rng(args.seed))
        print(f"z = {mult:g} z_lower = {z:.4g}: u* {pz.u_star:.6g}, gap {pz.gap_estimate:.2e}")


if __name__ == "__main__":
    main()
