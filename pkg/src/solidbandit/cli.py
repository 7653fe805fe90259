"""Command-line entry point for regret experiments.

Configuration is a flat ``key = value`` file with dotted sections, e.g.::

    env.kind = toy
    env.xi = 0.1
    agent.solid.z0 = 1
    run.n = 50000

Flags override config values.  Outputs one trace CSV per run plus an
aggregate CSV per (algorithm, environment); re-running the same arguments
overwrites them byte-identically.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

from .envs import EnvConfig
from .harness import (
    ALGOS,
    AgentConfig,
    aggregate,
    aggregate_csv,
    default_checkpoints,
    default_solid_config,
    run_many,
    trace_csv,
)


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_ENV_KEYS = {
    "kind": str, "xi": float, "rho1": float, "d": int, "n_contexts": int,
    "n_arms": int, "sparsity": float, "sigma": float, "seed": int,
}
_SOLID_KEYS = {
    "lambda_init": float, "lambda_max": float, "z0": float, "schedule": str,
    "step_omega": "step", "step_lambda": "step", "reset_on_phase": _bool,
    "normalize_grad": _bool, "radius_mode": str, "glrt_restrict_last_context": _bool,
}
_RUN_KEYS = {"algo": str, "n": int, "runs": int, "seed": int, "out": str, "parallel": int}


def parse_config(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def _convert(key: str, kind, value: str):
    if kind == "step":
        return value if value == "theory" else float(value)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def configs_from_entries(entries: dict[str, str]):
    env_kwargs, solid_kwargs, agent_kwargs, run_kwargs = {}, {}, {}, {}
    for key, value in entries.items():
        if key.startswith("env."):
            name = key[4:]
            if name not in _ENV_KEYS:
                raise ConfigError(f"unknown config key: {key}")
            env_kwargs[name] = _convert(key, _ENV_KEYS[name], value)
        elif key.startswith("agent.solid."):
            name = key[len("agent.solid."):]
            if name not in _SOLID_KEYS:
                raise ConfigError(f"unknown config key: {key}")
            solid_kwargs[name] = _convert(key, _SOLID_KEYS[name], value)
        elif key == "agent.linucb.delta":
            agent_kwargs["linucb_delta"] = _convert(key, float, value)
        elif key == "agent.lints.v_scale":
            agent_kwargs["lints_v_scale"] = _convert(key, float, value)
        elif key.startswith("run."):
            name = key[4:]
            if name not in _RUN_KEYS:
                raise ConfigError(f"unknown config key: {key}")
            run_kwargs[name] = _convert(key, _RUN_KEYS[name], value)
        else:
            raise ConfigError(f"unknown config key: {key}")
    try:
        env_config = EnvConfig(**env_kwargs)
        # Explicit solid keys override the per-environment defaults; with no
        # overrides the harness fills them in at run time.
        solid = replace(default_solid_config(env_config), **solid_kwargs) if solid_kwargs else None
        agent_config = AgentConfig(solid=solid, **agent_kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return env_config, agent_config, run_kwargs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solidbandit", description="Run contextual-bandit regret experiments."
    )
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--algo", choices=ALGOS, help="agent to run")
    parser.add_argument("--n", type=int, help="horizon (steps per run)")
    parser.add_argument("--runs", type=int, help="number of replications")
    parser.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    parser.add_argument("--out", type=Path, help="output directory for CSVs")
    parser.add_argument("--parallel", type=int, help="worker processes (default 1)")
    return parser


def cli_run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        entries = {}
        if args.config is not None:
            entries = parse_config(args.config.read_text())
        env_config, agent_config, run_kwargs = configs_from_entries(entries)

        algo = args.algo or run_kwargs.get("algo", agent_config.kind)
        if algo not in ALGOS:
            raise ConfigError(f"unknown algo {algo!r}; choose from {ALGOS}")
        agent_config = replace(agent_config, kind=algo)
        n = args.n if args.n is not None else run_kwargs.get("n", 1000)
        runs = args.runs if args.runs is not None else run_kwargs.get("runs", 1)
        seed = args.seed if args.seed is not None else run_kwargs.get("seed", 0)
        out_dir = Path(args.out) if args.out is not None else Path(run_kwargs.get("out", "results"))
        parallel = args.parallel if args.parallel is not None else run_kwargs.get("parallel", 1)
        env_override = os.environ.get("SOLID_BANDIT_THREADS")
        if env_override is not None:
            parallel = _convert("SOLID_BANDIT_THREADS", int, env_override)
        if n < 3 or runs < 1:
            raise ConfigError(f"need n >= 3 and runs >= 1, got n={n}, runs={runs}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    try:
        traces = run_many(agent_config, env_config, n, runs, seed, parallel)
        out_dir.mkdir(parents=True, exist_ok=True)
        base = f"{algo}__{env_config.kind}"
        for trace in traces:
            (out_dir / f"{base}__seed{trace.seed}.csv").write_text(trace_csv(trace))
        agg = aggregate(traces, default_checkpoints(n))
        (out_dir / f"{base}__aggregate.csv").write_text(aggregate_csv(agg))
    except Exception as err:
        print(f"run error: {err}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
