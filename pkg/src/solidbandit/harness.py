"""Experiment orchestration: seeded replications, traces, aggregation, CSV.

Pseudo-regret (true gaps of the played arms) is recorded, matching the
quantity the regret curves show and keeping acceptance checks noise-free.
Replications are embarrassingly parallel; every run owns its environment,
agent and rng stream (``base seed + run index``), so serial and parallel
execution produce identical bytes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .baselines import Greedy, LinTS, LinUCB, Uniform
from .envs import EnvConfig, build_env, reward, sample_context
from .model import BanditInstance, instance_to_text, true_gaps
from .oracles import pure_exploration_value
from .solid import SolidAgent, SolidConfig

ALGOS = ("solid", "linucb", "lints", "greedy", "uniform")


@dataclass
class AgentConfig:
    kind: str = "solid"
    solid: SolidConfig | None = None  # None: per-environment defaults
    linucb_delta: float | None = None
    lints_v_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ALGOS:
            raise ValueError(f"unknown algo {self.kind!r}; choose from {ALGOS}")


@dataclass
class RegretTrace:
    per_step_regret: np.ndarray
    cumulative: np.ndarray
    explored: np.ndarray
    phase: np.ndarray
    seed: int


@dataclass
class AggregateResult:
    checkpoints: np.ndarray
    mean: np.ndarray
    ci_half_width: np.ndarray
    n_runs: int
    confidence: float = 0.95


_lambda_max_memo: dict[str, float] = {}


def resolve_lambda_max(inst: BanditInstance) -> float:
    """Multiplier cap ``2 B L z_lower`` from the pure-exploration oracle.

    The simulator knows the true model, so the cap the analysis asks for is
    computable; memoized per instance.
    """
    key = instance_to_text(inst)
    if key not in _lambda_max_memo:
        pe = pure_exploration_value(inst, max_iters=2000, tol=1e-3, restarts=3)
        _lambda_max_memo[key] = 2.0 * inst.B * inst.L * pe.z_lower
    return _lambda_max_memo[key]


def default_solid_config(env_config: EnvConfig) -> SolidConfig:
    """Per-environment defaults: random problems start with a looser
    normalization and an active multiplier; the toy starts tight."""
    if env_config.kind == "random":
        return SolidConfig(z0=float(env_config.n_arms), lambda_init=50.0)
    return SolidConfig()


def resolve_agent_config(agent_config: AgentConfig, env_config: EnvConfig) -> AgentConfig:
    """Fill environment-dependent defaults: the solid config itself and its
    multiplier cap, with lambda_init clipped into [0, lambda_max]."""
    if agent_config.kind != "solid":
        return agent_config
    solid = agent_config.solid
    if solid is None:
        solid = default_solid_config(env_config)
    if solid.lambda_max is None:
        cap = resolve_lambda_max(build_env(env_config))
        solid = replace(solid, lambda_max=cap, lambda_init=min(solid.lambda_init, cap))
    return replace(agent_config, solid=solid)


def build_agent(agent_config: AgentConfig, inst: BanditInstance, n: int):
    kind = agent_config.kind
    if kind == "solid":
        solid_config = agent_config.solid
        if solid_config is None:
            solid_config = SolidConfig()
        if solid_config.lambda_max is None:
            cap = resolve_lambda_max(inst)
            solid_config = replace(
                solid_config, lambda_max=cap, lambda_init=min(solid_config.lambda_init, cap)
            )
        return SolidAgent(inst, n, solid_config)
    if kind == "linucb":
        return LinUCB(inst, n, agent_config.linucb_delta)
    if kind == "lints":
        return LinTS(inst, n, agent_config.lints_v_scale)
    if kind == "greedy":
        return Greedy(inst, n)
    return Uniform(inst, n)


def run_episode(
    agent_config: AgentConfig, env_config: EnvConfig, n: int, seed: int
) -> RegretTrace:
    """One seeded episode; the rng stream drives contexts, noise and the agent."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    agent_config = resolve_agent_config(agent_config, env_config)
    inst = build_env(env_config)
    agent = build_agent(agent_config, inst, n)
    rng = np.random.default_rng(seed)
    gaps = true_gaps(inst)

    per_step = np.zeros(n)
    explored = np.zeros(n, dtype=bool)
    phase = np.zeros(n, dtype=np.int32)
    t = 0
    try:
        for t in range(n):
            x = sample_context(inst, rng)
            arm, did_explore = agent.act(x, rng)
            y = reward(inst, x, arm, rng)
            agent.learn(x, arm, y)
            per_step[t] = gaps[x, arm]
            explored[t] = did_explore
            phase[t] = getattr(agent, "phase", 0)
    except Exception as err:
        raise RuntimeError(f"episode failed (seed={seed}, step={t + 1}): {err}") from err
    return RegretTrace(
        per_step_regret=per_step,
        cumulative=np.cumsum(per_step),
        explored=explored,
        phase=phase,
        seed=seed,
    )


def _episode_job(args):
    return run_episode(*args)


def run_many(
    agent_config: AgentConfig,
    env_config: EnvConfig,
    n: int,
    runs: int,
    seed: int,
    parallel: int = 1,
) -> list[RegretTrace]:
    """Run ``runs`` replications with seeds ``seed + index``, ordered by index."""
    agent_config = resolve_agent_config(agent_config, env_config)
    jobs = [(agent_config, env_config, n, seed + i) for i in range(runs)]
    if parallel <= 1 or runs == 1:
        return [run_episode(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(parallel, runs)) as pool:
        return list(pool.map(_episode_job, jobs))


def default_checkpoints(n: int, count: int = 100) -> np.ndarray:
    """Log-spaced step indices from 1 to n, deduplicated."""
    return np.unique(np.rint(np.geomspace(1, n, count)).astype(int))


def aggregate(
    traces: list[RegretTrace],
    checkpoints: np.ndarray | None = None,
    confidence: float = 0.95,
) -> AggregateResult:
    """Mean cumulative regret with Student-t half-widths at the checkpoints.

    A single run yields NaN half-widths (suppressed downstream).
    """
    if not traces:
        raise ValueError("aggregate needs at least one trace")
    length = len(traces[0].cumulative)
    if any(len(tr.cumulative) != length for tr in traces):
        raise ValueError("traces have mismatched lengths")
    if checkpoints is None:
        checkpoints = default_checkpoints(length)
    checkpoints = np.asarray(checkpoints, dtype=int)
    if checkpoints.min() < 1 or checkpoints.max() > length:
        raise ValueError("checkpoints out of range")

    values = np.stack([tr.cumulative[checkpoints - 1] for tr in traces])
    m = len(traces)
    mean = values.mean(axis=0)
    if m == 1:
        half = np.full(len(checkpoints), np.nan)
    else:
        quantile = stats.t.ppf(0.5 * (1.0 + confidence), m - 1)
        half = quantile * values.std(axis=0, ddof=1) / np.sqrt(m)
    return AggregateResult(
        checkpoints=checkpoints, mean=mean, ci_half_width=half, n_runs=m,
        confidence=confidence,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trace_csv(trace: RegretTrace) -> str:
    lines = ["step,cum_regret,explored,phase"]
    for i in range(len(trace.cumulative)):
        lines.append(
            f"{i + 1},{_fmt(trace.cumulative[i])},{int(trace.explored[i])},{trace.phase[i]}"
        )
    return "\n".join(lines) + "\n"


def aggregate_csv(agg: AggregateResult) -> str:
    lines = ["step,mean,ci_half_width"]
    for step, mean, half in zip(agg.checkpoints, agg.mean, agg.ci_half_width):
        half_text = "" if np.isnan(half) else _fmt(half)
        lines.append(f"{step},{_fmt(mean)},{half_text}")
    return "\n".join(lines) + "\n"
