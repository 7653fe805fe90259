"""Contextual linear bandits with asymptotically optimal primal-dual exploration."""

from .envs import EnvConfig, build_env, random_instance, toy_two_context
from .estimator import Estimator, practical_radius, theoretical_radius
from .harness import AgentConfig, RegretTrace, aggregate, run_episode, run_many
from .linalg import PDMatrixPair
from .lowerbound import glrt_infimum, lagrangian_subgradient
from .model import BanditInstance, instance_from_text, instance_to_text
from .oracles import pure_exploration_value, solve_P_offline, solve_Pz_offline
from .solid import SolidAgent, SolidConfig

__all__ = [
    "AgentConfig",
    "BanditInstance",
    "EnvConfig",
    "Estimator",
    "PDMatrixPair",
    "RegretTrace",
    "SolidAgent",
    "SolidConfig",
    "aggregate",
    "build_env",
    "glrt_infimum",
    "instance_from_text",
    "instance_to_text",
    "lagrangian_subgradient",
    "practical_radius",
    "pure_exploration_value",
    "random_instance",
    "run_episode",
    "run_many",
    "solve_P_offline",
    "solve_Pz_offline",
    "theoretical_radius",
    "toy_two_context",
]
