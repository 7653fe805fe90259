"""The SOLID agent: explore/exploit gating plus incremental primal-dual updates.

Each step either exploits (the accuracy statistic clears its threshold; play
greedy, leave the optimizer untouched) or explores (sample from the current
policy, then advance the saddle-point iteration on the optimistic Lagrangian
by one exponentiated-gradient / projected-subgradient step).  Exploration
proceeds in phases with growing budgets ``p_k`` and loosening normalizations
``z_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import Estimator, practical_radius, theoretical_radius
from .lowerbound import glrt_infimum, lagrangian_subgradient
from .model import BanditInstance

SCHEDULES = ("exp-exp", "lin-exp", "lin-pol", "lin-lin")

# Fallback multiplier cap when no oracle value for 2 B L z_lower is available.
DEFAULT_LAMBDA_MAX = 1e4


@dataclass
class SolidConfig:
    """Agent parameters.

    Defaults follow the experimental setup: fixed step sizes, per-context
    gradient normalization, no reset at phase boundaries, short practical
    radii, and the accuracy test restricted to the observed context.
    ``theoretical()`` flips all of these to the analyzed prescriptions.
    """

    lambda_init: float = 0.0
    lambda_max: float | None = None  # None: resolved by the caller or DEFAULT_LAMBDA_MAX
    z0: float = 1.0
    schedule: str = "exp-exp"
    step_omega: float | str = 1.0  # "theory" = 1/sqrt(p_k)
    step_lambda: float | str = 0.5
    reset_on_phase: bool = False
    normalize_grad: bool = True
    radius_mode: str = "practical"
    glrt_restrict_last_context: bool = True
    beta_override: float | None = None  # test hook: force the threshold

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; choose from {SCHEDULES}")
        if self.radius_mode not in ("practical", "theoretical"):
            raise ValueError(f"unknown radius_mode {self.radius_mode!r}")
        if self.z0 <= 0:
            raise ValueError(f"z0 must be > 0, got {self.z0}")
        if self.schedule == "exp-exp" and self.z0 < 1.0:
            raise ValueError("the exp-exp schedule requires z0 >= 1")
        if self.lambda_init < 0:
            raise ValueError(f"lambda_init must be >= 0, got {self.lambda_init}")
        if self.lambda_max is not None and self.lambda_max < self.lambda_init:
            raise ValueError("lambda_max must be >= lambda_init")
        for name in ("step_omega", "step_lambda"):
            step = getattr(self, name)
            if isinstance(step, str):
                if step != "theory":
                    raise ValueError(f"{name} must be a positive number or 'theory'")
            elif step <= 0:
                raise ValueError(f"{name} must be > 0, got {step}")

    @classmethod
    def theoretical(cls, **overrides) -> "SolidConfig":
        base = dict(
            step_omega="theory",
            step_lambda="theory",
            reset_on_phase=True,
            normalize_grad=False,
            radius_mode="theoretical",
            glrt_restrict_last_context=False,
        )
        base.update(overrides)
        return cls(**base)


def schedule_values(config: SolidConfig, k: int) -> tuple[float, int]:
    """Normalization ``z_k`` and phase length ``p_k`` (rounded up) for phase k."""
    if k < 0:
        raise ValueError(f"phase index must be >= 0, got {k}")
    z0 = config.z0
    if config.schedule == "exp-exp":
        z_k = z0 * math.exp(k)
        p_k = z_k * math.exp(2 * k)
    else:
        z_k = z0 * (1 + k)
        if config.schedule == "lin-exp":
            p_k = z_k * math.exp(k)
        elif config.schedule == "lin-pol":
            p_k = z_k * (1 + k) ** 2
        else:
            p_k = z_k * (1 + k)
    return z_k, int(math.ceil(p_k))


def primal_dual_update(
    omega: np.ndarray,
    lam: float,
    subgrad_omega: np.ndarray,
    g_value: float,
    step_omega: float,
    step_lambda: float,
    lambda_max: float,
) -> tuple[np.ndarray, float]:
    """One saddle-point step: exponentiated gradient on each context row of
    ``omega`` (ascent), projected subgradient descent on ``lambda``.

    Row-wise max-subtraction keeps the exponentials bounded for any
    subgradient scale.  A row can still underflow wholesale when its surviving
    mass sits far below the row maximum; those rows are redone in log space,
    where the maximum is taken over cells that still carry mass.
    """
    scaled = step_omega * subgrad_omega
    scaled -= scaled.max(axis=1, keepdims=True)
    new_omega = omega * np.exp(scaled)
    sums = new_omega.sum(axis=1, keepdims=True)
    dead = ~(sums > 0.0)
    if dead.any():
        with np.errstate(divide="ignore"):  # extinct cells carry log 0 = -inf
            logits = np.log(omega) + step_omega * subgrad_omega
        logits -= logits.max(axis=1, keepdims=True)
        rescue = np.exp(logits)
        rescue /= rescue.sum(axis=1, keepdims=True)
        rows = dead.ravel()
        new_omega[rows] = rescue[rows]
        sums[rows] = 1.0
    new_omega /= sums
    new_lam = min(max(lam - step_lambda * g_value, 0.0), lambda_max)
    return new_omega, new_lam


class SolidAgent:
    """Mutable per-run state of the gated explore/exploit loop.

    The agent sees features, noise level and the norm bounds B, L; it never
    reads ``theta_star`` or ``rho``.
    """

    def __init__(self, inst: BanditInstance, n: int, config: SolidConfig | None = None):
        if n < 3:
            raise ValueError(f"horizon must be >= 3, got {n}")
        self.inst = inst
        self.n = int(n)
        self.config = config if config is not None else SolidConfig()
        self.estimator = Estimator.for_instance(inst)
        self.omega = np.full((inst.n_contexts, inst.n_arms), 1.0 / inst.n_arms)
        self.lam = float(self.config.lambda_init)
        self.lambda_max = (
            self.config.lambda_max if self.config.lambda_max is not None else DEFAULT_LAMBDA_MAX
        )
        self.phase = 0
        self.explore_count = 0
        self.explore_in_phase = 0
        self.z_k, self.p_k = schedule_values(self.config, 0)
        self.last_action_was_explore = False
        if self.config.radius_mode == "theoretical":
            self._beta = theoretical_radius(
                self.n, 1.0 / self.n, inst.dim, inst.sigma, inst.B, inst.L, self.estimator.nu
            )

    def _beta_threshold(self) -> float:
        if self.config.beta_override is not None:
            return self.config.beta_override
        if self.config.radius_mode == "theoretical":
            return self._beta
        return practical_radius(self.estimator.t, self.n, self.inst.dim, self.inst.sigma)

    def _gamma(self) -> float:
        if self.config.radius_mode == "theoretical":
            # 1/S^2 clipped into the radius domain for the first exploration step.
            delta = 1.0 / max(self.explore_count, 2) ** 2
            return theoretical_radius(
                self.n, delta, self.inst.dim, self.inst.sigma, self.inst.B, self.inst.L,
                self.estimator.nu,
            )
        return practical_radius(self.explore_count, self.n, self.inst.dim, self.inst.sigma)

    def _step(self, which: float | str) -> float:
        if which == "theory":
            return 1.0 / math.sqrt(self.p_k)
        return float(which)

    def act(self, context: int, rng: np.random.Generator) -> tuple[int, bool]:
        est = self.estimator
        # The test needs at least one observation to mean anything.
        if est.t > 0:
            restrict = context if self.config.glrt_restrict_last_context else None
            stat = glrt_infimum(est.theta_hat, est.design, self.inst, restrict)
            if stat.value > self._beta_threshold():
                arm = int(np.argmax(self.inst.features[context] @ est.theta_hat))
                self.last_action_was_explore = False
                return arm, False

        row = self.omega[context]
        u = rng.random()
        arm = min(int(np.searchsorted(np.cumsum(row), u, side="right")), self.inst.n_arms - 1)
        self.explore_count += 1
        self.explore_in_phase += 1

        lag = lagrangian_subgradient(
            self.omega,
            self.lam,
            self.z_k,
            est.rho_hat,
            est.theta_hat,
            est.design,
            self._gamma(),
            self.inst,
            normalize_per_context=self.config.normalize_grad,
        )
        self.omega, self.lam = primal_dual_update(
            self.omega,
            self.lam,
            lag.subgrad_omega,
            lag.g_value,
            self._step(self.config.step_omega),
            self._step(self.config.step_lambda),
            self.lambda_max,
        )
        if self.explore_in_phase == self.p_k:
            self.phase += 1
            self.explore_in_phase = 0
            self.z_k, self.p_k = schedule_values(self.config, self.phase)
            if self.config.reset_on_phase:
                self.omega = np.full_like(self.omega, 1.0 / self.inst.n_arms)
                self.lam = float(self.config.lambda_init)
        self.last_action_was_explore = True
        return arm, True

    def learn(self, context: int, arm: int, reward: float) -> None:
        self.estimator.observe(context, self.inst.features[context, arm], reward)

    def greedy_arm(self, context: int) -> int:
        return int(np.argmax(self.inst.features[context] @ self.estimator.theta_hat))
