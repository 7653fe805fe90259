"""Regularized least squares over a reward stream, plus confidence radii.

The estimator tracks the design matrix ``Vbar_t = sum phi phi^T + nu I`` with
its inverse, the response vector, and the empirical context distribution.  Two
radius families are provided: short practical ones used by default, and the
much more conservative closed-form one that backs the anytime confidence set.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import PDMatrixPair
from .model import BanditInstance, means_for


class Estimator:
    """Running least-squares state for one reward stream."""

    __slots__ = ("design", "u_vec", "theta_hat", "context_counts", "t", "nu")

    def __init__(self, dim: int, n_contexts: int, nu: float = 1.0):
        if nu < 1.0:
            raise ValueError(f"nu must be >= 1, got {nu}")
        self.design = PDMatrixPair(dim, nu)
        self.u_vec = np.zeros(dim)
        self.theta_hat = np.zeros(dim)
        self.context_counts = np.zeros(n_contexts)
        self.t = 0
        self.nu = float(nu)

    @classmethod
    def for_instance(cls, inst: BanditInstance, nu: float | None = None) -> "Estimator":
        floor = max(inst.L**2, 1.0)
        if nu is None:
            nu = floor
        elif nu < floor - 1e-12:
            raise ValueError(f"nu={nu} below required max(L^2, 1)={floor}")
        return cls(inst.dim, inst.n_contexts, nu)

    @property
    def rho_hat(self) -> np.ndarray:
        """Empirical context distribution; uniform before any observation."""
        if self.t == 0:
            k = len(self.context_counts)
            return np.full(k, 1.0 / k)
        return self.context_counts / self.t

    def observe(self, context: int, feature: np.ndarray, reward: float) -> None:
        if not np.isfinite(reward):
            raise ValueError(f"reward must be finite, got {reward}")
        self.design.rank_one_update(feature)
        self.u_vec += reward * feature
        self.theta_hat = self.design.inv @ self.u_vec
        self.context_counts[context] += 1
        self.t += 1

    def error_norm_sq(self, theta: np.ndarray) -> float:
        """``||theta_hat - theta||^2`` in the design-matrix norm."""
        return self.design.mahalanobis_sq(self.theta_hat - theta)


def practical_radius(count: int, horizon: int, dim: int, sigma: float) -> float:
    """Short radius ``sigma^2 (log count + d log log n)``.

    Used both for the exploitation threshold (count = steps so far) and the
    exploration bonus (count = exploration steps so far).
    """
    if horizon < 3:
        raise ValueError(f"horizon must be >= 3, got {horizon}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return sigma**2 * (math.log(count) + dim * math.log(math.log(horizon)))


def theoretical_radius(
    n: int, delta: float, dim: int, sigma: float, B: float, L: float, nu: float
) -> float:
    """Closed-form anytime confidence radius ``c_{n, delta}`` (squared norm).

    Very conservative at small horizons; its ratio to ``2 sigma^2 log n``
    tends to 1 as ``n`` grows.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    log_n = math.log(n)
    gamma = 1.0 + 1.0 / log_n
    v_min = (1.0 / log_n) / (2.0 * math.sqrt(dim))
    upsilon = dim * math.log(2.5 + 2.0 * log_n * math.sqrt(dim)) + dim * math.log(
        2.0
        + 4.0 * dim * math.log(4.0 * gamma * dim * log_n**2 * math.sqrt((nu + L**2 * n) / (dim * nu))) * log_n
    )
    chi = nu**2 * v_min**2 / (16.0 * dim * L**2 * (nu + L**2 * n) * log_n**4 * gamma**4)
    sqrt_kappa = (
        B * math.sqrt(nu)
        + math.sqrt(2.0 * sigma**2 * math.log((2.0 + 2.0 * n * L**2 / (dim * nu)) / delta)) / log_n
        + math.sqrt(
            2.0 * sigma**2 * gamma**3 * math.log(2.0 * (1.0 + math.log(n / chi) * log_n) / delta)
            + 2.0 * gamma**3 * upsilon
        )
    )
    sqrt_c = gamma / (1.0 - 1.0 / log_n) * sqrt_kappa
    return sqrt_c**2


def confidence_coverage_check(
    inst: BanditInstance,
    n: int,
    delta: float,
    runs: int,
    rng: np.random.Generator,
    policy: np.ndarray | None = None,
) -> float:
    """Fraction of runs whose estimate stays inside the radius at every step.

    Arms are drawn from ``policy`` rows (uniform when omitted) and contexts
    from ``rho``; the check compares ``||theta_hat_t - theta_star||_{Vbar_t}``
    against ``sqrt(c_{n, delta})`` for all ``t <= n``.
    """
    nu = max(inst.L**2, 1.0)
    c = theoretical_radius(n, delta, inst.dim, inst.sigma, inst.B, inst.L, nu)
    if policy is None:
        policy = np.full((inst.n_contexts, inst.n_arms), 1.0 / inst.n_arms)
    cum_rho = np.cumsum(inst.rho)
    cum_policy = np.cumsum(policy, axis=1)
    means = means_for(inst, inst.theta_star)

    covered = 0
    for _ in range(runs):
        est = Estimator.for_instance(inst)
        xs = np.minimum(np.searchsorted(cum_rho, rng.random(n), side="right"), inst.n_contexts - 1)
        us = rng.random(n)
        noise = rng.standard_normal(n)
        ok = True
        for t in range(n):
            x = xs[t]
            a = min(int(np.searchsorted(cum_policy[x], us[t], side="right")), inst.n_arms - 1)
            y = means[x, a] + inst.sigma * noise[t]
            est.observe(x, inst.features[x, a], y)
            if est.error_norm_sq(inst.theta_star) > c:
                ok = False
                break
        covered += ok
    return covered / runs
