"""Comparison agents sharing the least-squares estimator.

LinUCB uses the log-determinant confidence ellipsoid; LinTS samples the
parameter from a Gaussian around the estimate without the extra sqrt(d)
inflation; greedy and uniform are controls.
"""

from __future__ import annotations

import math

import numpy as np

from .estimator import Estimator
from .model import BanditInstance


def linucb_radius(
    design_mat: np.ndarray, nu: float, dim: int, sigma: float, B: float, delta: float
) -> float:
    """Ellipsoid radius from the log-determinant bound plus the prior term."""
    _, logdet = np.linalg.slogdet(design_mat)
    log_ratio = 0.5 * (logdet - dim * math.log(nu))
    return sigma * math.sqrt(2.0 * (log_ratio + math.log(1.0 / delta))) + math.sqrt(nu) * B


class LinUCB:
    def __init__(self, inst: BanditInstance, n: int, delta: float | None = None):
        if delta is None:
            delta = 1.0 / n
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        self.inst = inst
        self.delta = float(delta)
        self.estimator = Estimator.for_instance(inst)

    def act(self, context: int, rng: np.random.Generator) -> tuple[int, bool]:
        est = self.estimator
        feats = self.inst.features[context]
        radius = linucb_radius(
            est.design.mat, est.nu, self.inst.dim, self.inst.sigma, self.inst.B, self.delta
        )
        proj = feats @ est.design.inv
        bonuses = np.sqrt(np.einsum("ad,ad->a", proj, feats))
        return int(np.argmax(feats @ est.theta_hat + radius * bonuses)), False

    def learn(self, context: int, arm: int, reward: float) -> None:
        self.estimator.observe(context, self.inst.features[context, arm], reward)


class LinTS:
    def __init__(self, inst: BanditInstance, n: int, v_scale: float = 1.0):
        if v_scale < 0:
            raise ValueError(f"v_scale must be >= 0, got {v_scale}")
        self.inst = inst
        self.v_scale = float(v_scale)
        self.estimator = Estimator.for_instance(inst)

    def act(self, context: int, rng: np.random.Generator) -> tuple[int, bool]:
        est = self.estimator
        theta = est.design.sample_gaussian(
            est.theta_hat, self.v_scale * self.inst.sigma, rng
        )
        return int(np.argmax(self.inst.features[context] @ theta)), False

    def learn(self, context: int, arm: int, reward: float) -> None:
        self.estimator.observe(context, self.inst.features[context, arm], reward)


class Greedy:
    def __init__(self, inst: BanditInstance, n: int):
        self.inst = inst
        self.estimator = Estimator.for_instance(inst)

    def act(self, context: int, rng: np.random.Generator) -> tuple[int, bool]:
        return int(np.argmax(self.inst.features[context] @ self.estimator.theta_hat)), False

    def learn(self, context: int, arm: int, reward: float) -> None:
        self.estimator.observe(context, self.inst.features[context, arm], reward)


class Uniform:
    def __init__(self, inst: BanditInstance, n: int):
        self.inst = inst
        self.estimator = Estimator.for_instance(inst)

    def act(self, context: int, rng: np.random.Generator) -> tuple[int, bool]:
        return int(rng.integers(self.inst.n_arms)), False

    def learn(self, context: int, arm: int, reward: float) -> None:
        self.estimator.observe(context, self.inst.features[context, arm], reward)
