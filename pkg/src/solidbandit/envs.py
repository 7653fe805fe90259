"""Environment construction and simulation primitives.

Two instance families: a fixed two-context problem whose optimal-arm features
deliberately leave one direction unexplored (parameter ``xi`` controls how
informative the cheap suboptimal arm is), and sparse random instances
rejection-sampled so that optimal-arm features do not span the whole space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BanditInstance

MAX_REJECTIONS = 10_000


@dataclass
class EnvConfig:
    kind: str = "toy"
    xi: float = 0.1
    rho1: float = 0.5
    d: int = 8
    n_contexts: int = 4
    n_arms: int = 4
    sparsity: float = 0.5
    sigma: float | None = None  # None: 0.5 for toy, 1.0 for random
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("toy", "random"):
            raise ValueError(f"unknown env kind {self.kind!r}")
        if not 0.0 < self.xi < 0.5:
            raise ValueError(f"xi must lie in (0, 0.5), got {self.xi}")
        if not 0.0 < self.rho1 < 1.0:
            raise ValueError(f"rho1 must lie in (0, 1), got {self.rho1}")
        if not 0.0 < self.sparsity <= 1.0:
            raise ValueError(f"sparsity must lie in (0, 1], got {self.sparsity}")
        if self.sigma is None:
            self.sigma = 0.5 if self.kind == "toy" else 1.0
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def toy_two_context(xi: float = 0.1, rho1: float = 0.5, sigma: float = 0.5) -> BanditInstance:
    """Two contexts, three arms, d=3; optimal arms probe only two directions."""
    features = np.array(
        [
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0 - xi, 2.0 * xi, 0.0]],
            [[0.0, 0.6, 0.8], [0.0, 0.0, 1.0], [0.0, xi / 10.0, 1.0 - xi]],
        ]
    )
    theta_star = np.array([1.0, 0.0, 1.0])
    rho = np.array([rho1, 1.0 - rho1])
    return BanditInstance(features=features, theta_star=theta_star, sigma=sigma, rho=rho)


def random_instance(config: EnvConfig, rng: np.random.Generator) -> BanditInstance:
    """Sparse random instance whose optimal-arm features do not span R^d.

    Entries are zero with probability 1 - sparsity, else uniform [0, 1]; draws
    are rejected until the instance validates and the optimal-arm feature
    matrix is rank-deficient.
    """
    shape = (config.n_contexts, config.n_arms, config.d)
    for _ in range(MAX_REJECTIONS):
        features = rng.random(shape) * (rng.random(shape) < config.sparsity)
        theta = rng.random(config.d) * (rng.random(config.d) < config.sparsity)
        rho = np.full(config.n_contexts, 1.0 / config.n_contexts)
        try:
            inst = BanditInstance(
                features=features, theta_star=theta, sigma=config.sigma, rho=rho
            )
        except ValueError:
            continue
        means = features @ theta
        star_feats = features[np.arange(config.n_contexts), means.argmax(axis=1)]
        if np.linalg.matrix_rank(star_feats) < config.d:
            return inst
    raise RuntimeError(
        f"no acceptable instance in {MAX_REJECTIONS} draws; adjust generator parameters"
    )


def build_env(config: EnvConfig) -> BanditInstance:
    if config.kind == "toy":
        return toy_two_context(config.xi, config.rho1, config.sigma)
    return random_instance(config, np.random.default_rng(config.seed))


def sample_context(inst: BanditInstance, rng: np.random.Generator) -> int:
    u = rng.random()
    return min(int(np.searchsorted(np.cumsum(inst.rho), u, side="right")), inst.n_contexts - 1)


def reward(inst: BanditInstance, context: int, arm: int, rng: np.random.Generator) -> float:
    mean = float(inst.features[context, arm] @ inst.theta_star)
    return mean + inst.sigma * rng.standard_normal()
