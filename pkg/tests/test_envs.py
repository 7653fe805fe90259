"""Instance construction, context sampling, and reward generation."""

import numpy as np
import pytest

from solidbandit.envs import (
    EnvConfig,
    build_env,
    random_instance,
    reward,
    sample_context,
    toy_two_context,
)
from solidbandit.model import best_arms, instance_to_text, true_gaps


class FixedUniform:
    def __init__(self, u: float):
        self.u = u

    def random(self) -> float:
        return self.u


def test_toy_features_are_exact():
    inst = toy_two_context(xi=0.1)
    expected = np.array(
        [
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.9, 0.2, 0.0]],
            [[0.0, 0.6, 0.8], [0.0, 0.0, 1.0], [0.0, 0.01, 0.9]],
        ]
    )
    np.testing.assert_array_equal(inst.features, expected)
    np.testing.assert_array_equal(inst.theta_star, [1.0, 0.0, 1.0])
    np.testing.assert_array_equal(inst.rho, [0.5, 0.5])
    assert inst.sigma == 0.5


def test_toy_gaps_and_optimal_arms():
    inst = toy_two_context(xi=0.1)
    np.testing.assert_array_equal(best_arms(inst, inst.theta_star), [0, 1])
    np.testing.assert_allclose(true_gaps(inst), [[0.0, 1.0, 0.1], [0.2, 0.0, 0.1]])


def test_toy_unbalanced_contexts():
    inst = toy_two_context(xi=0.1, rho1=0.99)
    np.testing.assert_allclose(inst.rho, [0.99, 0.01])


def test_toy_tie_breaking_xi_rejected():
    # xi=0 duplicates the optimal mean in both contexts.
    with pytest.raises(ValueError):
        toy_two_context(xi=0.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "jester"},
        {"xi": 0.0},
        {"xi": 0.5},
        {"rho1": 0.0},
        {"rho1": 1.0},
        {"sparsity": 0.0},
        {"sparsity": 1.5},
        {"sigma": -0.1},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EnvConfig(**kwargs)


def test_config_noise_defaults():
    assert EnvConfig().sigma == 0.5
    assert EnvConfig(kind="random").sigma == 1.0
    assert EnvConfig(kind="toy", sigma=2.0).sigma == 2.0
    assert EnvConfig(sigma=0.0).sigma == 0.0  # noiseless allowed


@pytest.mark.parametrize("n_arms", [4, 8, 16, 32])
def test_random_instances_leave_directions_unexplored(n_arms):
    config = EnvConfig(kind="random", n_arms=n_arms, seed=1)
    inst = build_env(config)
    assert inst.features.shape == (4, n_arms, 8)
    np.testing.assert_allclose(inst.rho, 0.25)
    stars = best_arms(inst, inst.theta_star)
    star_feats = inst.features[np.arange(4), stars]
    assert np.linalg.matrix_rank(star_feats) < 8


def test_random_instance_is_seed_deterministic():
    config = EnvConfig(kind="random", seed=7)
    assert instance_to_text(build_env(config)) == instance_to_text(build_env(config))
    other = EnvConfig(kind="random", seed=8)
    assert instance_to_text(build_env(config)) != instance_to_text(build_env(other))


def test_generator_gives_up_when_acceptance_is_impossible():
    # d=1 with dense positive features: the optimal arm always has a nonzero
    # feature, so its row always spans R^1.
    config = EnvConfig(kind="random", d=1, n_contexts=1, n_arms=2, sparsity=1.0)
    with pytest.raises(RuntimeError, match="no acceptable instance"):
        random_instance(config, np.random.default_rng(0))


def test_build_env_dispatch():
    assert build_env(EnvConfig()).n_contexts == 2
    inst = build_env(EnvConfig(kind="random", d=5, n_contexts=3, n_arms=6, seed=2))
    assert inst.dim == 5 and inst.n_contexts == 3 and inst.n_arms == 6
    assert inst.sigma == 1.0


def test_sample_context_frequencies():
    inst = toy_two_context(xi=0.1, rho1=0.3)
    rng = np.random.default_rng(123)
    draws = 100_000
    hits = sum(sample_context(inst, rng) for _ in range(draws))
    assert abs(hits / draws - 0.7) <= 0.01


def test_sample_context_inverse_cdf_edges():
    inst = toy_two_context(xi=0.1, rho1=0.3)
    assert sample_context(inst, FixedUniform(0.0)) == 0
    assert sample_context(inst, FixedUniform(0.29)) == 0
    assert sample_context(inst, FixedUniform(0.31)) == 1
    assert sample_context(inst, FixedUniform(0.999)) == 1


def test_reward_is_exact_without_noise():
    inst = toy_two_context(xi=0.1, sigma=0.0)
    rng = np.random.default_rng(0)
    assert reward(inst, 0, 0, rng) == 1.0
    assert reward(inst, 0, 2, rng) == pytest.approx(0.9)
    assert reward(inst, 1, 1, rng) == 1.0


def test_reward_noise_scale():
    inst = toy_two_context(xi=0.1)
    rng = np.random.default_rng(321)
    samples = np.array([reward(inst, 0, 0, rng) for _ in range(10_000)])
    assert abs(samples.mean() - 1.0) <= 0.02
    assert abs(samples.std() - inst.sigma) <= 0.02
