import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solidbandit.model import (
    BanditInstance,
    best_arms,
    expected_best_mean,
    gaps_for,
    instance_from_text,
    instance_to_text,
    kl_divergence,
    load_instance,
    means_for,
    save_instance,
    true_gaps,
)

from conftest import random_small_instance


def test_toy_means(toy):
    means = means_for(toy, toy.theta_star)
    assert means[0, 0] == pytest.approx(1.0)
    assert means[0, 2] == pytest.approx(0.9)
    np.testing.assert_array_equal(means_for(toy, np.zeros(3)), np.zeros((2, 3)))


def test_toy_best_arms_and_gaps(toy):
    np.testing.assert_array_equal(best_arms(toy, toy.theta_star), [0, 1])
    gaps = true_gaps(toy)
    np.testing.assert_allclose(gaps[0], [0.0, 1.0, 0.1])
    np.testing.assert_allclose(gaps[1], [0.2, 0.0, 0.1])


def test_best_arm_tie_breaks_low_index(toy):
    np.testing.assert_array_equal(best_arms(toy, np.zeros(3)), [0, 0])


def test_kl_divergence_values(toy):
    np.testing.assert_array_equal(
        kl_divergence(toy, toy.theta_star, toy.theta_star), np.zeros((2, 3))
    )
    # sigma=1, mean difference 2 -> 4 / 2 = 2
    inst = BanditInstance(
        features=np.array([[[1.0], [0.5]]]),
        theta_star=np.array([2.0]),
        sigma=1.0,
        rho=np.array([1.0]),
    )
    kl = kl_divergence(inst, np.array([2.0]), np.array([0.0]))
    assert kl[0, 0] == pytest.approx(2.0)
    # sigma=0.5, mean difference 1 -> 1 / (2 * 0.25) = 2
    inst_half = BanditInstance(
        features=np.array([[[1.0], [0.5]]]),
        theta_star=np.array([1.0]),
        sigma=0.5,
        rho=np.array([1.0]),
    )
    kl_half = kl_divergence(inst_half, np.array([1.0]), np.array([0.0]))
    assert kl_half[0, 0] == pytest.approx(2.0)


def test_kl_symmetry(toy):
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(kl_divergence(toy, a, b), kl_divergence(toy, b, a))


def test_means_linear_in_theta(toy):
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(
        means_for(toy, a + b), means_for(toy, a) + means_for(toy, b), atol=1e-12
    )


def test_positive_scaling_preserves_argmax(toy):
    rng = np.random.default_rng(2)
    theta = rng.normal(size=3)
    np.testing.assert_array_equal(best_arms(toy, theta), best_arms(toy, 3.7 * theta))


def test_gaps_nonnegative_zero_at_best(toy):
    rng = np.random.default_rng(3)
    for _ in range(10):
        theta = rng.normal(size=3)
        gaps = gaps_for(toy, theta)
        stars = best_arms(toy, theta)
        assert gaps.min() >= 0.0
        assert all(gaps[x, stars[x]] == 0.0 for x in range(toy.n_contexts))


def test_expected_best_mean(toy):
    assert expected_best_mean(toy) == pytest.approx(1.0)  # both contexts peak at 1


def test_validation_rejects_bad_instances():
    feats = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    good = dict(features=feats, theta_star=np.array([1.0, 0.0]), sigma=1.0, rho=np.array([1.0]))
    BanditInstance(**good)
    with pytest.raises(ValueError):
        BanditInstance(**{**good, "rho": np.array([0.6])})
    with pytest.raises(ValueError):
        BanditInstance(**{**good, "theta_star": np.array([1.0, 1.0])})  # tie
    with pytest.raises(ValueError):
        BanditInstance(**{**good, "sigma": -1.0})
    with pytest.raises(ValueError):
        BanditInstance(**{**good, "theta_star": np.array([np.nan, 0.0])})
    with pytest.raises(ValueError):
        BanditInstance(**{**good, "B": 0.5})  # ||theta*|| = 1 > B
    with pytest.raises(ValueError):
        # duplicate features make every parameter tie
        BanditInstance(**{**good, "features": np.array([[[1.0, 0.0], [1.0, 0.0]]])})


def test_bounds_computed_from_instance(toy):
    assert toy.B == pytest.approx(np.sqrt(2.0))
    assert toy.L == pytest.approx(1.0)


def test_serialization_round_trip_exact(tmp_path):
    rng = np.random.default_rng(4)
    inst = random_small_instance(rng)
    text = instance_to_text(inst, metadata={"origin": "test"})
    back = instance_from_text(text)
    assert np.array_equal(back.features, inst.features)
    assert np.array_equal(back.theta_star, inst.theta_star)
    assert np.array_equal(back.rho, inst.rho)
    assert back.sigma == inst.sigma and back.B == inst.B and back.L == inst.L
    path = tmp_path / "inst.txt"
    save_instance(path, inst)
    assert instance_to_text(load_instance(path)) == instance_to_text(inst)


def test_serialization_missing_key():
    with pytest.raises(ValueError, match="missing key"):
        instance_from_text("n_contexts = 1\n")


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_instances_validate_and_round_trip(seed):
    inst = random_small_instance(np.random.default_rng(seed))
    gaps = true_gaps(inst)
    assert gaps.min() >= 0.0
    assert (gaps == 0.0).sum(axis=1).max() == 1  # unique optimum per context
    assert instance_to_text(instance_from_text(instance_to_text(inst))) == instance_to_text(inst)
