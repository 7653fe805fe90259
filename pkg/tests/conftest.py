"""Shared fixtures: reference instances and the acceptance report hook."""

import numpy as np
import pytest

from solidbandit.envs import toy_two_context
from solidbandit.model import BanditInstance

# Filled by tests/test_acceptance.py; printed after the run so the pass/fail
# lines survive output capture.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status} - {name}{suffix}")


@pytest.fixture(scope="session")
def toy() -> BanditInstance:
    return toy_two_context(xi=0.1)


@pytest.fixture(scope="session")
def two_arm() -> BanditInstance:
    """One context, orthogonal arms, sigma=1; the best-arm rate is 1/8."""
    features = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    return BanditInstance(
        features=features,
        theta_star=np.array([1.0, 0.0]),
        sigma=1.0,
        rho=np.array([1.0]),
    )


@pytest.fixture(scope="session")
def spanning() -> BanditInstance:
    """Optimal-arm features span R^2, so exploration is free."""
    features = np.array(
        [
            [[1.0, 0.0], [0.0, 0.4]],
            [[0.3, 0.0], [0.0, 1.0]],
        ]
    )
    return BanditInstance(
        features=features,
        theta_star=np.array([1.0, 1.0]),
        sigma=1.0,
        rho=np.array([0.5, 0.5]),
    )


def random_small_instance(rng: np.random.Generator) -> BanditInstance:
    """Rejection-sample a small valid instance (d <= 3, |X| <= 2, |A| <= 4)."""
    while True:
        d = int(rng.integers(1, 4))
        n_contexts = int(rng.integers(1, 3))
        n_arms = int(rng.integers(2, 5))
        features = rng.normal(size=(n_contexts, n_arms, d))
        theta = rng.normal(size=d)
        raw = rng.random(n_contexts) + 0.1
        rho = raw / raw.sum()
        try:
            return BanditInstance(
                features=features, theta_star=theta, sigma=1.0, rho=rho
            )
        except ValueError:
            continue


def equality_ls_glrt(
    theta: np.ndarray,
    mat: np.ndarray,
    inst: BanditInstance,
    restrict: int | None = None,
) -> tuple[float, tuple[int, int], np.ndarray]:
    """Independent route to the accuracy statistic.

    For each suboptimal cell, minimize ||theta - theta'||^2_mat subject to the
    tie constraint u^T theta' = 0 by solving the KKT system directly, then take
    the cell minimum.  Ties resolve to the first (context, arm) pair.
    """
    contexts = range(inst.n_contexts) if restrict is None else [restrict]
    d = inst.dim
    best_val, best_cell, best_theta = np.inf, None, None
    for x in contexts:
        means = inst.features[x] @ theta
        b = int(np.argmax(means))
        for a in range(inst.n_arms):
            if a == b:
                continue
            u = inst.features[x, a] - inst.features[x, b]
            if not np.any(u):
                continue
            kkt = np.zeros((d + 1, d + 1))
            kkt[:d, :d] = mat
            kkt[:d, d] = u
            kkt[d, :d] = u
            rhs = np.concatenate([mat @ theta, [0.0]])
            cand = np.linalg.solve(kkt, rhs)[:d]
            val = float((theta - cand) @ mat @ (theta - cand))
            if val < best_val:
                best_val, best_cell, best_theta = val, (x, a), cand
    return best_val, best_cell, best_theta
