"""Finite contextual linear bandit instances.

An instance is a finite context set with a feature map ``phi(x, a)``, a true
parameter ``theta_star``, Gaussian noise level ``sigma`` and a context
distribution ``rho``.  Mean rewards are linear: ``mu_theta(x, a) = phi(x, a)^T
theta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateInstanceError(ValueError):
    """Raised when a computation has no admissible suboptimal cell."""


@dataclass(frozen=True)
class BanditInstance:
    """Immutable problem description.

    Attributes
    ----------
    features : ndarray, shape (n_contexts, n_arms, dim)
        Feature vectors ``phi(x, a)``.
    theta_star : ndarray, shape (dim,)
        True parameter.
    sigma : float
        Reward noise standard deviation.
    rho : ndarray, shape (n_contexts,)
        Context distribution; every context must have positive mass.
    B : float
        Bound on ``||theta_star||_2``; computed from the instance if omitted.
    L : float
        Bound on ``max ||phi(x, a)||_2``; computed if omitted.
    """

    features: np.ndarray
    theta_star: np.ndarray
    sigma: float
    rho: np.ndarray
    B: float = field(default=0.0)
    L: float = field(default=0.0)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        theta = np.asarray(self.theta_star, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if features.ndim != 3:
            raise ValueError(f"features must have shape (X, A, d), got {features.shape}")
        n_contexts, n_arms, dim = features.shape
        if theta.shape != (dim,):
            raise ValueError(f"theta_star must have shape ({dim},), got {theta.shape}")
        if rho.shape != (n_contexts,):
            raise ValueError(f"rho must have shape ({n_contexts},), got {rho.shape}")
        for name, arr in (("features", features), ("theta_star", theta), ("rho", rho)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if abs(rho.sum() - 1.0) > 1e-12:
            raise ValueError(f"rho must sum to 1, got {rho.sum()!r}")
        if rho.min() <= 0:
            raise ValueError("every context needs positive probability")

        norms = np.linalg.norm(features, axis=2)
        L = float(self.L) if self.L else float(norms.max())
        if norms.max() > L + 1e-12:
            raise ValueError(f"feature norm {norms.max()} exceeds L={L}")
        theta_norm = float(np.linalg.norm(theta))
        B = float(self.B) if self.B else theta_norm
        if theta_norm > B + 1e-12:
            raise ValueError(f"||theta_star|| = {theta_norm} exceeds B={B}")

        means = features @ theta
        top = means.max(axis=1)
        for x in range(n_contexts):
            if np.sum(means[x] >= top[x] - 1e-12) != 1:
                raise ValueError(f"context {x} has no unique optimal arm under theta_star")

        for arr in (features, theta, rho):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "L", L)

    @property
    def n_contexts(self) -> int:
        return self.features.shape[0]

    @property
    def n_arms(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[2]


def means_for(inst: BanditInstance, theta: np.ndarray) -> np.ndarray:
    """Mean-reward table under ``theta``, shape (n_contexts, n_arms)."""
    return inst.features @ theta


def best_arms(inst: BanditInstance, theta: np.ndarray) -> np.ndarray:
    """Greedy arm per context under ``theta``; ties go to the lowest index."""
    return means_for(inst, theta).argmax(axis=1)


def gaps_for(inst: BanditInstance, theta: np.ndarray) -> np.ndarray:
    """Suboptimality gap table under ``theta``, shape (n_contexts, n_arms)."""
    means = means_for(inst, theta)
    return means.max(axis=1, keepdims=True) - means


def true_gaps(inst: BanditInstance) -> np.ndarray:
    return gaps_for(inst, inst.theta_star)


def kl_divergence(inst: BanditInstance, theta: np.ndarray, theta_alt: np.ndarray) -> np.ndarray:
    """Per-cell Gaussian KL ``(mu_theta - mu_theta')^2 / (2 sigma^2)``, shape (X, A)."""
    diff = inst.features @ (theta - theta_alt)
    return diff**2 / (2.0 * inst.sigma**2)


def expected_best_mean(inst: BanditInstance) -> float:
    """``E_rho[max_a mu_theta_star(x, a)]``, the per-step optimal mean reward."""
    means = inst.features @ inst.theta_star
    return float(inst.rho @ means.max(axis=1))


# ---------------------------------------------------------------------------
# Plain-text serialization.  One key per line, arrays space-separated in
# row-major order, floats at 17 significant digits so round-trips are
# bit-exact.


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def instance_to_text(inst: BanditInstance, metadata: dict | None = None) -> str:
    lines = [
        f"n_contexts = {inst.n_contexts}",
        f"n_arms = {inst.n_arms}",
        f"dim = {inst.dim}",
        f"sigma = {_fmt(inst.sigma)}",
        f"B = {_fmt(inst.B)}",
        f"L = {_fmt(inst.L)}",
        "rho = " + " ".join(_fmt(v) for v in inst.rho),
        "theta_star = " + " ".join(_fmt(v) for v in inst.theta_star),
        "features = " + " ".join(_fmt(v) for v in inst.features.ravel()),
    ]
    if metadata:
        lines.extend(f"meta.{k} = {v}" for k, v in sorted(metadata.items()))
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> BanditInstance:
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        n_contexts = int(fields["n_contexts"])
        n_arms = int(fields["n_arms"])
        dim = int(fields["dim"])
        sigma = float(fields["sigma"])
        B = float(fields["B"])
        L = float(fields["L"])
        rho = np.array([float(v) for v in fields["rho"].split()])
        theta = np.array([float(v) for v in fields["theta_star"].split()])
        flat = np.array([float(v) for v in fields["features"].split()])
    except KeyError as err:
        raise ValueError(f"instance file is missing key {err.args[0]!r}") from None
    features = flat.reshape(n_contexts, n_arms, dim)
    return BanditInstance(features=features, theta_star=theta, sigma=sigma, rho=rho, B=B, L=L)


def save_instance(path, inst: BanditInstance, metadata: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(instance_to_text(inst, metadata))


def load_instance(path) -> BanditInstance:
    with open(path) as fh:
        return instance_from_text(fh.read())
