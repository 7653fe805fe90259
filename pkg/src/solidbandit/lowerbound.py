"""Alternative-model infima and the optimistic Lagrangian.

Two closely related computations live here.  The accuracy test statistic

    inf over alternatives theta' of  ||theta - theta'||^2_{Vbar}

has a closed form: the alternative set is a union of half-spaces (one per
suboptimal cell, "arm a beats the incumbent in context x"), and on each
boundary the minimizer is an equality-constrained least-squares projection.
The same projection, with the policy-weighted design in place of ``Vbar``,
gives the KL infimum inside the exploration constraint ``g`` and, through
Danskin's rule, a subgradient of the Lagrangian ``h = f + lambda g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PDMatrixPair, _chol_inverse
from .model import BanditInstance, DegenerateInstanceError

# Policy-weighted designs can be singular near the simplex boundary; a ridge
# far below every test tolerance keeps the projection defined.
CONSTRAINT_RIDGE = 1e-9


@dataclass
class GlrtResult:
    value: float
    cell: tuple[int, int]
    closest_theta: np.ndarray


@dataclass
class LagrangianEval:
    f_value: float
    g_value: float
    h_value: float
    subgrad_omega: np.ndarray
    subgrad_lambda: float
    argmin_cell: tuple[int, int]
    closest_theta: np.ndarray


def _min_projection(
    theta: np.ndarray,
    inv: np.ndarray,
    inst: BanditInstance,
    contexts: np.ndarray,
    scale: float,
) -> tuple[float, tuple[int, int], np.ndarray]:
    """Minimum of gap^2 / (scale * u^T inv u) over admissible cells.

    ``u`` is the feature difference to the incumbent best arm; cells with
    ``u = 0`` (duplicate features) are inadmissible.  Ties resolve to the
    lexicographically first cell.  Returns (value, cell, closest theta').
    """
    feats = inst.features[contexts]
    means = feats @ theta
    stars = means.argmax(axis=1)
    rows = np.arange(len(contexts))
    gaps = means[rows, stars][:, None] - means
    diffs = feats - feats[rows, stars][:, None, :]
    proj = diffs @ inv
    quad = np.einsum("xad,xad->xa", proj, diffs)

    ratios = np.full_like(gaps, np.inf)
    admissible = quad > 0.0
    admissible[rows, stars] = False
    if not admissible.any():
        raise DegenerateInstanceError("no admissible alternative cell (all features tie)")
    if scale > 0.0:
        np.divide(gaps**2, scale * quad, out=ratios, where=admissible)
        i, arm = divmod(int(np.argmin(ratios)), ratios.shape[1])
    else:
        # Zero noise: every alternative is infinitely distinguishable.
        i, arm = divmod(int(np.argmax(admissible)), ratios.shape[1])
    closest = theta + (gaps[i, arm] / quad[i, arm]) * (inv @ diffs[i, arm])
    return float(ratios[i, arm]), (int(contexts[i]), int(arm)), closest


def glrt_infimum(
    theta: np.ndarray,
    design: PDMatrixPair,
    inst: BanditInstance,
    restrict_context: int | None = None,
) -> GlrtResult:
    """Closed-form ``inf ||theta - theta'||^2_{Vbar}`` over alternative models.

    With ``restrict_context`` set, only alternatives that change the optimal
    arm in that context are considered (the variant the agent applies to the
    context it just observed).
    """
    if restrict_context is None:
        contexts = np.arange(inst.n_contexts)
    else:
        contexts = np.array([restrict_context])
    value, cell, closest = _min_projection(theta, design.inv, inst, contexts, scale=1.0)
    return GlrtResult(value=value, cell=cell, closest_theta=closest)


def exploitation_test(
    theta: np.ndarray,
    design: PDMatrixPair,
    inst: BanditInstance,
    beta: float,
    restrict_context: int | None = None,
) -> bool:
    """True when the accuracy statistic clears the threshold (exploit)."""
    return glrt_infimum(theta, design, inst, restrict_context).value > beta


def feature_bonuses(design: PDMatrixPair, inst: BanditInstance) -> np.ndarray:
    """Per-cell elliptic norms ``||phi(x,a)||_{Vbar^{-1}}``, shape (X, A)."""
    proj = inst.features @ design.inv
    return np.sqrt(np.einsum("xad,xad->xa", proj, inst.features))


def optimistic_objective_f(
    omega: np.ndarray,
    rho_hat: np.ndarray,
    theta: np.ndarray,
    design: PDMatrixPair,
    gamma: float,
    inst: BanditInstance,
) -> float:
    """Optimistic expected reward of the exploration policy ``omega``."""
    upper = inst.features @ theta
    if gamma > 0.0:
        upper = upper + np.sqrt(gamma) * feature_bonuses(design, inst)
    return float(np.sum(rho_hat[:, None] * omega * upper))


def _weighted_design_inv(omega: np.ndarray, rho_hat: np.ndarray, inst: BanditInstance) -> np.ndarray:
    weights = rho_hat[:, None] * omega
    v_eta = np.einsum("xa,xad,xae->de", weights, inst.features, inst.features)
    v_eta += CONSTRAINT_RIDGE * inst.L**2 * np.eye(inst.dim)
    return _chol_inverse(v_eta)


def optimistic_constraint_g(
    omega: np.ndarray,
    rho_hat: np.ndarray,
    theta: np.ndarray,
    design: PDMatrixPair,
    gamma: float,
    z: float,
    inst: BanditInstance,
) -> tuple[float, tuple[int, int]]:
    """Optimistic information constraint ``g(omega, z)``.

    The infimum over alternatives reduces to the projection minimum in KL
    units; the optimism bonus does not depend on the alternative and is added
    as a policy-weighted sum.
    """
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z}")
    if inst.sigma == 0.0:
        # Exact rewards have infinite information; the constraint never binds.
        return np.inf, (-1, -1)
    inv = _weighted_design_inv(omega, rho_hat, inst)
    contexts = np.arange(inst.n_contexts)
    value, cell, _ = _min_projection(theta, inv, inst, contexts, scale=2.0 * inst.sigma**2)
    if gamma > 0.0:
        bonus = np.sum(rho_hat[:, None] * omega * feature_bonuses(design, inst))
        value += (2.0 * inst.B * inst.L / inst.sigma**2) * np.sqrt(gamma) * bonus
    return value - 1.0 / z, cell


def _normalized_rows(grad: np.ndarray, normalize: bool) -> np.ndarray:
    if normalize:
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        np.divide(grad, norms, out=grad, where=norms > 0.0)
    return grad


def lagrangian_subgradient(
    omega: np.ndarray,
    lam: float,
    z: float,
    rho_hat: np.ndarray,
    theta: np.ndarray,
    design: PDMatrixPair,
    gamma: float,
    inst: BanditInstance,
    normalize_per_context: bool = True,
) -> LagrangianEval:
    """Evaluate ``h = f + lambda g`` and one subgradient at ``omega``.

    The subgradient of the constraint's infimum follows Danskin's rule: it is
    the per-cell KL to the minimizing alternative.  With
    ``normalize_per_context`` each context row is rescaled to unit Euclidean
    norm, which makes one exponentiated-gradient step size usable across
    problems.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z}")

    feats = inst.features
    means = feats @ theta
    if gamma > 0.0:
        bonuses = feature_bonuses(design, inst)
        sqrt_gamma = np.sqrt(gamma)
    else:
        bonuses = np.zeros(means.shape)
        sqrt_gamma = 0.0
    weights = rho_hat[:, None] * omega

    f_value = float(np.sum(weights * (means + sqrt_gamma * bonuses)))

    if inst.sigma == 0.0:
        # Exact rewards: the constraint is slack at +inf for every policy and
        # contributes nothing to the policy subgradient.
        return LagrangianEval(
            f_value=f_value,
            g_value=np.inf,
            h_value=np.inf if lam > 0.0 else f_value,
            subgrad_omega=_normalized_rows(
                rho_hat[:, None] * (means + sqrt_gamma * bonuses),
                normalize_per_context,
            ),
            subgrad_lambda=np.inf,
            argmin_cell=(-1, -1),
            closest_theta=theta.copy(),
        )

    inv = _weighted_design_inv(omega, rho_hat, inst)
    contexts = np.arange(inst.n_contexts)
    inf_value, cell, closest = _min_projection(theta, inv, inst, contexts, scale=2.0 * inst.sigma**2)
    bonus_rate = (2.0 * inst.B * inst.L / inst.sigma**2) * sqrt_gamma
    g_value = inf_value + bonus_rate * float(np.sum(weights * bonuses)) - 1.0 / z

    kl_min = (feats @ (theta - closest)) ** 2 / (2.0 * inst.sigma**2)
    grad = _normalized_rows(
        rho_hat[:, None] * (
            means + sqrt_gamma * bonuses + lam * (kl_min + bonus_rate * bonuses)
        ),
        normalize_per_context,
    )

    return LagrangianEval(
        f_value=f_value,
        g_value=g_value,
        h_value=f_value + lam * g_value,
        subgrad_omega=grad,
        subgrad_lambda=g_value,
        argmin_cell=cell,
        closest_theta=closest,
    )
