"""Offline solvers for the allocation programs behind the regret lower bound.

These run with the true parameter and context distribution and serve as
reference points for the online agent and for tests:

* ``pure_exploration_value``: the best-arm-identification rate, whose
  reciprocal ``z_lower`` is the feasibility threshold of the constrained
  program;
* ``solve_Pz_offline``: the per-context-normalized program at a given ``z``,
  solved by the same primal-dual iteration the agent runs (true model, no
  optimism);
* ``solve_P_offline``: the unnormalized program whose value ``v_star`` is
  the asymptotic regret constant, solved by scalar iteration on the
  constraint multiplier with mirror-descent subproblems on the direction
  simplex.

All certification is by restart stability and duality-gap estimates; these
are small-instance oracles, not production paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import PDMatrixPair, _chol_inverse
from .lowerbound import _min_projection, lagrangian_subgradient
from .model import BanditInstance, best_arms, expected_best_mean, true_gaps
from .solid import primal_dual_update


@dataclass
class PureExplorationResult:
    z_lower: float
    omega: np.ndarray
    value: float
    restart_values: list[float]


@dataclass
class PzSolution:
    omega: np.ndarray
    u_star: float
    lambda_star: float
    feasible: bool
    gap_estimate: float
    f_value: float
    best_constraint: float


@dataclass
class LowerBoundSolution:
    eta_star: np.ndarray
    v_star: float
    z_lower: float
    z_bar: float
    z_star: float
    kkt_residual: float


def _kl_infimum(
    inst: BanditInstance, eta: np.ndarray, ridge: float
) -> tuple[float, tuple[int, int], np.ndarray]:
    """KL-units infimum over alternatives of the eta-weighted information."""
    v_eta = np.einsum("xa,xad,xae->de", eta, inst.features, inst.features)
    v_eta += ridge * np.eye(inst.dim)
    inv = _chol_inverse(v_eta)
    contexts = np.arange(inst.n_contexts)
    return _min_projection(
        inst.theta_star, inv, inst, contexts, scale=2.0 * inst.sigma**2
    )


def _kl_table(inst: BanditInstance, closest: np.ndarray) -> np.ndarray:
    diff = inst.features @ (inst.theta_star - closest)
    return diff**2 / (2.0 * inst.sigma**2)


def _admissible_cells(
    inst: BanditInstance,
) -> list[tuple[int, int, float, np.ndarray]]:
    """Suboptimal cells with a nondegenerate direction to the incumbent."""
    stars = best_arms(inst, inst.theta_star)
    cells = []
    for x in range(inst.n_contexts):
        mu = inst.features[x] @ inst.theta_star
        b = int(stars[x])
        for a in range(inst.n_arms):
            if a == b:
                continue
            u = inst.features[x, a] - inst.features[x, b]
            if float(u @ u) == 0.0:
                continue
            cells.append((x, a, float((mu[b] - mu[a]) ** 2), u))
    return cells


def _epigraph_polish(
    inst: BanditInstance, omega0: np.ndarray, ridge: float
) -> tuple[float, np.ndarray]:
    """Finish a restart with a smooth solve of the epigraph form.

    The ascent objective is concave (an infimum of policy-linear functions),
    but multiplicative updates crawl once iterates touch a simplex face, so a
    restart can stall a few percent short.  Solving max t subject to every
    cell's projected information exceeding t, with analytic gradients, closes
    that gap.  The returned value is re-evaluated at the cleaned policy, never
    read off the solver.
    """
    rho = inst.rho
    shape = (inst.n_contexts, inst.n_arms)
    scale = 2.0 * inst.sigma**2
    cells = _admissible_cells(inst)
    eye = ridge * np.eye(inst.dim)

    cache: dict[str, object] = {"key": None, "inv": None}

    def design_inv(z: np.ndarray) -> np.ndarray:
        key = z[:-1].tobytes()
        if cache["key"] != key:
            om = np.clip(z[:-1], 0.0, None).reshape(shape)
            v = np.einsum(
                "xa,xad,xae->de", rho[:, None] * om, inst.features, inst.features
            )
            cache["key"] = key
            cache["inv"] = _chol_inverse(v + eye)
        return cache["inv"]

    def cell_constraint(z: np.ndarray, cell) -> float:
        _, _, gap2, u = cell
        w = design_inv(z) @ u
        return gap2 / (scale * float(u @ w)) - z[-1]

    def cell_jac(z: np.ndarray, cell) -> np.ndarray:
        _, _, gap2, u = cell
        w = design_inv(z) @ u
        q = float(u @ w)
        proj = inst.features @ w
        jac = np.empty_like(z)
        jac[:-1] = (gap2 / (scale * q * q)) * (rho[:, None] * proj**2).ravel()
        jac[-1] = -1.0
        return jac

    def row_sum(z: np.ndarray, idx: np.ndarray) -> float:
        return float(z[idx].sum()) - 1.0

    def row_jac(z: np.ndarray, idx: np.ndarray) -> np.ndarray:
        jac = np.zeros_like(z)
        jac[idx] = 1.0
        return jac

    def neg_t(z: np.ndarray) -> float:
        return -z[-1]

    def neg_t_jac(z: np.ndarray) -> np.ndarray:
        jac = np.zeros_like(z)
        jac[-1] = -1.0
        return jac

    t0, _, _ = _kl_infimum(inst, rho[:, None] * omega0, ridge)
    z0 = np.concatenate([omega0.ravel(), [t0]])
    constraints = [
        {
            "type": "eq",
            "fun": row_sum,
            "jac": row_jac,
            "args": (np.arange(x * inst.n_arms, (x + 1) * inst.n_arms),),
        }
        for x in range(inst.n_contexts)
    ] + [
        {"type": "ineq", "fun": cell_constraint, "jac": cell_jac, "args": (cell,)}
        for cell in cells
    ]
    bounds = [(0.0, 1.0)] * omega0.size + [(None, None)]
    try:
        res = minimize(
            neg_t,
            z0,
            jac=neg_t_jac,
            bounds=bounds,
            constraints=constraints,
            method="SLSQP",
            options={"maxiter": 300, "ftol": 1e-12},
        )
    except np.linalg.LinAlgError:
        return -np.inf, omega0
    omega = np.clip(res.x[:-1].reshape(shape), 0.0, None)
    sums = omega.sum(axis=1, keepdims=True)
    if np.any(sums <= 0.0):
        return -np.inf, omega0
    omega /= sums
    value, _, _ = _kl_infimum(inst, rho[:, None] * omega, ridge)
    return value, omega


def pure_exploration_value(
    inst: BanditInstance,
    max_iters: int = 4000,
    tol: float = 1e-4,
    rng: np.random.Generator | None = None,
    restarts: int = 10,
    step0: float = 0.5,
) -> PureExplorationResult:
    """Maximize the alternative-model information rate over policies.

    Exponentiated-gradient ascent with Danskin subgradients, multi-restart;
    each restart is finished by a smooth epigraph solve from its best iterate.
    The first restart starts uniform, the rest from Dirichlet draws.  Each
    restart reports its own best value; the overall best is returned, with
    ``z_lower`` its reciprocal.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    rho = inst.rho
    ridge = 1e-9 * inst.L**2
    shape = (inst.n_contexts, inst.n_arms)

    best_value = -np.inf
    best_omega = np.full(shape, 1.0 / inst.n_arms)
    restart_values: list[float] = []
    for r in range(restarts):
        if r == 0:
            omega = np.full(shape, 1.0 / inst.n_arms)
        else:
            omega = rng.dirichlet(np.ones(inst.n_arms), size=inst.n_contexts)
        local_best = -np.inf
        local_omega = omega.copy()
        avg = np.zeros(shape)
        stall_mark = -np.inf
        for i in range(1, max_iters + 1):
            value, _, closest = _kl_infimum(inst, rho[:, None] * omega, ridge)
            if value > local_best:
                local_best = value
                local_omega = omega.copy()
            grad = rho[:, None] * _kl_table(inst, closest)
            norms = np.linalg.norm(grad, axis=1, keepdims=True)
            np.divide(grad, norms, out=grad, where=norms > 0.0)
            omega, _ = primal_dual_update(
                omega, 0.0, grad, 0.0, step0 / np.sqrt(i), 1.0, 0.0
            )
            avg += omega
            if i % 200 == 0:
                value_avg, _, _ = _kl_infimum(inst, rho[:, None] * (avg / i), ridge)
                if value_avg > local_best:
                    local_best = value_avg
                    local_omega = avg / i
                # Early exit once 200 iterations stop improving the best value.
                if local_best - stall_mark < tol * max(local_best, 1e-12):
                    break
                stall_mark = local_best
        value_p, omega_p = _epigraph_polish(inst, local_omega, ridge)
        if value_p > local_best:
            local_best = value_p
            local_omega = omega_p
        restart_values.append(local_best)
        if local_best > best_value:
            best_value = local_best
            best_omega = local_omega
    return PureExplorationResult(
        z_lower=1.0 / best_value,
        omega=best_omega,
        value=best_value,
        restart_values=restart_values,
    )


def solve_Pz_offline(
    inst: BanditInstance,
    z: float,
    max_iters: int = 40000,
    tol: float = 1e-3,
    rng: np.random.Generator | None = None,
    lambda_max: float | None = None,
    step_omega: float = 1.0,
    step_lambda: float | None = None,
    polish_iters: int = 4000,
) -> PzSolution:
    """Solve the z-normalized allocation program by primal-dual iteration.

    Identical update rule to the agent, with the true parameter, the true
    context distribution and no optimism bonus.  The reported value is
    ``u_star = z (mu_star - f)`` at the best feasible policy found; a final
    frozen-multiplier ascent estimates the duality gap.
    """
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z}")
    if rng is None:
        rng = np.random.default_rng(0)
    if lambda_max is None:
        lambda_max = max(100.0, 10.0 * inst.B * inst.L * z)
    if step_lambda is None:
        step_lambda = max(1.0, inst.B * inst.L * z)

    theta = inst.theta_star
    rho = inst.rho
    dummy = PDMatrixPair(inst.dim, 1.0)
    mu_star = expected_best_mean(inst)
    shape = (inst.n_contexts, inst.n_arms)

    omega = np.full(shape, 1.0 / inst.n_arms)
    lam = 0.0
    best_constraint = -np.inf
    best_f = -np.inf
    best_f_loose = -np.inf
    best_omega = omega.copy()
    lam_tail, tail_count = 0.0, 0

    def evaluate(om, lm):
        return lagrangian_subgradient(
            om, lm, z, rho, theta, dummy, 0.0, inst, normalize_per_context=True
        )

    for i in range(1, max_iters + 1):
        lag = evaluate(omega, lam)
        if lag.g_value > best_constraint:
            best_constraint = lag.g_value
        if lag.g_value >= 0.0 and lag.f_value > best_f:
            best_f = lag.f_value
            best_omega = omega.copy()
        if lag.g_value >= -tol and lag.f_value > best_f_loose:
            best_f_loose = lag.f_value
            if not np.isfinite(best_f):
                best_omega = omega.copy()
        omega, lam = primal_dual_update(
            omega,
            lam,
            lag.subgrad_omega,
            lag.g_value,
            step_omega / np.sqrt(i),
            step_lambda / np.sqrt(i),
            lambda_max,
        )
        if 2 * i > max_iters:
            lam_tail += lam
            tail_count += 1

    lam_bar = lam_tail / max(tail_count, 1)

    # Frozen-multiplier ascent: an upper estimate of the primal value by weak
    # duality, and a second chance to improve the feasible incumbent.
    dual_estimate = -np.inf
    omega_p = best_omega.copy()
    for j in range(1, polish_iters + 1):
        lag = evaluate(omega_p, lam_bar)
        dual_estimate = max(dual_estimate, lag.f_value + lam_bar * lag.g_value)
        if lag.g_value > best_constraint:
            best_constraint = lag.g_value
        if lag.g_value >= 0.0 and lag.f_value > best_f:
            best_f = lag.f_value
            best_omega = omega_p.copy()
        omega_p, _ = primal_dual_update(
            omega_p, lam_bar, lag.subgrad_omega, lag.g_value,
            step_omega / np.sqrt(j), 0.0, lambda_max,
        )

    feasible = best_constraint >= -tol
    f_hat = best_f if np.isfinite(best_f) else best_f_loose
    if feasible and np.isfinite(f_hat):
        u_star = z * (mu_star - f_hat)
        gap = max(dual_estimate - f_hat, 0.0)
    else:
        u_star = np.inf
        gap = np.inf
    return PzSolution(
        omega=best_omega,
        u_star=u_star,
        lambda_star=lam_bar,
        feasible=feasible,
        gap_estimate=gap,
        f_value=f_hat,
        best_constraint=best_constraint,
    )


def solve_P_offline(
    inst: BanditInstance,
    max_iters: int = 2000,
    tol: float = 1e-4,
    rng: np.random.Generator | None = None,
    mass_cap: float = 1e6,
) -> LowerBoundSolution:
    """Solve the unnormalized allocation program.

    The infimum may push unbounded mass onto optimal arms (they add
    information at zero cost), so optimal-arm pulls are pinned at ``mass_cap``.
    In the suboptimal coordinates the information level K is then positively
    homogeneous, which makes a fixed-multiplier Lagrangian bang-bang; the
    value is instead the best cost-per-information ratio over directions,

        v* = min over the direction simplex of (p . gaps) / K(p),

    found by iterating on the constraint multiplier (the optimal multiplier
    equals v*): each probe t solves min_p p . gaps - t K(p) by mirror descent
    on the compact simplex and the best ratio seen becomes the next probe.
    A final rescale puts the returned direction exactly on the constraint
    boundary.  ``eta_star`` carries ``mass_cap`` at the optimal arms.
    """
    pe = pure_exploration_value(inst, rng=rng)
    gaps = true_gaps(inst)
    stars = best_arms(inst, inst.theta_star)
    rows = np.arange(inst.n_contexts)
    sub = np.ones((inst.n_contexts, inst.n_arms), dtype=bool)
    sub[rows, stars] = False

    eta_opt = np.zeros((inst.n_contexts, inst.n_arms))
    eta_opt[rows, stars] = mass_cap
    ridge = 1e-12 * mass_cap * max(inst.L**2, 1.0)

    def constraint(eta_sub):
        eta = eta_opt.copy()
        eta[sub] = eta_sub
        value, _, closest = _kl_infimum(inst, eta, ridge)
        return value, _kl_table(inst, closest)[sub]

    n_sub = int(sub.sum())
    gaps_sub = gaps[sub]

    k0, _ = constraint(np.zeros(n_sub))
    if k0 >= 1.0:
        # Optimal arms alone carry enough information; exploration is free.
        return LowerBoundSolution(
            eta_star=eta_opt, v_star=0.0, z_lower=pe.z_lower,
            z_bar=0.0, z_star=0.0, kkt_residual=0.0,
        )

    def ratio(p):
        k_val, _ = constraint(p)
        if k_val <= 0.0:
            return np.inf
        return float(p @ gaps_sub) / k_val

    def subproblem(t, p_init, iters):
        """Minimize p . gaps - t K(p) over the simplex; track the best ratio."""
        p = p_init[None, :].copy()
        best_ratio = np.inf
        best_p = p_init.copy()
        avg = np.zeros(n_sub)
        for i in range(1, iters + 1):
            k_val, k_grad = constraint(p[0])
            if k_val > 0.0:
                r = float(p[0] @ gaps_sub) / k_val
                if r < best_ratio:
                    best_ratio = r
                    best_p = p[0].copy()
            grad = gaps_sub - t * k_grad
            norm = np.linalg.norm(grad)
            if norm > 0.0:
                grad = grad / norm
            # The update ascends, so feed the negated descent direction.
            p, _ = primal_dual_update(
                p, 0.0, -grad[None, :], 0.0, 0.5 / np.sqrt(i), 1.0, 0.0
            )
            avg += p[0]
            if i % 100 == 0:
                r_avg = ratio(avg / i)
                if r_avg < best_ratio:
                    best_ratio = r_avg
                    best_p = avg / i
        return best_ratio, best_p

    p_warm = np.full(n_sub, 1.0 / n_sub)
    t = ratio(p_warm)
    inner_iters = max(200, max_iters // 4)
    improvement = np.inf
    for _ in range(40):
        t_new, p_new = subproblem(t, p_warm, inner_iters)
        improvement = t - t_new
        if t_new < t:
            t = t_new
            p_warm = p_new
        if improvement <= tol * max(t, 1e-12):
            break

    # Scale onto the constraint boundary: K is monotone in the scale.
    lo, hi = 1e-9, 1e9
    for _ in range(120):
        s = np.sqrt(lo * hi)
        k_s, _ = constraint(s * p_warm)
        if k_s >= 1.0:
            hi = s
        else:
            lo = s
        if hi / lo <= 1.0 + 1e-10:
            break
    eta_scaled = hi * p_warm
    v_hat = float(eta_scaled @ gaps_sub)
    kkt_residual = max(improvement, 0.0) + abs(v_hat - t)

    eta_star = eta_opt.copy()
    eta_star[sub] = eta_scaled
    per_context = np.where(sub, eta_star, 0.0).sum(axis=1)
    z_bar = float((per_context / inst.rho).max())
    z_star = float(per_context.sum())
    return LowerBoundSolution(
        eta_star=eta_star,
        v_star=v_hat,
        z_lower=pe.z_lower,
        z_bar=z_bar,
        z_star=z_star,
        kkt_residual=kkt_residual,
    )
