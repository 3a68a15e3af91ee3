"""The piecewise-linear dual objective and its minimization.

f(p; B', S) = <p, B'> + mean_{(r,a,b) in S} [r - <a, p>]^+ over p >= 0.

Ties r == <a, p> count as rejections (strict inequality in every
acceptance indicator), which matters only on null sets for continuous
models but is fixed here for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import BoundsParams, InputModel, materialize


class RefusesHighDim(Exception):
    """grid_oracle is an exhaustive test oracle; it refuses m > 3."""


@dataclass(frozen=True)
class DualObjective:
    """Empirical dual objective with per-period budget vector B'."""

    budget: np.ndarray       # (m,)
    rewards: np.ndarray      # (S,)
    requirements: np.ndarray  # (S, m)

    def __post_init__(self):
        if not np.all(np.isfinite(self.budget)):
            raise ValueError("budget entries must be finite")
        if len(self.rewards) == 0:
            raise ValueError("empirical objective needs at least one sample")
        if self.requirements.shape != (len(self.rewards), len(self.budget)):
            raise ValueError("sample/budget dimension mismatch")

    @property
    def m(self) -> int:
        return len(self.budget)

    @classmethod
    def from_model(cls, model: InputModel, budget=None, n_samples: int = 100_000,
                   seed: int = 20_240_001) -> "DualObjective":
        """Monte-Carlo stand-in for the expectation form f(p; B', P)."""
        s = materialize(model, seed, n_samples)
        if budget is None:
            budget = model.replenishment_mean()
        return cls(np.asarray(budget, float), s.rewards, s.requirements)

    def with_budget(self, budget) -> "DualObjective":
        return replace(self, budget=np.asarray(budget, float))

    def subsample(self, cap: int) -> "DualObjective":
        """Deterministic stride subsample used to bound solve cost."""
        n = len(self.rewards)
        if cap <= 0 or n <= cap:
            return self
        idx = np.linspace(0, n - 1, cap).astype(int)
        return DualObjective(self.budget, self.rewards[idx], self.requirements[idx])


@dataclass
class SolverOpts:
    """Projected-subgradient options (deterministic given fixed values)."""

    max_iters: int = 5000
    tol: float = 1e-6
    step_scale: float = 1.0
    refine_rounds: int = 60
    refine_iters: int = 40
    sample_cap: int = 0          # 0 = use all samples
    grid_resolution: int = 501


@dataclass
class DualSolution:
    p: np.ndarray
    value: float
    iterations: int
    converged: bool


def f_eval(obj: DualObjective, p) -> float:
    p = np.asarray(p, float)
    if p.shape != (obj.m,):
        raise ValueError(f"price has shape {p.shape}, expected ({obj.m},)")
    surplus = obj.rewards - obj.requirements @ p
    return float(p @ obj.budget + np.maximum(surplus, 0.0).mean())


def f_subgradient(obj: DualObjective, p) -> np.ndarray:
    """B' - mean of a over samples with r > <a, p> (ties rejected)."""
    p = np.asarray(p, float)
    if p.shape != (obj.m,):
        raise ValueError(f"price has shape {p.shape}, expected ({obj.m},)")
    accept = obj.rewards > obj.requirements @ p
    return obj.budget - accept @ obj.requirements / len(obj.rewards)


def _f_and_grad(budget, rewards, A, p):
    surplus = rewards - A @ p
    accept = surplus > 0.0
    val = p @ budget + np.where(accept, surplus, 0.0).mean()
    grad = budget - accept @ A / len(rewards)
    return val, grad


def minimize_f(obj: DualObjective, opts: SolverOpts | None = None) -> DualSolution:
    """Minimize f over p >= 0 by projected subgradient descent.

    Stage one runs the classic 1/sqrt(k) schedule with Polyak averaging;
    because f is piecewise linear (sharp minimum), a second stage of
    geometrically decaying constant-step sweeps then polishes the best
    iterate to well below the averaging error floor.  The best evaluated
    point is returned, so the reported value is an upper bound on min f.
    """
    if opts is None:
        opts = SolverOpts()
    obj = obj.subsample(opts.sample_cap)
    budget, rewards, A = obj.budget, obj.rewards, obj.requirements

    p = np.zeros(obj.m)
    best_p, best_val = p.copy(), _f_and_grad(budget, rewards, A, p)[0]
    avg = np.zeros(obj.m)
    step0 = opts.step_scale
    n_stage1 = max(opts.max_iters, 1)
    check_every = max(n_stage1 // 10, 1)
    last_check = np.inf
    converged = False
    iters = 0
    for k in range(1, n_stage1 + 1):
        val, grad = _f_and_grad(budget, rewards, A, p)
        if val < best_val:
            best_val, best_p = val, p.copy()
        p = np.maximum(p - (step0 / np.sqrt(k)) * grad, 0.0)
        avg += (p - avg) / k
        iters += 1
        if k % check_every == 0:
            v_avg = _f_and_grad(budget, rewards, A, avg)[0]
            if v_avg < best_val:
                best_val, best_p = v_avg, avg.copy()
            if abs(last_check - best_val) <= opts.tol * max(1.0, abs(best_val)):
                converged = True
                break
            last_check = best_val

    # geometric step decay from the incumbent with normalized directions;
    # each iterate moves exactly sigma, so shallow slopes between kinks do
    # not stall progress and the decay localizes the sharp minimum
    p = best_p.copy()
    sigma = step0 * 0.5
    for _ in range(opts.refine_rounds):
        for _ in range(opts.refine_iters):
            val, grad = _f_and_grad(budget, rewards, A, p)
            if val < best_val:
                best_val, best_p = val, p.copy()
            # drop components that push into the p >= 0 boundary, otherwise
            # a clamped coordinate's gradient drowns the free directions
            grad = np.where((p <= 0.0) & (grad > 0.0), 0.0, grad)
            norm = float(np.linalg.norm(grad))
            if norm < 1e-14:
                break
            p = np.maximum(p - (sigma / norm) * grad, 0.0)
            iters += 1
        sigma *= 0.5
        if sigma < 1e-16:
            break
    val = _f_and_grad(budget, rewards, A, p)[0]
    if val < best_val:
        best_val, best_p = val, p.copy()
    return DualSolution(best_p, best_val, iters, converged)


def grid_oracle(obj: DualObjective, box: float, resolution: int) -> tuple[np.ndarray, float]:
    """Exhaustive grid search over [0, box]^m; independent test oracle."""
    if obj.m > 3:
        raise RefusesHighDim(f"grid oracle limited to m <= 3, got m={obj.m}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    axes = [np.linspace(0.0, box, resolution)] * obj.m
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    best_val = np.inf
    best_p = pts[0]
    for lo in range(0, len(pts), 200_000):
        block = pts[lo:lo + 200_000]
        surplus = obj.rewards[None, :] - block @ obj.requirements.T
        vals = block @ obj.budget + np.maximum(surplus, 0.0).mean(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_p = block[k]
    return best_p.copy(), best_val


def project_omega_p(p, bounds: BoundsParams) -> np.ndarray:
    """Euclidean projection onto {p >= 0 : sum_j p_j <= r_bar / b_lower}."""
    cap = bounds.r_bar / bounds.b_lower
    w = np.maximum(np.asarray(p, float), 0.0)
    if w.sum() <= cap:
        return w
    # sort-based projection onto the scaled simplex (result is nonnegative)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - cap
    ks = np.arange(1, len(w) + 1)
    valid = u - css / ks > 0
    rho = int(np.nonzero(valid)[0][-1])
    tau = css[rho] / (rho + 1)
    return np.maximum(w - tau, 0.0)
