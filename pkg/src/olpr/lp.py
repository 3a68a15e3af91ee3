"""Small dense LPs: the induced fluid LP and the hindsight relaxation.

The induced LP is solved by a hand-rolled revised simplex (Bland's rule)
because we need the basis identity and degeneracy status, not just the
optimum.  The hindsight relaxation is a plain box-constrained LP with m
rows; it is delegated to scipy's HiGHS backend, with a streamed dual upper
bound for horizons too long to materialize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .dual import DualObjective, SolverOpts, f_eval, minimize_f

FEAS_TOL = 1e-9
OPT_TOL = 1e-7
PIVOT_TOL = 1e-10


class SimplexError(Exception):
    pass


class DegenerateBase(Exception):
    """check_stability requires a non-degenerate base instance."""


@dataclass(frozen=True)
class InducedLpInstance:
    """max R.X  s.t.  A X + S = B,  X + V = mu,  X, V, S >= 0."""

    rewards: np.ndarray       # (n,)
    requirements: np.ndarray  # (m, n)
    budget: np.ndarray        # (m,)
    caps: np.ndarray          # (n,)

    def __post_init__(self):
        if np.any(self.caps < 0):
            raise ValueError("caps must be nonnegative")
        if not np.all(np.isfinite(self.budget)):
            raise ValueError("budget must be finite")
        m, n = self.requirements.shape
        if self.rewards.shape != (n,) or self.budget.shape != (m,) or self.caps.shape != (n,):
            raise ValueError("inconsistent instance dimensions")

    @property
    def shape(self) -> tuple[int, int]:
        return self.requirements.shape  # (m, n)

    def scaled(self, alpha: float) -> "InducedLpInstance":
        return InducedLpInstance(self.rewards, self.requirements,
                                 alpha * self.budget, alpha * self.caps)


@dataclass
class LpSolution:
    X: np.ndarray
    V: np.ndarray
    S: np.ndarray
    objective: float
    basis: set          # {(class, index)} for the final simplex basis
    unique: bool
    degenerate: bool
    duals_resource: np.ndarray  # prices of the m budget rows
    duals_type: np.ndarray      # prices of the n cap rows

    @property
    def support_size(self) -> int:
        return int((self.X > FEAS_TOL).sum() + (self.V > FEAS_TOL).sum()
                   + (self.S > FEAS_TOL).sum())


def _revised_simplex(M, rhs, c, basis, max_iters=20_000):
    """Maximize c.x s.t. M x = rhs, x >= 0, starting from a feasible basis.

    Bland's rule throughout (smallest eligible index), so no cycling.
    Returns (x, basis, y) with y the row duals.
    """
    n_rows, n_cols = M.shape
    basis = list(basis)
    for _ in range(max_iters):
        B = M[:, basis]
        xB = np.linalg.solve(B, rhs)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - y @ M
        in_basis = np.zeros(n_cols, bool)
        in_basis[basis] = True
        candidates = np.nonzero(~in_basis & (reduced > OPT_TOL))[0]
        if len(candidates) == 0:
            x = np.zeros(n_cols)
            x[basis] = xB
            return x, basis, y
        e = int(candidates[0])
        d = np.linalg.solve(B, M[:, e])
        pos = d > PIVOT_TOL
        if not np.any(pos):
            raise SimplexError("LP is unbounded")
        ratios = np.full(n_rows, np.inf)
        ratios[pos] = xB[pos] / d[pos]
        rmin = ratios.min()
        ties = np.nonzero(ratios <= rmin + PIVOT_TOL)[0]
        leave = ties[int(np.argmin([basis[i] for i in ties]))]
        basis[leave] = e
    raise SimplexError("simplex iteration limit reached")


def _solve_induced_raw(inst: InducedLpInstance, rewards=None):
    m, n = inst.shape
    if rewards is None:
        rewards = inst.rewards
    # columns: X (0..n-1), V (n..2n-1), S (2n..2n+m-1)
    M = np.zeros((m + n, 2 * n + m))
    M[:m, :n] = inst.requirements
    M[:m, 2 * n:] = np.eye(m)
    M[m:, :n] = np.eye(n)
    M[m:, n:2 * n] = np.eye(n)
    rhs = np.concatenate([inst.budget, inst.caps])
    c = np.concatenate([rewards, np.zeros(n + m)])
    basis0 = list(range(2 * n, 2 * n + m)) + list(range(n, 2 * n))  # S then V
    x, basis, y = _revised_simplex(M, rhs, c, basis0)
    return x[:n], x[n:2 * n], x[2 * n:], basis, y


def solve_induced(inst: InducedLpInstance, check_uniqueness: bool = True) -> LpSolution:
    """Optimal solution, basis, and degeneracy status of the induced LP.

    Degeneracy means either the optimal support has fewer than m + n
    strictly positive variables, or the optimum face is not a single vertex
    (detected by re-solving under a tiny deterministic objective tilt).
    """
    m, n = inst.shape
    X, V, S, basis, y = _solve_induced_raw(inst)
    _check_feasible(inst, X, V, S)
    objective = float(inst.rewards @ X)

    def classify(col):
        if col < n:
            return ("X", col)
        if col < 2 * n:
            return ("V", col - n)
        return ("S", col - 2 * n)

    basis_set = {classify(c_) for c_ in basis}
    support = int((X > FEAS_TOL).sum() + (V > FEAS_TOL).sum() + (S > FEAS_TOL).sum())
    unique = True
    if check_uniqueness:
        tilt = np.random.default_rng(0).uniform(-1.0, 1.0, n) * 1e-7
        X2, V2, S2, _, _ = _solve_induced_raw(inst, rewards=inst.rewards + tilt)
        moved = max(np.max(np.abs(X - X2), initial=0.0),
                    np.max(np.abs(V - V2), initial=0.0),
                    np.max(np.abs(S - S2), initial=0.0))
        unique = moved <= 1e-5
    degenerate = (support < m + n) or not unique
    return LpSolution(X, V, S, objective, basis_set, unique, degenerate,
                      duals_resource=y[:m], duals_type=y[m:])


def _check_feasible(inst, X, V, S):
    m, n = inst.shape
    res = np.max(np.abs(inst.requirements @ X + S - inst.budget), initial=0.0)
    cap = np.max(np.abs(X + V - inst.caps), initial=0.0)
    neg = -min(X.min(initial=0.0), V.min(initial=0.0), S.min(initial=0.0))
    if max(res, cap, neg) > 1e-7:
        raise SimplexError(f"solution failed feasibility check ({max(res, cap, neg):.2e})")


@dataclass
class StabilityReport:
    basis_unchanged: bool
    midpoint_linear_error: float
    base: LpSolution
    perturbed: LpSolution


def check_stability(inst: InducedLpInstance, delta_budget, delta_caps) -> StabilityReport:
    """Perturbation response of a non-degenerate induced LP.

    Checks whether the optimal basis survives the shift and how far the
    midpoint solve deviates from the average of the endpoint solves (zero
    for basis-preserving perturbations)."""
    base = solve_induced(inst)
    if base.degenerate:
        raise DegenerateBase("stability analysis needs a non-degenerate base LP")
    delta_budget = np.asarray(delta_budget, float)
    delta_caps = np.asarray(delta_caps, float)
    pert = InducedLpInstance(inst.rewards, inst.requirements,
                             inst.budget + delta_budget, inst.caps + delta_caps)
    sol_p = solve_induced(pert)
    mid = InducedLpInstance(inst.rewards, inst.requirements,
                            inst.budget + 0.5 * delta_budget, inst.caps + 0.5 * delta_caps)
    sol_m = solve_induced(mid, check_uniqueness=False)
    err = max(
        np.max(np.abs(sol_m.X - 0.5 * (base.X + sol_p.X)), initial=0.0),
        np.max(np.abs(sol_m.V - 0.5 * (base.V + sol_p.V)), initial=0.0),
        np.max(np.abs(sol_m.S - 0.5 * (base.S + sol_p.S)), initial=0.0),
    )
    return StabilityReport(sol_p.basis == base.basis, float(err), base, sol_p)


# ---------------------------------------------------------------------------
# Hindsight relaxation: max r.x  s.t.  A^T x <= sum_t b_t,  0 <= x <= 1.
# ---------------------------------------------------------------------------

def solve_hindsight_relaxation(rewards, requirements, replenishments):
    """Optimal value and fractional plan of the terminal-constraint
    relaxation; upper-bounds the reward of every feasible online policy on
    the same sample path."""
    rewards = np.asarray(rewards, float)
    A = np.asarray(requirements, float)
    caps = np.asarray(replenishments, float).sum(axis=0)
    T = len(rewards)
    res = linprog(-rewards, A_ub=A.T, b_ub=caps, bounds=(0.0, 1.0),
                  method="highs")
    if not res.success:
        raise SimplexError(f"hindsight LP failed: {res.message}")
    x = np.clip(res.x, 0.0, 1.0)
    return float(-res.fun), x


def hindsight_value_streaming(model, seed, T: int, opts: SolverOpts | None = None,
                              chunk: int = 65536, sample_cap: int = 20_000) -> float:
    """Dual upper bound on the hindsight relaxation without materializing
    the path: pass one collects budget totals and a strided subsample, the
    dual price is fitted on the subsample, and pass two evaluates the exact
    empirical dual objective at that price.  Any price yields a valid upper
    bound, so dominance over online policies is preserved."""
    from .model import stream_chunks

    m = model.m
    totals = np.zeros(m)
    stride = max(1, T // sample_cap)
    sub_r, sub_a = [], []
    for off, s in _offset_chunks(stream_chunks(model, seed, T, chunk)):
        totals += s.replenishments.sum(axis=0)
        pick = np.arange((-off) % stride, len(s.rewards), stride)
        sub_r.append(s.rewards[pick])
        sub_a.append(s.requirements[pick])
    obj = DualObjective(totals / T, np.concatenate(sub_r), np.vstack(sub_a))
    p = minimize_f(obj, opts).p
    value = float(p @ totals)
    for _, s in _offset_chunks(stream_chunks(model, seed, T, chunk)):
        surplus = s.rewards - s.requirements @ p
        value += float(np.maximum(surplus, 0.0).sum())
    return value


def _offset_chunks(chunks):
    off = 0
    for s in chunks:
        yield off, s
        off += len(s.rewards)


def induced_from_model(model, budget=None) -> InducedLpInstance:
    """Fluid LP of a finite-support model (per-period rates)."""
    spec = model.support
    if spec is None:
        raise ValueError("induced LP requires a finite-support model")
    if budget is None:
        budget = model.replenishment_mean()
    return InducedLpInstance(spec.rewards, spec.requirements.T,
                             np.asarray(budget, float), spec.probs)


def check_complementary_slackness(inst: InducedLpInstance, sol: LpSolution,
                                  tol: float = OPT_TOL) -> float:
    """Max violation of dual feasibility / complementary slackness."""
    m, n = inst.shape
    y_r, y_t = sol.duals_resource, sol.duals_type
    # reduced costs of X / V / S must be <= 0 at a maximum
    red_X = inst.rewards - y_r @ inst.requirements - y_t
    red_V = -y_t
    red_S = -y_r
    worst = max(red_X.max(initial=-np.inf), red_V.max(initial=-np.inf),
                red_S.max(initial=-np.inf), 0.0)
    # slackness: positive primal value forces zero reduced cost
    worst = max(worst, np.max(np.abs(red_X) * (sol.X > tol), initial=0.0))
    worst = max(worst, np.max(np.abs(red_V) * (sol.V > tol), initial=0.0))
    worst = max(worst, np.max(np.abs(red_S) * (sol.S > tol), initial=0.0))
    return float(worst)
