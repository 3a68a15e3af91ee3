"""Online accept/reject policies driven by dual prices and batch LPs.

All policies share the same contract: consume a seeded sample path, maintain
a nonnegative inventory vector, and return realized reward plus a stockout
count.  A stockout is a period where the price rule alone would accept but
inventory feasibility forces rejection; it is counted identically for every
dual-price policy here.

Two feasibility conventions coexist on purpose.  The fixed-step descent
policy and the batch-LP policy check inventory before the period's
replenishment arrives (ell >= a); the accumulation/conversion components and
the baseline check it after (ell + b >= a).  Each is kept exactly as its
decision rule states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import (Overrides, accumulation_schedule, accumulation_warmup,
                        alg1_params, alg2_params, conversion_schedule,
                        nondeg_constants)
from .dual import DualObjective, SolverOpts, minimize_f, project_omega_p
from .lp import FEAS_TOL, InducedLpInstance, solve_induced
from .model import InputModel, Stream, materialize

ALGORITHMS = ("bounded", "finite_support", "nondegenerate", "baseline_olp")


class WarmupExceedsHorizon(UserWarning):
    """Warm-up length >= T; the run degenerates to reject-all."""


class ScheduleDegenerate(UserWarning):
    """Horizon too short for a doubling batch; single batch used instead."""


class DegenerateBatchLp(UserWarning):
    """A batch induced LP came back degenerate; its solution is still used."""


def _policy_solver_defaults() -> SolverOpts:
    # harness-grade settings: cheaper than the test-grade defaults but still
    # deterministic; sample_cap bounds per-solve cost at long horizons
    return SolverOpts(max_iters=800, tol=1e-6, step_scale=1.0,
                      refine_rounds=36, refine_iters=25, sample_cap=1500)


@dataclass
class PolicyConfig:
    """Which policy to run and with which constants/solver settings."""

    algorithm: str = "nondegenerate"
    overrides: Overrides = field(default_factory=Overrides)
    solver: SolverOpts = field(default_factory=_policy_solver_defaults)
    record_trace: bool = False
    record_decisions: bool = False
    baseline_resolve: str = "geometric"   # or "every_period"
    eps_covering: float = 1e-4            # accuracy knob behind C5
    budget_floor_frac: float = 0.05       # clamp solve budgets at frac*b_lower

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.baseline_resolve not in ("geometric", "every_period"):
            raise ValueError("baseline_resolve must be geometric or every_period")


@dataclass
class TrialResult:
    reward: float
    stockouts: int
    T: int
    final_inventory: np.ndarray
    trace: np.ndarray | None = None       # (T, m): inventory at period start
    decisions: np.ndarray | None = None   # (T,) 0/1
    notes: list = field(default_factory=list)


class _Recorder:
    """Collects the start-of-period inventory and decisions when asked."""

    def __init__(self, T: int, m: int, trace: bool, decisions: bool):
        self.trace = np.zeros((T, m)) if trace else None
        self.decisions = np.zeros(T, dtype=np.int8) if decisions else None
        self.t = 0

    @property
    def active(self) -> bool:
        return self.trace is not None or self.decisions is not None

    def step(self, ell, x: int):
        if self.trace is not None:
            self.trace[self.t] = ell
        if self.decisions is not None:
            self.decisions[self.t] = x
        self.t += 1


# ---------------------------------------------------------------------------
# fixed-price segment execution (post-replenishment feasibility)
# ---------------------------------------------------------------------------

def _priced_segment(p, r, A, b, ell, rec: _Recorder | None = None):
    """Run ``x = I(r > <a,p>) * I(ell + b >= a)`` over a segment.

    Without a recorder, only the price-accepted periods are visited in
    Python; replenishment over rejected spans is added in bulk (sums of
    nonnegative vectors, so inventory stays nonnegative either way).
    Returns (reward, stockouts, ell).
    """
    if rec is not None and rec.active:
        reward, stock = 0.0, 0
        for t in range(len(r)):
            a = A[t]
            lb = ell + b[t]
            x = 0
            if r[t] > a @ p:
                if np.all(lb >= a):
                    x = 1
                    reward += float(r[t])
                else:
                    stock += 1
            rec.step(ell, x)
            ell = lb - a if x else lb
        return reward, stock, ell
    accept = r > A @ p
    idx = np.nonzero(accept)[0]
    if len(idx) == 0:
        return 0.0, 0, ell + b.sum(axis=0)
    csum = np.cumsum(b, axis=0)
    reward, stock = 0.0, 0
    last = -1
    for k in idx:
        if k > last + 1:
            ell = ell + (csum[k - 1] - (csum[last] if last >= 0 else 0.0))
        lb = ell + b[k]
        a = A[k]
        if np.all(lb >= a):
            ell = lb - a
            reward += r[k]
        else:
            ell = lb
            stock += 1
        last = k
    if last < len(r) - 1:
        ell = ell + (csum[-1] - csum[last])
    return reward, stock, ell


def run_dual_price_framework(price_provider, stream: Stream, init_inventory=None,
                             record_trace: bool = False,
                             record_decisions: bool = False) -> TrialResult:
    """Reference sequential loop: per-period prices, post-replenishment check.

    ``price_provider(t, past)`` receives the 0-based period index and the
    stream of samples strictly before t, and returns the price vector used
    at t.  Useful directly for tests and as the semantic baseline the batch
    runners must agree with.
    """
    T = len(stream)
    m = stream.requirements.shape[1]
    ell = np.zeros(m) if init_inventory is None else np.asarray(init_inventory, float).copy()
    if np.any(ell < 0):
        raise ValueError("initial inventory must be nonnegative")
    rec = _Recorder(T, m, record_trace, record_decisions)
    reward, stock = 0.0, 0
    for t in range(T):
        p = price_provider(t, stream.slice(0, t))
        a = stream.requirements[t]
        lb = ell + stream.replenishments[t]
        x = 0
        if stream.rewards[t] > a @ p:
            if np.all(lb >= a):
                x = 1
                reward += float(stream.rewards[t])
            else:
                stock += 1
        if rec.active:
            rec.step(ell, x)
        ell = lb - a if x else lb
    return TrialResult(reward, stock, T, ell, rec.trace, rec.decisions)


# ---------------------------------------------------------------------------
# fixed-step dual descent (pre-replenishment feasibility)
# ---------------------------------------------------------------------------

def run_bounded(model: InputModel, T: int, cfg: PolicyConfig, seed,
                stream: Stream | None = None) -> TrialResult:
    """Warm-up then per-period dual descent with step 1/sqrt(9 T ln T).

    The dual update always uses the price indicator (not the realized
    decision); the decision additionally requires ell >= a before the
    period's replenishment arrives.
    """
    params = alg1_params(model.bounds, model.m, T, cfg.overrides)
    kappa, eta = params["kappa"], params["step"]
    s = stream if stream is not None else materialize(model, seed, T)
    m = model.m
    notes = []
    if kappa >= T:
        warnings.warn(f"warm-up {kappa} >= horizon {T}; policy rejects everything",
                      WarmupExceedsHorizon)
        notes.append(f"warmup {kappa} >= T {T}")
    rec = _Recorder(T, m, cfg.record_trace, cfg.record_decisions)
    warm = min(kappa, T)
    ell = np.zeros(m)
    reward, stock = 0.0, 0
    if rec.active:
        for t in range(warm):
            rec.step(ell, 0)
            ell = ell + s.replenishments[t]
        p_v = np.zeros(m)
        for t in range(warm, T):
            a = s.requirements[t]
            bt = s.replenishments[t]
            price_ok = s.rewards[t] > a @ p_v
            x = 0
            if price_ok:
                if np.all(ell >= a):
                    x = 1
                    reward += float(s.rewards[t])
                else:
                    stock += 1
            rec.step(ell, x)
            ell = (ell - a) + bt if x else ell + bt
            p_v = np.maximum(p_v - eta * (bt - a * (1.0 if price_ok else 0.0)), 0.0)
        return TrialResult(reward, stock, T, ell, rec.trace, rec.decisions, notes)
    if warm:
        ell = s.replenishments[:warm].sum(axis=0)
    # plain-float inner loop: several times faster than ndarray ops at small m
    p = [0.0] * m
    el = [float(v) for v in ell]
    rl = s.rewards.tolist()
    Al = s.requirements.tolist()
    bl = s.replenishments.tolist()
    rng_m = range(m)
    for t in range(warm, T):
        a = Al[t]
        bt = bl[t]
        if rl[t] > sum(p[j] * a[j] for j in rng_m):
            feasible = True
            for j in rng_m:
                if el[j] < a[j]:
                    feasible = False
                    stock += 1
                    break
            if feasible:
                reward += rl[t]
                for j in rng_m:
                    el[j] = (el[j] - a[j]) + bt[j]
            else:
                for j in rng_m:
                    el[j] += bt[j]
            for j in rng_m:
                pj = p[j] - eta * (bt[j] - a[j])
                p[j] = pj if pj > 0.0 else 0.0
        else:
            for j in rng_m:
                el[j] += bt[j]
                pj = p[j] - eta * bt[j]
                p[j] = pj if pj > 0.0 else 0.0
    return TrialResult(float(reward), stock, T, np.array(el), None, None, notes)


# ---------------------------------------------------------------------------
# batch induced-LP policy for finite-support models
# ---------------------------------------------------------------------------

def run_finite_support(model: InputModel, T: int, cfg: PolicyConfig, seed,
                       stream: Stream | None = None) -> TrialResult:
    """Resolve the induced LP on raw per-batch sums; accept always-accept
    types when feasible, others against a fractional acceptance budget."""
    spec = model.support
    if spec is None:
        raise ValueError("policy requires a finite-support model")
    params = alg2_params(model, T, cfg.overrides)
    kappa, W = params["kappa"], params["W"]
    s = stream if stream is not None else materialize(model, seed, T)
    m, n = model.m, spec.n
    notes = []
    if W * kappa >= T:
        warnings.warn(f"warm-up {W * kappa} >= horizon {T}; policy rejects everything",
                      WarmupExceedsHorizon)
        notes.append(f"warmup {W * kappa} >= T {T}")
    rec = _Recorder(T, m, cfg.record_trace, cfg.record_decisions)
    Phi = np.zeros(n)
    always = np.zeros(n, dtype=bool)
    ell = np.zeros(m)
    reward, stock = 0.0, 0
    Areq = spec.requirements  # (n, m)
    theta = s.types
    b = s.replenishments
    warm_end = W * kappa
    for t in range(T):
        tt = t + 1
        x = 0
        if tt > warm_end:
            i = int(theta[t])
            a = Areq[i]
            price_ok = always[i] or Phi[i] >= 1.0
            if price_ok:
                if np.all(ell >= a):
                    x = 1
                    reward += float(s.rewards[t])
                    if not always[i]:
                        Phi[i] -= 1.0
                else:
                    stock += 1
        if rec.active:
            rec.step(ell, x)
        if tt >= warm_end and tt % kappa == 0 and tt < T:
            lo = tt - kappa
            B_hat = b[lo:tt].sum(axis=0)
            mu_hat = np.bincount(theta[lo:tt], minlength=n).astype(float)
            inst = InducedLpInstance(spec.rewards, Areq.T, B_hat, mu_hat)
            sol = solve_induced(inst)
            if sol.degenerate:
                warnings.warn(f"batch LP at t={tt} degenerate", DegenerateBatchLp)
                notes.append(f"degenerate batch LP at t={tt}")
            Phi += sol.X
            always = sol.V <= FEAS_TOL
        if x:
            ell = (ell - Areq[int(theta[t])]) + b[t]
        else:
            ell = ell + b[t]
    return TrialResult(reward, stock, T, ell, rec.trace, rec.decisions, notes)


# ---------------------------------------------------------------------------
# accumulate / detect / convert components and their composition
# ---------------------------------------------------------------------------

def _effective_nondeg(model: InputModel, cfg: PolicyConfig) -> dict:
    if model.nondeg is None:
        raise ValueError("policy requires non-degeneracy constants on the model")
    cs = nondeg_constants(model.bounds, model.nondeg, model.m, cfg.eps_covering)
    ov = cfg.overrides
    return {**cs, "C0_eff": cs["C0"] * ov.c0, "C1_eff": cs["C1"] * ov.c1,
            "C2_eff": cs["C2"] * ov.c2, "C3_eff": cs["C3"] * ov.c3,
            "C4_eff": cs["C4"] * ov.c4}


def _solve_price(budget, rewards, requirements, model, cfg) -> np.ndarray:
    floor = cfg.budget_floor_frac * model.bounds.b_lower
    budget = np.maximum(np.asarray(budget, float), floor)
    obj = DualObjective(budget, rewards, requirements)
    p = minimize_f(obj, cfg.solver).p
    return project_omega_p(p, model.bounds)


def run_accumulation(model: InputModel, H: int, cfg: PolicyConfig, seed,
                     stream: Stream | None = None) -> TrialResult:
    """Bank inventory: reject-all warm-up, then doubling batches priced at
    the empirical dual minimizer with a downward-biased budget."""
    cs = _effective_nondeg(model, cfg)
    s = stream if stream is not None else materialize(model, seed, H)
    m = model.m
    lnH = math.log(max(H, 2))
    kappa = min(accumulation_warmup(cs["C0_eff"], H), H)
    notes = []
    if kappa >= H:
        warnings.warn(f"warm-up {kappa} >= horizon {H}", WarmupExceedsHorizon)
        notes.append(f"warmup {kappa} >= H {H}")
    N_V, V = accumulation_schedule(kappa, max(cs["C1_eff"] * lnH, 1.0), H)
    if N_V < 1 and kappa < H:
        warnings.warn(f"no doubling batch fits in ({kappa}, {H}]; using one batch",
                      ScheduleDegenerate)
        notes.append("single accumulation batch")
    rec = _Recorder(H, m, cfg.record_trace, cfg.record_decisions)
    ell = np.zeros(m)
    if rec.active:
        for t in range(kappa):
            rec.step(ell, 0)
            ell = ell + s.replenishments[t]
    elif kappa:
        ell = s.replenishments[:kappa].sum(axis=0)
    reward, stock = 0.0, 0
    for w in range(len(V) - 1):
        lo, hi = int(V[w]) - 1, int(V[w + 1]) - 1
        lo, hi = min(lo, H), min(hi, H)
        if lo >= hi:
            continue
        if lo == 0:
            p = np.zeros(m)
        else:
            bias = cs["C2_eff"] * math.sqrt(lnH / (hi - lo))
            budget = s.replenishments[:lo].mean(axis=0) - bias
            sub = Stream(s.rewards[:lo], s.requirements[:lo], s.replenishments[:lo])
            cap = cfg.solver.sample_cap
            obj_stream = _subsample_stream(sub, cap)
            p = _solve_price(budget, obj_stream.rewards, obj_stream.requirements,
                             model, cfg)
        rw, st, ell = _priced_segment(p, s.rewards[lo:hi], s.requirements[lo:hi],
                                      s.replenishments[lo:hi], ell, rec)
        reward += rw
        stock += st
    return TrialResult(reward, stock, H, ell, rec.trace, rec.decisions, notes)


def _subsample_stream(s: Stream, cap: int) -> Stream:
    n = len(s)
    if cap <= 0 or n <= cap:
        return s
    idx = np.linspace(0, n - 1, cap).astype(int)
    return Stream(s.rewards[idx], s.requirements[idx], s.replenishments[idx])


@dataclass
class DetectionEstimates:
    """Split-half estimates: binding-resource mask, mean replenishment, the
    first-half price, and the full sample set backing the empirical dual."""

    binding: np.ndarray       # (m,) bool
    B_hat: np.ndarray         # (m,)
    p_star_hat: np.ndarray    # (m,)
    ell_hat: np.ndarray       # (m,) second-half leftover estimate
    samples: Stream           # all H observations


def run_detection(model: InputModel, history: Stream, cfg: PolicyConfig) -> DetectionEstimates:
    """Identify binding resources and estimate the dual objective.

    The first half fits a price; the second half measures leftover inventory
    under that price, which keeps the two estimates independent.
    """
    H = len(history)
    if H < 2:
        raise ValueError("detection needs at least 2 observations")
    cs = _effective_nondeg(model, cfg)
    half = H // 2
    sub = _subsample_stream(history.slice(0, half), cfg.solver.sample_cap)
    obj = DualObjective(history.replenishments[:half].mean(axis=0),
                        sub.rewards, sub.requirements)
    p_hat = minimize_f(obj, cfg.solver).p
    r2 = history.rewards[half:]
    A2 = history.requirements[half:]
    b2 = history.replenishments[half:]
    accept = r2 > A2 @ p_hat
    ell_hat = b2.sum(axis=0) - accept @ A2
    thresh = cs["C3_eff"] * math.sqrt(H * math.log(max(H, 2)))
    binding = ell_hat <= thresh
    B_hat = history.replenishments.mean(axis=0)
    return DetectionEstimates(binding, B_hat, p_hat, ell_hat, history)


def run_conversion(model: InputModel, H: int, init_inventory, est: DetectionEstimates,
                   cfg: PolicyConfig, seed, stream: Stream | None = None,
                   n_periods: int | None = None) -> TrialResult:
    """Spend banked inventory over shrinking batches: binding resources get
    a surplus-inflated budget so the empirical dual prices them to sell."""
    cs = _effective_nondeg(model, cfg)
    if n_periods is None:
        n_periods = H
    s = stream if stream is not None else materialize(model, seed, n_periods)
    if len(s) < n_periods:
        raise ValueError("stream shorter than requested conversion length")
    m = model.m
    ell = np.asarray(init_inventory, float).copy()
    if np.any(ell < 0):
        raise ValueError("initial inventory must be nonnegative")
    lnH = math.log(max(H, 2))
    N_U, U = conversion_schedule(H)
    rec = _Recorder(n_periods, m, cfg.record_trace, cfg.record_decisions)
    f_samples = _subsample_stream(est.samples, cfg.solver.sample_cap)
    reward, stock = 0.0, 0
    for k in range(len(U) - 1):
        lo, hi = int(U[k]) - 1, int(U[k + 1]) - 1
        span = hi - lo   # schedule span, used in the surplus normalization
        lo, hi = min(lo, n_periods), min(hi, n_periods)
        if lo >= hi:
            continue
        target = cs["C4_eff"] * math.sqrt(3.0 ** (N_U - k) * lnH)
        budget = est.B_hat + np.where(est.binding, (ell - target) / span, 0.0)
        p = _solve_price(budget, f_samples.rewards, f_samples.requirements, model, cfg)
        rw, st, ell = _priced_segment(p, s.rewards[lo:hi], s.requirements[lo:hi],
                                      s.replenishments[lo:hi], ell, rec)
        reward += rw
        stock += st
    return TrialResult(reward, stock, n_periods, ell, rec.trace, rec.decisions)


def run_main_nondegenerate(model: InputModel, T: int, cfg: PolicyConfig, seed,
                           stream: Stream | None = None) -> TrialResult:
    """Accumulate over the first half, detect on those samples, convert over
    the second half with the carried-over inventory."""
    s = stream if stream is not None else materialize(model, seed, T)
    H = (T + 1) // 2
    first = s.slice(0, H)
    acc = run_accumulation(model, H, cfg, seed, stream=first)
    est = run_detection(model, first, cfg)
    conv = run_conversion(model, H, acc.final_inventory, est, cfg, seed,
                          stream=s.slice(H, T), n_periods=T - H)
    trace = None
    if acc.trace is not None and conv.trace is not None:
        trace = np.vstack([acc.trace, conv.trace])
    decisions = None
    if acc.decisions is not None and conv.decisions is not None:
        decisions = np.concatenate([acc.decisions, conv.decisions])
    return TrialResult(acc.reward + conv.reward, acc.stockouts + conv.stockouts,
                       T, conv.final_inventory, trace, decisions,
                       acc.notes + conv.notes)


# ---------------------------------------------------------------------------
# adapted classical-OLP baseline
# ---------------------------------------------------------------------------

def run_baseline_olp(model: InputModel, T: int, cfg: PolicyConfig, seed,
                     stream: Stream | None = None) -> TrialResult:
    """Resolving baseline: treat current inventory plus expected future
    replenishment as the remaining budget and reprice at geometric times.

    The mean replenishment is handed to the baseline as side information.
    """
    s = stream if stream is not None else materialize(model, seed, T)
    m = model.m
    Eb = model.replenishment_mean()
    if cfg.baseline_resolve == "geometric":
        points = [1]
        k = 1
        while k < T:
            if k > points[-1]:
                points.append(k)
            k *= 2
        points.append(T + 1)
    else:
        points = list(range(1, T + 2))
    rec = _Recorder(T, m, cfg.record_trace, cfg.record_decisions)
    ell = np.zeros(m)
    reward, stock = 0.0, 0
    for k in range(len(points) - 1):
        t0, t1 = points[k], points[k + 1]     # 1-indexed, [t0, t1)
        if t0 > T:
            break
        t1 = min(t1, T + 1)
        remain = T - t0 + 1
        if t0 == 1:
            p = np.zeros(m)
        else:
            budget = (ell + remain * Eb) / remain
            sub = _subsample_stream(s.slice(0, t0 - 1), cfg.solver.sample_cap)
            obj = DualObjective(np.maximum(budget, 1e-12), sub.rewards, sub.requirements)
            p = minimize_f(obj, cfg.solver).p
        lo, hi = t0 - 1, t1 - 1
        rw, st, ell = _priced_segment(p, s.rewards[lo:hi], s.requirements[lo:hi],
                                      s.replenishments[lo:hi], ell, rec)
        reward += rw
        stock += st
    return TrialResult(reward, stock, T, ell, rec.trace, rec.decisions)


def run_policy(model: InputModel, T: int, cfg: PolicyConfig, seed,
               stream: Stream | None = None) -> TrialResult:
    """Dispatch on cfg.algorithm."""
    fn = {"bounded": run_bounded, "finite_support": run_finite_support,
          "nondegenerate": run_main_nondegenerate,
          "baseline_olp": run_baseline_olp}[cfg.algorithm]
    return fn(model, T, cfg, seed, stream=stream)
