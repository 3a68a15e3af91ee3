"""Problem data: order/replenishment distributions and seeded sampling.

A model describes the joint distribution of one period's tuple
(reward r, requirement vector a, replenishment vector b).  Negative entries
of `a` denote restocks.  All sampling is driven by numpy Generators seeded
from SeedSequences so that trial streams are reproducible and independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KIND_RANDOM_I = "random_input_i"
KIND_RANDOM_II = "random_input_ii"
KIND_FINITE_SUPPORT = "finite_support"
KIND_FINITE_HARD = "finite_hard"


@dataclass(frozen=True)
class OrderSample:
    """One period's realized (reward, requirement, replenishment) tuple."""

    reward: float
    requirement: np.ndarray
    replenishment: np.ndarray
    type_index: int | None = None  # set for finite-support models


@dataclass(frozen=True)
class BoundsParams:
    """Declared boundedness constants: |r| < r_bar, ||a||_2 < a_bar,
    ||b||_inf < b_bar, E[b_j] > b_lower."""

    r_bar: float
    a_bar: float
    b_bar: float
    b_lower: float

    def __post_init__(self):
        for name in ("r_bar", "a_bar", "b_bar", "b_lower"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.b_lower >= self.b_bar:
            raise ValueError("b_lower must be < b_bar")


@dataclass(frozen=True)
class ReplenishmentSpec:
    """Distribution of the replenishment vector b.

    kind "constant": b == value surely.  kind "uniform": b_j ~ U[low, high]
    i.i.d. across coordinates.
    """

    kind: str
    value: np.ndarray | None = None
    low: float = 0.0
    high: float = 0.5

    def mean(self, m: int) -> np.ndarray:
        if self.kind == "constant":
            return np.asarray(self.value, dtype=float)
        return np.full(m, 0.5 * (self.low + self.high))

    def draw(self, rng: np.random.Generator, size: int, m: int) -> np.ndarray:
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.value, float), (size, m)).copy()
        return rng.uniform(self.low, self.high, size=(size, m))


@dataclass(frozen=True)
class FiniteSupportSpec:
    """Finite support: n order types (R_i, A_i) with probabilities mu_i,
    plus the replenishment law and the LP stability radius L."""

    rewards: np.ndarray            # (n,)
    requirements: np.ndarray       # (n, m)
    probs: np.ndarray              # (n,)
    repl: ReplenishmentSpec
    mu_lower: float
    stability_radius: float        # L: basis-preserving perturbation radius

    def __post_init__(self):
        probs = np.asarray(self.probs, float)
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("type probabilities must sum to 1")
        if self.mu_lower <= 0 or np.any(probs < self.mu_lower - 1e-12):
            raise ValueError("need mu_i >= mu_lower > 0 for all types")

    @property
    def n(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class NonDegeneracyParams:
    """Constants of the non-degeneracy condition: eigenvalue floor of
    E[a a^T], two-sided density constants, and the binding-set radius."""

    lambda_min: float
    lam: float
    mu: float
    delta_b: float

    def __post_init__(self):
        if min(self.lambda_min, self.lam, self.mu, self.delta_b) <= 0:
            raise ValueError("non-degeneracy constants must be positive")
        if self.lam > self.mu:
            raise ValueError("need lam <= mu")


@dataclass(frozen=True)
class InputModel:
    """A sampleable order/replenishment distribution with declared metadata.

    Immutable; safe to share across trials.  Each trial should own a private
    Generator seeded from its own SeedSequence.
    """

    kind: str
    m: int
    bounds: BoundsParams
    support: FiniteSupportSpec | None = None
    nondeg: NonDegeneracyParams | None = None
    truncate: bool = False  # clip random_input_ii draws at declared bounds

    def __post_init__(self):
        if self.kind in (KIND_FINITE_SUPPORT, KIND_FINITE_HARD) and self.support is None:
            raise ValueError(f"{self.kind} model requires a FiniteSupportSpec")

    @property
    def has_types(self) -> bool:
        return self.support is not None

    def replenishment_mean(self) -> np.ndarray:
        if self.support is not None:
            return self.support.repl.mean(self.m)
        return np.full(self.m, 0.25)  # U[0, 0.5] in both random input models


@dataclass
class Stream:
    """A realized sample path: rewards (T,), requirements (T, m),
    replenishments (T, m), and type indices for finite-support models."""

    rewards: np.ndarray
    requirements: np.ndarray
    replenishments: np.ndarray
    types: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.rewards)

    def slice(self, start: int, stop: int) -> "Stream":
        return Stream(
            self.rewards[start:stop],
            self.requirements[start:stop],
            self.replenishments[start:stop],
            None if self.types is None else self.types[start:stop],
        )


def make_random_input_i(m: int = 5, nondeg: NonDegeneracyParams | None = None) -> InputModel:
    """a_jt ~ U[0,1], r_t ~ U[0,10], b_jt ~ U[0,0.5], all i.i.d."""
    bounds = BoundsParams(r_bar=10.0, a_bar=float(np.sqrt(m)), b_bar=0.5, b_lower=0.2)
    return InputModel(KIND_RANDOM_I, m, bounds, nondeg=nondeg)


def make_random_input_ii(m: int = 5, truncate: bool = False,
                         nondeg: NonDegeneracyParams | None = None) -> InputModel:
    """a_jt ~ N(0.5, 1), r_t = eps_t + sum_j a_jt with eps_t ~ N(0, 5),
    b_jt ~ U[0, 0.5].

    Normal tails are unbounded, so the declared bounds are effective 6-sigma
    envelopes; validate_model reports any tail excursions.
    """
    a_bar = 6.5 * float(np.sqrt(m))             # per-coordinate 6-sigma is 6.5
    r_bar = 0.5 * m + 6.0 * float(np.sqrt(5.0 + m))
    bounds = BoundsParams(r_bar=r_bar, a_bar=a_bar, b_bar=0.5, b_lower=0.2)
    return InputModel(KIND_RANDOM_II, m, bounds, truncate=truncate, nondeg=nondeg)


def make_finite_support(rewards, requirements, probs, repl: ReplenishmentSpec,
                        mu_lower: float | None = None, stability_radius: float = 0.05,
                        bounds: BoundsParams | None = None,
                        kind: str = KIND_FINITE_SUPPORT) -> InputModel:
    rewards = np.asarray(rewards, float)
    requirements = np.atleast_2d(np.asarray(requirements, float))
    probs = np.asarray(probs, float)
    m = requirements.shape[1]
    if mu_lower is None:
        mu_lower = float(probs.min())
    spec = FiniteSupportSpec(rewards, requirements, probs, repl, mu_lower, stability_radius)
    if bounds is None:
        repl_mean = repl.mean(m)
        b_bar = 1.1 * float(np.max(repl.value)) if repl.kind == "constant" else repl.high
        bounds = BoundsParams(
            r_bar=float(np.max(np.abs(rewards))) + 1.0,
            a_bar=float(np.max(np.linalg.norm(requirements, axis=1))) + 1.0,
            b_bar=b_bar,
            b_lower=0.9 * float(repl_mean.min()),
        )
    return InputModel(kind, m, bounds, support=spec)


def build_hard_instance() -> InputModel:
    """The 2-resource, 6-type finite-support instance with degenerate
    induced LP and deterministic unit replenishment b == (1, 1)."""
    rewards = [5.0, 3.0, 3.0, 4.0, 4.0, 0.0]
    requirements = [
        [2.0, 2.0],
        [2.0, 0.0],
        [0.0, 2.0],
        [2.0, 0.0],
        [0.0, 2.0],
        [0.0, 0.0],
    ]
    probs = [0.25, 0.125, 0.125, 0.125, 0.125, 0.25]
    repl = ReplenishmentSpec("constant", value=np.array([1.0, 1.0]))
    return make_finite_support(rewards, requirements, probs, repl,
                               kind=KIND_FINITE_HARD)


def rng_for(seed) -> np.random.Generator:
    """Generator from an int seed or a SeedSequence (pass-through)."""
    return np.random.default_rng(seed)


def trial_seed(master_seed: int, *spawn_key: int) -> np.random.SeedSequence:
    """Splittable per-trial seed: streams depend only on (master, spawn_key)."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(spawn_key))


def _draw_with(model: InputModel, rng_a, rng_r, rng_b, size: int) -> Stream:
    """Draw `size` i.i.d. periods, one generator per variable.

    Separate generators make the path invariant to chunking: drawing k then
    size-k periods concatenates bitwise to drawing size periods, because each
    numpy sampler consumes its stream one value at a time.
    """
    m = model.m
    if model.kind == KIND_RANDOM_I:
        a = rng_a.uniform(0.0, 1.0, size=(size, m))
        r = rng_r.uniform(0.0, 10.0, size=size)
        b = rng_b.uniform(0.0, 0.5, size=(size, m))
        return Stream(r, a, b)
    if model.kind == KIND_RANDOM_II:
        a = rng_a.normal(0.5, 1.0, size=(size, m))
        eps = rng_r.normal(0.0, np.sqrt(5.0), size=size)
        b = rng_b.uniform(0.0, 0.5, size=(size, m))
        if model.truncate:
            cap = model.bounds.a_bar / np.sqrt(m)
            np.clip(a, -cap, cap, out=a)
        r = eps + a.sum(axis=1)
        if model.truncate:
            np.clip(r, -model.bounds.r_bar, model.bounds.r_bar, out=r)
        return Stream(r, a, b)
    spec = model.support
    edges = np.cumsum(spec.probs)
    theta = np.searchsorted(edges, rng_a.random(size), side="right")
    theta = np.minimum(theta, spec.n - 1)
    b = spec.repl.draw(rng_b, size, m)
    return Stream(spec.rewards[theta], spec.requirements[theta], b, theta)


def draw(model: InputModel, rng: np.random.Generator, size: int) -> Stream:
    """Draw `size` i.i.d. periods from a single generator."""
    return _draw_with(model, rng, rng, rng, size)


def _variable_rngs(seed):
    """Three child generators (requirements, rewards, replenishments)."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    kids = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key)).spawn(3)
    return [np.random.default_rng(k) for k in kids]


def sample(model: InputModel, rng: np.random.Generator) -> OrderSample:
    """Draw a single period."""
    s = draw(model, rng, 1)
    t = None if s.types is None else int(s.types[0])
    return OrderSample(float(s.rewards[0]), s.requirements[0], s.replenishments[0], t)


def materialize(model: InputModel, seed, T: int) -> Stream:
    """The full length-T sample path for one trial seed."""
    ra, rr, rb = _variable_rngs(seed)
    return _draw_with(model, ra, rr, rb, T)


def stream_chunks(model: InputModel, seed, T: int, chunk: int = 65536):
    """Chunked replay of the exact path of materialize(model, seed, T)."""
    ra, rr, rb = _variable_rngs(seed)
    done = 0
    while done < T:
        k = min(chunk, T - done)
        yield _draw_with(model, ra, rr, rb, k)
        done += k


@dataclass
class ValidationReport:
    """Empirical check of declared bounds; collects violations, never aborts."""

    n_probe: int
    violations: list = field(default_factory=list)
    empirical_repl_mean: np.ndarray | None = None
    empirical_type_freq: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_model(model: InputModel, n_probe: int, seed=0) -> ValidationReport:
    """Probe the model against its declared bounds (n_probe draws)."""
    if n_probe < 1:
        raise ValueError("n_probe must be >= 1")
    s = materialize(model, seed, n_probe)
    rep = ValidationReport(n_probe)
    bd = model.bounds
    k = int(np.sum(np.abs(s.rewards) >= bd.r_bar))
    if k:
        rep.violations.append(f"|r| >= r_bar={bd.r_bar} in {k}/{n_probe} draws")
    k = int(np.sum(np.linalg.norm(s.requirements, axis=1) >= bd.a_bar))
    if k:
        rep.violations.append(f"||a||_2 >= a_bar={bd.a_bar} in {k}/{n_probe} draws")
    k = int(np.sum(np.max(np.abs(s.replenishments), axis=1) > bd.b_bar))
    if k:
        rep.violations.append(f"||b||_inf > b_bar={bd.b_bar} in {k}/{n_probe} draws")
    if np.any(s.replenishments < 0):
        rep.violations.append("negative replenishment drawn")
    rep.empirical_repl_mean = s.replenishments.mean(axis=0)
    if np.any(rep.empirical_repl_mean <= bd.b_lower):
        rep.violations.append(
            f"empirical mean b {rep.empirical_repl_mean} not above b_lower={bd.b_lower}")
    if s.types is not None:
        rep.empirical_type_freq = np.bincount(s.types, minlength=model.support.n) / n_probe
    return rep
