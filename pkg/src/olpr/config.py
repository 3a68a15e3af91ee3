"""INI config loading for models, solver options, and experiment grids.

Schema (all sections optional unless a consumer needs them):

  [model]      kind (random_input_i | random_input_ii | finite_support |
               finite_hard), m, truncate
  [support]    rewards, requirements (rows split by ';'), probs,
               repl_kind (constant | uniform), repl_value, repl_low,
               repl_high, mu_lower, stability_radius      (finite_support)
  [bounds]     r_bar, a_bar, b_bar, b_lower               (override defaults)
  [nondeg]     lambda_min, lam, mu, delta_b
  [experiment] algorithms, horizons, trials, master_seed, experiment_id,
               out_dir
  [solver]     max_iters, tol, step_scale, refine_rounds, refine_iters,
               sample_cap, grid_resolution
  [overrides]  alg1_kappa, alg2_kappa, alg2_warmup, c0, c1, c2, c3, c4
  [policy]     record_trace, baseline_resolve, eps_covering,
               budget_floor_frac

Lists use commas; matrix rows use semicolons with space-separated entries.
"""

from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from .constants import Overrides
from .dual import SolverOpts
from .model import (KIND_FINITE_HARD, KIND_FINITE_SUPPORT, KIND_RANDOM_I,
                    KIND_RANDOM_II, BoundsParams, InputModel,
                    NonDegeneracyParams, ReplenishmentSpec,
                    build_hard_instance, make_finite_support,
                    make_random_input_i, make_random_input_ii)
from .policies import ALGORITHMS, PolicyConfig


class ConfigError(Exception):
    """Malformed or missing configuration."""


def load_config(path) -> configparser.ConfigParser:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    return cp


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _matrix(text: str) -> np.ndarray:
    rows = [r.strip() for r in text.split(";") if r.strip()]
    return np.array([_floats(r) for r in rows])


def _get(cp, section, key, cast, default=None):
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"missing [{section}] {key}")
    raw = cp.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def build_model(cp: configparser.ConfigParser) -> InputModel:
    kind = _get(cp, "model", "kind", str).strip().lower()
    nondeg = build_nondeg(cp)
    if kind == KIND_RANDOM_I:
        model = make_random_input_i(_get(cp, "model", "m", int, 5), nondeg=nondeg)
    elif kind == KIND_RANDOM_II:
        model = make_random_input_ii(_get(cp, "model", "m", int, 5),
                                     truncate=_get(cp, "model", "truncate", bool, False),
                                     nondeg=nondeg)
    elif kind == KIND_FINITE_HARD:
        model = build_hard_instance()
    elif kind == KIND_FINITE_SUPPORT:
        model = _finite_support_model(cp)
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    if cp.has_section("bounds"):
        try:
            bounds = BoundsParams(
                r_bar=_get(cp, "bounds", "r_bar", float, model.bounds.r_bar),
                a_bar=_get(cp, "bounds", "a_bar", float, model.bounds.a_bar),
                b_bar=_get(cp, "bounds", "b_bar", float, model.bounds.b_bar),
                b_lower=_get(cp, "bounds", "b_lower", float, model.bounds.b_lower))
        except ValueError as exc:
            raise ConfigError(f"bad [bounds]: {exc}") from exc
        model = InputModel(model.kind, model.m, bounds, support=model.support,
                           nondeg=model.nondeg, truncate=model.truncate)
    return model


def _finite_support_model(cp) -> InputModel:
    if not cp.has_section("support"):
        raise ConfigError("finite_support model needs a [support] section")
    rewards = np.array(_floats(_get(cp, "support", "rewards", str)))
    requirements = _matrix(_get(cp, "support", "requirements", str))
    probs = np.array(_floats(_get(cp, "support", "probs", str)))
    repl_kind = _get(cp, "support", "repl_kind", str, "uniform").strip().lower()
    if repl_kind == "constant":
        repl = ReplenishmentSpec("constant",
                                 value=np.array(_floats(_get(cp, "support", "repl_value", str))))
    elif repl_kind == "uniform":
        repl = ReplenishmentSpec("uniform",
                                 low=_get(cp, "support", "repl_low", float, 0.0),
                                 high=_get(cp, "support", "repl_high", float, 0.5))
    else:
        raise ConfigError(f"unknown repl_kind {repl_kind!r}")
    try:
        model = make_finite_support(
            rewards, requirements, probs, repl,
            mu_lower=_get(cp, "support", "mu_lower", float, float(probs.min())),
            stability_radius=_get(cp, "support", "stability_radius", float, 0.05))
    except ValueError as exc:
        raise ConfigError(f"bad [support]: {exc}") from exc
    nd = build_nondeg(cp)
    if nd is not None:
        model = InputModel(model.kind, model.m, model.bounds,
                           support=model.support, nondeg=nd)
    return model


def build_nondeg(cp) -> NonDegeneracyParams | None:
    if not cp.has_section("nondeg"):
        return None
    try:
        return NonDegeneracyParams(
            lambda_min=_get(cp, "nondeg", "lambda_min", float),
            lam=_get(cp, "nondeg", "lam", float),
            mu=_get(cp, "nondeg", "mu", float),
            delta_b=_get(cp, "nondeg", "delta_b", float))
    except ValueError as exc:
        raise ConfigError(f"bad [nondeg]: {exc}") from exc


def build_solver(cp) -> SolverOpts:
    base = SolverOpts()
    if not cp.has_section("solver"):
        return base
    return SolverOpts(
        max_iters=_get(cp, "solver", "max_iters", int, base.max_iters),
        tol=_get(cp, "solver", "tol", float, base.tol),
        step_scale=_get(cp, "solver", "step_scale", float, base.step_scale),
        refine_rounds=_get(cp, "solver", "refine_rounds", int, base.refine_rounds),
        refine_iters=_get(cp, "solver", "refine_iters", int, base.refine_iters),
        sample_cap=_get(cp, "solver", "sample_cap", int, base.sample_cap),
        grid_resolution=_get(cp, "solver", "grid_resolution", int, base.grid_resolution))


def build_overrides(cp) -> Overrides:
    if not cp.has_section("overrides"):
        return Overrides()
    kwargs = {}
    for key in ("alg1_kappa", "alg2_kappa", "alg2_warmup",
                "c0", "c1", "c2", "c3", "c4"):
        if cp.has_option("overrides", key):
            kwargs[key] = _get(cp, "overrides", key, float)
    try:
        return Overrides(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"bad [overrides]: {exc}") from exc


def build_policy_config(cp, algorithm: str) -> PolicyConfig:
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; "
                          f"choose from {', '.join(ALGORITHMS)}")
    kwargs = dict(algorithm=algorithm, overrides=build_overrides(cp),
                  solver=build_solver(cp))
    if cp.has_section("policy"):
        kwargs["record_trace"] = _get(cp, "policy", "record_trace", bool, False)
        kwargs["baseline_resolve"] = _get(cp, "policy", "baseline_resolve",
                                          str, "geometric").strip()
        kwargs["eps_covering"] = _get(cp, "policy", "eps_covering", float, 1e-4)
        kwargs["budget_floor_frac"] = _get(cp, "policy", "budget_floor_frac",
                                           float, 0.05)
    try:
        return PolicyConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def experiment_fields(cp) -> dict:
    """The [experiment] section with parsed types; CLI flags override these."""
    if not cp.has_section("experiment"):
        raise ConfigError("config has no [experiment] section")
    algorithms = [a.strip() for a in
                  _get(cp, "experiment", "algorithms", str).split(",") if a.strip()]
    horizons = [int(h) for h in _floats(_get(cp, "experiment", "horizons", str))]
    return {
        "algorithms": algorithms,
        "horizons": horizons,
        "trials": _get(cp, "experiment", "trials", int, 100),
        "master_seed": _get(cp, "experiment", "master_seed", int, 0),
        "experiment_id": _get(cp, "experiment", "experiment_id", str, "exp").strip(),
        "out_dir": _get(cp, "experiment", "out_dir", str, "out").strip(),
    }


def model_name(cp) -> str:
    return _get(cp, "model", "kind", str).strip().lower()
