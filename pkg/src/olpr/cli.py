"""Command-line entry point.

Verbs: run (experiment grid), validate (probe a model against its declared
bounds), constants (print the parameter ledger), solve-induced, solve-dual,
trace (inventory trajectory CSV).  Exit codes: 0 success, 1 runtime failure,
2 usage error, 3 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .constants import ledger_lines
from .dual import DualObjective, minimize_f
from .harness import ExperimentSpec, inventory_trace, run_experiment, write_trace_csv
from .lp import induced_from_model, solve_induced
from .model import (BoundsParams, build_hard_instance, validate_model)
from .policies import ALGORITHMS


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="olpr",
                                 description="Online LP with stochastic "
                                             "replenishment: policies and benchmarks")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run an experiment grid and write CSVs")
    run.add_argument("--config", required=True, help="experiment INI file")
    run.add_argument("--out", help="output directory (overrides config)")
    run.add_argument("--trials", type=int, help="trials per cell (overrides config)")
    run.add_argument("--horizons", help="comma-separated T values (overrides config)")
    run.add_argument("--seed", type=int, help="master seed (overrides config)")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads for trial execution")
    run.add_argument("--json", action="store_true", help="machine-readable summary")
    run.add_argument("--verbose", action="store_true")

    val = sub.add_parser("validate", help="probe a model against declared bounds")
    val.add_argument("--config", required=True)
    val.add_argument("--probes", type=int, default=10_000)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--json", action="store_true")

    con = sub.add_parser("constants", help="print the parameter ledger")
    con.add_argument("--config", help="model INI file")
    con.add_argument("--m", type=int, help="resource count (flag mode)")
    con.add_argument("--r-bar", type=float)
    con.add_argument("--a-bar", type=float)
    con.add_argument("--b-bar", type=float)
    con.add_argument("--b-lower", type=float)
    con.add_argument("--T", type=int, default=1000)
    con.add_argument("--json", action="store_true")

    ind = sub.add_parser("solve-induced", help="solve a fluid LP")
    ind.add_argument("--config", help="finite-support model INI")
    ind.add_argument("--hard", action="store_true",
                     help="use the built-in 2x6 degenerate instance")
    ind.add_argument("--budget", help="comma-separated budget override")
    ind.add_argument("--json", action="store_true")

    dua = sub.add_parser("solve-dual", help="minimize the dual objective")
    dua.add_argument("--config", help="model INI")
    dua.add_argument("--hard", action="store_true")
    dua.add_argument("--budget", help="comma-separated budget override")
    dua.add_argument("--n-samples", type=int, default=100_000)
    dua.add_argument("--seed", type=int, default=20_240_001)
    dua.add_argument("--json", action="store_true")

    trc = sub.add_parser("trace", help="emit a single-trial inventory CSV")
    trc.add_argument("--config", required=True)
    trc.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    trc.add_argument("--T", type=int, required=True)
    trc.add_argument("--trial", type=int, default=0)
    trc.add_argument("--resource", type=int, default=0)
    trc.add_argument("--downsample", type=int, default=500)
    trc.add_argument("--seed", type=int)
    trc.add_argument("--out", required=True, help="output CSV path")
    return ap


def _emit(args, payload: dict, text_lines: list[str]):
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _cmd_run(args) -> int:
    cp = cfgmod.load_config(args.config)
    model = cfgmod.build_model(cp)
    fields = cfgmod.experiment_fields(cp)
    if args.trials is not None:
        fields["trials"] = args.trials
    if args.horizons:
        fields["horizons"] = sorted(int(h) for h in args.horizons.split(","))
    if args.seed is not None:
        fields["master_seed"] = args.seed
    if args.out:
        fields["out_dir"] = args.out
    algorithms = [(name, cfgmod.build_policy_config(cp, name))
                  for name in fields.pop("algorithms")]
    spec = ExperimentSpec(model=model, model_name=cfgmod.model_name(cp),
                          algorithms=algorithms, threads=args.threads,
                          verbose=args.verbose, **fields)
    report = run_experiment(spec)
    lines, cells = [], []
    for c in report.cells:
        lines.append(f"{c.algorithm} T={c.T}: regret {c.mean_regret:.6g} "
                     f"+- {c.std_err:.3g}, stockouts {c.mean_stockouts:.6g}, "
                     f"trials {c.trials_ok}")
        cells.append({"algorithm": c.algorithm, "T": c.T,
                      "mean_regret": c.mean_regret, "std_err": c.std_err,
                      "mean_reward": c.mean_reward,
                      "mean_hindsight": c.mean_hindsight,
                      "mean_stockouts": c.mean_stockouts,
                      "trials_ok": c.trials_ok})
    lines.append(f"raw: {report.raw_path}")
    lines.append(f"aggregate: {report.agg_path}")
    for name, T, trial, msg in report.failures:
        lines.append(f"FAILED {name} T={T} trial {trial}: {msg}")
    _emit(args, {"cells": cells, "raw": str(report.raw_path),
                 "aggregate": str(report.agg_path),
                 "failures": len(report.failures)}, lines)
    return 1 if report.any_cell_all_failed else 0


def _cmd_validate(args) -> int:
    cp = cfgmod.load_config(args.config)
    model = cfgmod.build_model(cp)
    rep = validate_model(model, args.probes, seed=args.seed)
    lines = [f"probes: {rep.n_probe}",
             f"empirical mean replenishment: {np.array2string(rep.empirical_repl_mean, precision=6)}"]
    if rep.empirical_type_freq is not None:
        lines.append(f"empirical type frequencies: "
                     f"{np.array2string(rep.empirical_type_freq, precision=6)}")
    lines += [f"violation: {v}" for v in rep.violations]
    lines.append("ok" if rep.ok else f"{len(rep.violations)} violation(s)")
    _emit(args, {"ok": rep.ok, "violations": rep.violations,
                 "probes": rep.n_probe}, lines)
    return 0


def _cmd_constants(args) -> int:
    if args.config:
        cp = cfgmod.load_config(args.config)
        model = cfgmod.build_model(cp)
        overrides = cfgmod.build_overrides(cp)
    else:
        missing = [n for n, v in (("--m", args.m), ("--r-bar", args.r_bar),
                                  ("--a-bar", args.a_bar), ("--b-bar", args.b_bar),
                                  ("--b-lower", args.b_lower)) if v is None]
        if missing:
            raise ConfigError("constants needs --config or all of "
                              + ", ".join(("--m", "--r-bar", "--a-bar",
                                           "--b-bar", "--b-lower"))
                              + f" (missing {', '.join(missing)})")
        from .model import KIND_RANDOM_I, InputModel
        bounds = BoundsParams(args.r_bar, args.a_bar, args.b_bar, args.b_lower)
        model = InputModel(KIND_RANDOM_I, args.m, bounds)
        overrides = None
    lines = ledger_lines(model, args.T, overrides)
    _emit(args, {"lines": lines}, lines)
    return 0


def _load_finite_model(args):
    if args.hard:
        return build_hard_instance()
    if not args.config:
        raise ConfigError("need --config or --hard")
    return cfgmod.build_model(cfgmod.load_config(args.config))


def _cmd_solve_induced(args) -> int:
    model = _load_finite_model(args)
    budget = None
    if args.budget:
        budget = np.array([float(x) for x in args.budget.split(",")])
    inst = induced_from_model(model, budget)
    sol = solve_induced(inst)
    lines = [f"objective={sol.objective:.9f} degenerate={str(sol.degenerate).lower()} "
             f"unique={str(sol.unique).lower()}",
             f"X={np.array2string(sol.X, precision=9)}",
             f"V={np.array2string(sol.V, precision=9)}",
             f"S={np.array2string(sol.S, precision=9)}"]
    _emit(args, {"objective": sol.objective, "degenerate": sol.degenerate,
                 "unique": sol.unique, "X": sol.X.tolist(), "V": sol.V.tolist(),
                 "S": sol.S.tolist()}, lines)
    return 0


def _cmd_solve_dual(args) -> int:
    if args.hard:
        model = build_hard_instance()
        cp = None
    else:
        if not args.config:
            raise ConfigError("need --config or --hard")
        cp = cfgmod.load_config(args.config)
        model = cfgmod.build_model(cp)
    budget = None
    if args.budget:
        budget = np.array([float(x) for x in args.budget.split(",")])
    obj = DualObjective.from_model(model, budget=budget,
                                   n_samples=args.n_samples, seed=args.seed)
    opts = cfgmod.build_solver(cp) if cp is not None else None
    sol = minimize_f(obj, opts)
    lines = [f"f={sol.value:.9f}",
             f"p={np.array2string(sol.p, precision=9)}",
             f"iterations={sol.iterations} converged={str(sol.converged).lower()}"]
    _emit(args, {"f": sol.value, "p": sol.p.tolist(),
                 "iterations": sol.iterations, "converged": sol.converged}, lines)
    return 0


def _cmd_trace(args) -> int:
    cp = cfgmod.load_config(args.config)
    model = cfgmod.build_model(cp)
    fields = cfgmod.experiment_fields(cp) if cp.has_section("experiment") else \
        {"master_seed": 0, "experiment_id": "trace"}
    seed = args.seed if args.seed is not None else fields["master_seed"]
    pc = cfgmod.build_policy_config(cp, args.algorithm)
    periods, levels = inventory_trace(model, args.T, pc, seed,
                                      trial=args.trial, resource=args.resource,
                                      downsample=args.downsample)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out, fields["experiment_id"], args.algorithm,
                    cfgmod.model_name(cp), args.T, args.trial, args.resource,
                    periods, levels)
    print(f"trace written: {out} ({len(periods)} points)")
    return 0


_COMMANDS = {"run": _cmd_run, "validate": _cmd_validate,
             "constants": _cmd_constants, "solve-induced": _cmd_solve_induced,
             "solve-dual": _cmd_solve_dual, "trace": _cmd_trace}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
