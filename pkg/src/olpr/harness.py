"""Monte-Carlo experiment driver: policy-vs-hindsight regret on shared paths.

Each (horizon, trial) pair owns one seeded sample path.  Every algorithm in
the experiment runs on that same path, and the hindsight LP relaxation is
solved on it once, so regrets are paired differences.  Raw per-trial rows
and per-cell aggregates go to CSV with a fixed 9-significant-digit format;
identical specs reproduce byte-identical files.
"""

from __future__ import annotations

import math
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lp import hindsight_value_streaming, solve_hindsight_relaxation
from .model import InputModel, materialize, trial_seed
from .policies import PolicyConfig, TrialResult, run_policy

RAW_COLUMNS = ["experiment_id", "algorithm", "model", "T", "trial", "seed",
               "reward", "hindsight", "regret", "stockouts"]
AGG_COLUMNS = ["experiment_id", "algorithm", "model", "T", "trials",
               "mean_regret", "std_err", "mean_reward", "mean_hindsight",
               "mean_stockouts", "benchmark_kind"]
TRACE_COLUMNS = ["experiment_id", "algorithm", "model", "T", "trial",
                 "resource", "t", "inventory"]
BENCHMARK_KIND = "LP-relaxation upper bound"


class TraceDisabled(Exception):
    """Trial was run without trace recording."""


class DegenerateData(Exception):
    """Log-log fit impossible (nonpositive regrets or too few horizons)."""


@dataclass
class ExperimentSpec:
    model: InputModel
    model_name: str
    algorithms: list            # [(name, PolicyConfig), ...]
    horizons: list
    trials: int
    master_seed: int
    out_dir: str | Path
    experiment_id: str = "exp"
    hindsight_stream_threshold: int = 100_000
    threads: int = 1
    verbose: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if list(self.horizons) != sorted(self.horizons):
            raise ValueError("horizons must be sorted ascending")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        names = [n for n, _ in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError("algorithm names must be unique")


@dataclass
class CellStats:
    algorithm: str
    T: int
    trials_ok: int
    mean_regret: float
    std_err: float
    mean_reward: float
    mean_hindsight: float
    mean_stockouts: float


@dataclass
class RegretReport:
    experiment_id: str
    model_name: str
    cells: list = field(default_factory=list)   # CellStats
    failures: list = field(default_factory=list)  # (algorithm, T, trial, message)
    raw_path: Path | None = None
    agg_path: Path | None = None
    benchmark_kind: str = BENCHMARK_KIND

    def cell(self, algorithm: str, T: int) -> CellStats:
        for c in self.cells:
            if c.algorithm == algorithm and c.T == T:
                return c
        raise KeyError((algorithm, T))

    @property
    def any_cell_all_failed(self) -> bool:
        return any(c.trials_ok == 0 for c in self.cells)


def _fmt(x) -> str:
    return format(float(x), ".9g")


def _seed_tag(master_seed: int, horizon_index: int, trial: int) -> int:
    ss = trial_seed(master_seed, horizon_index, trial)
    return int(ss.generate_state(1)[0])


def _one_trial(spec: ExperimentSpec, ti: int, T: int, trial: int):
    """Run every algorithm on the trial's path; returns (rows, errors)."""
    seed = trial_seed(spec.master_seed, ti, trial)
    tag = _seed_tag(spec.master_seed, ti, trial)
    rows, errors = [], []
    if T <= spec.hindsight_stream_threshold:
        stream = materialize(spec.model, seed, T)
        hindsight, _ = solve_hindsight_relaxation(
            stream.rewards, stream.requirements, stream.replenishments)
    else:
        stream = None
        hindsight = hindsight_value_streaming(spec.model, seed, T)
    for name, cfg in spec.algorithms:
        try:
            res: TrialResult = run_policy(spec.model, T, cfg,
                                          trial_seed(spec.master_seed, ti, trial),
                                          stream=stream)
            regret = hindsight - res.reward
            rows.append([spec.experiment_id, name, spec.model_name, str(T),
                         str(trial), str(tag), _fmt(res.reward), _fmt(hindsight),
                         _fmt(regret), str(res.stockouts)])
        except Exception as exc:  # noqa: BLE001 - per-trial failures are recorded
            errors.append((name, T, trial, f"{type(exc).__name__}: {exc}",
                           traceback.format_exc()))
    return rows, errors


def run_experiment(spec: ExperimentSpec) -> RegretReport:
    """Execute the full (algorithm x horizon x trial) grid and write CSVs."""
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_path = out_dir / f"{spec.experiment_id}_raw.csv"
    agg_path = out_dir / f"{spec.experiment_id}_agg.csv"
    report = RegretReport(spec.experiment_id, spec.model_name,
                          raw_path=raw_path, agg_path=agg_path)
    # accumulators keyed by (algorithm, T)
    acc: dict = {(name, T): [] for name, _ in spec.algorithms for T in spec.horizons}
    with open(raw_path, "w", newline="") as fh:
        fh.write(",".join(RAW_COLUMNS) + "\n")
        for ti, T in enumerate(spec.horizons):
            results = [None] * spec.trials
            if spec.threads > 1:
                with ThreadPoolExecutor(max_workers=spec.threads) as pool:
                    futs = {pool.submit(_one_trial, spec, ti, T, k): k
                            for k in range(spec.trials)}
                    for fut, k in futs.items():
                        results[k] = fut.result()
            else:
                for k in range(spec.trials):
                    results[k] = _one_trial(spec, ti, T, k)
            for k in range(spec.trials):
                rows, errors = results[k]
                for row in rows:
                    fh.write(",".join(row) + "\n")
                    key = (row[1], T)
                    acc[key].append((float(row[6]), float(row[7]),
                                     float(row[8]), int(row[9])))
                for name, tt, trial, msg, tb in errors:
                    report.failures.append((name, tt, trial, msg))
                    if spec.verbose:
                        print(f"[trial failure] {name} T={tt} trial={trial}: {msg}")
                fh.flush()   # partial results survive interruption
            if spec.verbose:
                print(f"horizon {T}: {spec.trials} trials done")
    for name, _ in spec.algorithms:
        for T in spec.horizons:
            vals = acc[(name, T)]
            if not vals:
                report.cells.append(CellStats(name, T, 0, math.nan, math.nan,
                                              math.nan, math.nan, math.nan))
                continue
            arr = np.asarray(vals)
            regrets = arr[:, 2]
            std_err = float(regrets.std(ddof=1) / math.sqrt(len(regrets))) \
                if len(regrets) > 1 else 0.0
            report.cells.append(CellStats(
                name, T, len(vals), float(regrets.mean()), std_err,
                float(arr[:, 0].mean()), float(arr[:, 1].mean()),
                float(arr[:, 3].mean())))
    with open(agg_path, "w", newline="") as fh:
        fh.write(",".join(AGG_COLUMNS) + "\n")
        for c in report.cells:
            fh.write(",".join([spec.experiment_id, c.algorithm, spec.model_name,
                               str(c.T), str(c.trials_ok), _fmt(c.mean_regret),
                               _fmt(c.std_err), _fmt(c.mean_reward),
                               _fmt(c.mean_hindsight), _fmt(c.mean_stockouts),
                               BENCHMARK_KIND]) + "\n")
    return report


def inventory_trace(model: InputModel, T: int, cfg: PolicyConfig, master_seed: int,
                    horizon_index: int = 0, trial: int = 0, resource: int = 0,
                    downsample: int = 500):
    """Start-of-period inventory of one resource in one trial, downsampled.

    Returns (periods, levels) with periods 1-based; the first point is the
    zero initial inventory."""
    from dataclasses import replace
    cfg = replace(cfg, record_trace=True)
    seed = trial_seed(master_seed, horizon_index, trial)
    res = run_policy(model, T, cfg, seed)
    return extract_trace(res, resource, downsample)


def extract_trace(result: TrialResult, resource: int, downsample: int):
    if result.trace is None:
        raise TraceDisabled("trial was run without record_trace")
    T = result.trace.shape[0]
    if downsample < 2:
        raise ValueError("downsample must be >= 2")
    idx = np.unique(np.linspace(0, T - 1, min(downsample, T)).astype(int))
    return idx + 1, result.trace[idx, resource]


def write_trace_csv(path, experiment_id, algorithm, model_name, T, trial,
                    resource, periods, levels):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for t, v in zip(periods, levels):
            fh.write(",".join([experiment_id, algorithm, model_name, str(T),
                               str(trial), str(resource), str(int(t)),
                               _fmt(v)]) + "\n")


def sqrt_t_fit(horizons, mean_regrets):
    """Least-squares slope of log(regret) against log(T), with r^2."""
    horizons = np.asarray(horizons, float)
    regrets = np.asarray(mean_regrets, float)
    if len(horizons) < 3:
        raise DegenerateData("need at least 3 horizons for a growth fit")
    if np.any(regrets <= 0):
        raise DegenerateData("nonpositive mean regret; log fit undefined")
    x, y = np.log(horizons), np.log(regrets)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
