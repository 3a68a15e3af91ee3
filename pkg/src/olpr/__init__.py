"""Online linear programming with stochastic replenishment.

Accept/reject policies driven by dual prices and batch LPs, small dense LP
solvers for the fluid and hindsight programs, and a seeded Monte-Carlo
harness producing regret/stockout CSVs.
"""

from .constants import Overrides
from .dual import DualObjective, SolverOpts, f_eval, f_subgradient, minimize_f
from .harness import ExperimentSpec, RegretReport, run_experiment, sqrt_t_fit
from .lp import (InducedLpInstance, LpSolution, induced_from_model,
                 solve_hindsight_relaxation, solve_induced)
from .model import (BoundsParams, InputModel, OrderSample, Stream,
                    build_hard_instance, make_random_input_i,
                    make_random_input_ii, materialize, sample, validate_model)
from .policies import (PolicyConfig, TrialResult, run_baseline_olp, run_bounded,
                       run_finite_support, run_main_nondegenerate, run_policy)

__version__ = "0.1.0"
