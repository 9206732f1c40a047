"""Piecewise-i.i.d. bandit simulation under a cumulative-reward safety
constraint: safe global/local restart policies, a confidence-scan
changepoint detector, baselines, theory calculators and an experiment
harness."""

from .budget import BudgetLedger, check_constraint
from .confidence import ArmState, ConfidenceParams, beta, lcb, slice_mean, ucb, ucb_arm
from .detector import DetectionOutcome, RestartMode, cpd, scan_arm
from .environment import EnvSpec, GapProfile, builtin, gap_profile, load_env, mean_of, sample
from .harness import (
    ExperimentConfig,
    PolicyConfig,
    RegretReport,
    RunLog,
    detection_delays,
    pseudo_regret,
    run_experiment,
    run_one,
)
from .policies import Action, PolicyParams, make_policy

__version__ = "0.1.0"
