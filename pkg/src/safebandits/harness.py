"""Replicated experiment orchestration with seeded, byte-stable CSV output.

Each replication draws one Philox stream keyed by its seed and pre-generates
one uniform variate per round; the reward of whatever arm is pulled at round
t is the inverse-CDF transform of uniforms[t-1].  Counter-based streams plus
seed-keyed aggregation make the output independent of worker scheduling.

Safety accounting uses the measurable surrogate of the cumulative-reward
constraint: prefix sums of the pulled arms' true means are compared against
(1 - alpha) times the prefix sums of the true baseline means, which is
deterministic given the action sequence.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from .budget import check_constraint
from .environment import EnvSpec, builtin, gap_profile, load_env
from .policies import PolicyParams, make_policy

__all__ = [
    "REASONS",
    "PolicyConfig",
    "ExperimentConfig",
    "RunLog",
    "RegretReport",
    "run_one",
    "pseudo_regret",
    "pulled_means",
    "detection_delays",
    "violation_round",
    "run_experiment",
    "resolve_env",
    "default_gamma",
]

REASONS = ("init", "ucb", "forced", "baseline")
_REASON_CODE = {name: i for i, name in enumerate(REASONS)}


def default_gamma(T: int) -> float:
    """Forced-exploration rate sqrt(ln T / T) from the gap-independent tuning."""
    return math.sqrt(math.log(T) / T)


@dataclass(frozen=True)
class PolicyConfig:
    """Algorithm tag plus every knob needed to reproduce a run."""

    tag: str
    alpha: float = 0.7
    delta: float = 0.05
    gamma: float | None = None  # None: sqrt(ln T / T)
    radius_constant: float = 2.0
    baseline_contribution_mode: str = "lcb"
    carry_budget: bool = False
    resample_on_restart: bool = False
    discount: float | None = None
    xi: float = 0.5
    umoss_mu0: float | None = None
    sigma2: float = 0.25

    def params_for(self, env: EnvSpec) -> PolicyParams:
        mu0 = self.umoss_mu0
        if mu0 is None and self.tag == "umoss":
            # time-average baseline mean; umoss assumes it known
            mu0 = float(np.mean([_round_mean(env, 0, t) for t in range(1, env.T + 1)]))
        return PolicyParams(
            alpha=self.alpha,
            delta=self.delta,
            gamma=self.gamma if self.gamma is not None else default_gamma(env.T),
            horizon=env.T,
            radius_constant=self.radius_constant,
            baseline_contribution_mode=self.baseline_contribution_mode,
            carry_budget=self.carry_budget,
            resample_on_restart=self.resample_on_restart,
            discount=self.discount,
            xi=self.xi,
            umoss_mu0=mu0,
            sigma2=self.sigma2,
        )


def _round_mean(env: EnvSpec, arm: int, t: int) -> float:
    return env.means[env.segment_of(t)][arm]


def _mean_table(env: EnvSpec) -> tuple[np.ndarray, np.ndarray]:
    """(per-round segment index, segment x arm mean matrix)."""
    starts = np.asarray(env.starts)
    seg_of_round = np.searchsorted(starts, np.arange(1, env.T + 1), side="right") - 1
    return seg_of_round, np.asarray(env.means)


@dataclass
class RunLog:
    env_id: str
    algo: str
    seed: int
    params: dict
    arms: np.ndarray  # int16, pulled arm per round
    reasons: np.ndarray  # uint8 codes into REASONS
    rewards: np.ndarray
    budgets: np.ndarray  # decision-time budget; NaN when not evaluated
    det_arm: np.ndarray  # -1 when no detection that round
    det_split: np.ndarray

    @property
    def T(self) -> int:
        return self.arms.shape[0]

    def reason_names(self) -> list[str]:
        return [REASONS[c] for c in self.reasons]


def run_one(env: EnvSpec, cfg: PolicyConfig, seed: int) -> RunLog:
    """One fully deterministic T-round episode of a policy against an env."""
    policy = make_policy(cfg.tag, env.K, cfg.params_for(env))
    if len(policy.arms) != env.K + 1:
        raise ValueError("policy/env arm-count mismatch")
    T = env.T
    uniforms = np.random.Generator(np.random.Philox(key=seed)).random(T)
    seg_of_round, means = _mean_table(env)
    bernoulli = env.noise == "bernoulli"
    if not bernoulli:
        from statistics import NormalDist

        inv_cdf = NormalDist().inv_cdf
        sigma = env.sigma
    arms = np.empty(T, dtype=np.int16)
    reasons = np.empty(T, dtype=np.uint8)
    rewards = np.empty(T, dtype=np.float64)
    budgets = np.full(T, np.nan)
    det_arm = np.full(T, -1, dtype=np.int16)
    det_split = np.full(T, -1, dtype=np.int32)
    for t in range(1, T + 1):
        action = policy.step(t)
        mu = means[seg_of_round[t - 1], action.arm]
        u = uniforms[t - 1]
        if bernoulli:
            reward = 1.0 if u < mu else 0.0
        else:
            u = min(max(u, 1e-12), 1.0 - 1e-12)
            reward = min(max(mu + sigma * inv_cdf(u), 0.0), 1.0)
        outcome = policy.update(action, reward, t)
        i = t - 1
        arms[i] = action.arm
        reasons[i] = _REASON_CODE[action.reason]
        rewards[i] = reward
        if policy.last_budget is not None:
            budgets[i] = policy.last_budget
        if outcome.detected:
            det_arm[i] = outcome.arm
            det_split[i] = outcome.split
    return RunLog(
        env_id=env.name or "custom",
        algo=cfg.tag,
        seed=seed,
        params={"alpha": cfg.alpha, "delta": cfg.delta, "gamma": cfg.gamma},
        arms=arms,
        reasons=reasons,
        rewards=rewards,
        budgets=budgets,
        det_arm=det_arm,
        det_split=det_split,
    )


def pulled_means(log: RunLog, env: EnvSpec) -> np.ndarray:
    """True mean of the pulled arm at every round."""
    seg_of_round, means = _mean_table(env)
    return means[seg_of_round, log.arms]


def pseudo_regret(log: RunLog, env: EnvSpec) -> np.ndarray:
    """Cumulative gap to the per-round best mean (baseline included)."""
    seg_of_round, means = _mean_table(env)
    best = means.max(axis=1)[seg_of_round]
    return np.cumsum(best - pulled_means(log, env))


def violation_round(log: RunLog, env: EnvSpec, alpha: float) -> int | None:
    """First round where the safety surrogate fails, or None."""
    seg_of_round, means = _mean_table(env)
    return check_constraint(pulled_means(log, env), means[seg_of_round, 0], alpha)


@dataclass(frozen=True)
class DelayReport:
    delays: dict[int, int | None]  # changepoint round -> delay or None (missed)
    false_alarms: tuple[int, ...]  # detection rounds before the first changepoint


def detection_delays(log: RunLog, env: EnvSpec) -> DelayReport:
    rounds = np.nonzero(log.det_arm >= 0)[0] + 1
    boundaries = list(env.changepoints)
    edges = boundaries + [env.T + 1]
    delays: dict[int, int | None] = {}
    for b, t_c in enumerate(boundaries):
        in_window = rounds[(rounds >= t_c) & (rounds < edges[b + 1])]
        delays[t_c] = int(in_window[0] - t_c) if in_window.size else None
    first = boundaries[0] if boundaries else env.T + 1
    false_alarms = tuple(int(r) for r in rounds if r < first)
    return DelayReport(delays=delays, false_alarms=false_alarms)


@dataclass
class RegretReport:
    algo: str
    R: int
    mean_cum_regret: np.ndarray
    stderr: np.ndarray
    violation_rounds: list[int | None]
    delay_reports: list[DelayReport]
    violation_frac_by_t: np.ndarray
    detections_by_t: np.ndarray

    @property
    def final_regret(self) -> float:
        return float(self.mean_cum_regret[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1])


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvSpec
    algos: tuple[str, ...]
    policy: PolicyConfig = field(default=PolicyConfig(tag="sgr"))
    reps: int = 20
    seed0: int = 0
    outdir: str | None = None
    workers: int = 1
    save_runs: bool = False


def _replication(args) -> RunLog:
    env, cfg, seed = args
    return run_one(env, cfg, seed)


def _run_many(env: EnvSpec, cfg: PolicyConfig, seeds: list[int], workers: int) -> list[RunLog]:
    tasks = [(env, cfg, seed) for seed in seeds]
    if workers <= 1 or len(tasks) == 1:
        logs = [_replication(task) for task in tasks]
    else:
        with get_context("fork").Pool(processes=workers) as pool:
            logs = pool.map(_replication, tasks)
    logs.sort(key=lambda log: log.seed)  # seed-keyed merge
    return logs


def aggregate(logs: list[RunLog], env: EnvSpec, alpha: float) -> RegretReport:
    R = len(logs)
    T = env.T
    curves = np.stack([pseudo_regret(log, env) for log in logs])
    mean = curves.mean(axis=0)
    stderr = curves.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros(T)
    violations = [violation_round(log, env, alpha) for log in logs]
    delays = [detection_delays(log, env) for log in logs]
    viol_by_t = np.zeros(T)
    for v in violations:
        if v is not None:
            viol_by_t[v - 1 :] += 1.0
    viol_by_t /= R
    det_by_t = np.zeros(T)
    for log in logs:
        det_by_t += np.cumsum(log.det_arm >= 0)
    det_by_t /= R
    return RegretReport(
        algo=logs[0].algo,
        R=R,
        mean_cum_regret=mean,
        stderr=stderr,
        violation_rounds=violations,
        delay_reports=delays,
        violation_frac_by_t=viol_by_t,
        detections_by_t=det_by_t,
    )


SUMMARY_COLUMNS = (
    "t",
    "algo",
    "mean_cum_regret",
    "stderr",
    "violation_frac_by_t",
    "detections_by_t",
)
RUN_COLUMNS = ("t", "arm", "reason", "reward", "budget", "detected_arm", "detected_split")


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_summary_rows(writer, report: RegretReport) -> None:
    for i in range(report.mean_cum_regret.shape[0]):
        writer.writerow(
            [
                i + 1,
                report.algo,
                _fmt(report.mean_cum_regret[i]),
                _fmt(report.stderr[i]),
                _fmt(report.violation_frac_by_t[i]),
                _fmt(report.detections_by_t[i]),
            ]
        )


def write_summary_csv(path: str, reports: list[RegretReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for report in reports:
            _write_summary_rows(writer, report)


def write_run_csv(path: str, log: RunLog) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_COLUMNS)
        names = log.reason_names()
        for i in range(log.T):
            budget = "" if math.isnan(log.budgets[i]) else _fmt(log.budgets[i])
            writer.writerow(
                [
                    i + 1,
                    int(log.arms[i]),
                    names[i],
                    _fmt(log.rewards[i]),
                    budget,
                    int(log.det_arm[i]),
                    int(log.det_split[i]),
                ]
            )


def write_env_means_csv(path: str, env: EnvSpec) -> None:
    seg_of_round, means = _mean_table(env)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"mean_{i}" for i in range(env.K + 1)])
        for t in range(1, env.T + 1):
            row = means[seg_of_round[t - 1]]
            writer.writerow([t] + [_fmt(m) for m in row])


def run_experiment(config: ExperimentConfig) -> dict[str, RegretReport]:
    """R replications per algorithm; aggregates and optionally writes CSVs."""
    env = config.env
    seeds = list(range(config.seed0, config.seed0 + config.reps))
    reports: dict[str, RegretReport] = {}
    all_logs: dict[str, list[RunLog]] = {}
    for tag in config.algos:
        cfg = replace(config.policy, tag=tag)
        logs = _run_many(env, cfg, seeds, config.workers)
        all_logs[tag] = logs
        reports[tag] = aggregate(logs, env, cfg.alpha)
    if config.outdir is not None:
        try:
            os.makedirs(config.outdir, exist_ok=True)
            for tag, report in reports.items():
                write_summary_csv(os.path.join(config.outdir, f"{tag}.csv"), [report])
            write_summary_csv(
                os.path.join(config.outdir, "summary.csv"), list(reports.values())
            )
            write_env_means_csv(os.path.join(config.outdir, "env_means.csv"), env)
            if config.save_runs:
                rundir = os.path.join(config.outdir, "runs")
                os.makedirs(rundir, exist_ok=True)
                for tag, logs in all_logs.items():
                    for log in logs:
                        write_run_csv(
                            os.path.join(rundir, f"{tag}_seed{log.seed}.csv"), log
                        )
        except OSError as exc:
            raise OSError(f"failed writing experiment output under {config.outdir}: {exc}") from exc
    return reports


def resolve_env(spec: str) -> EnvSpec:
    """Accept either a preset name or an environment file path."""
    if os.path.exists(spec):
        return load_env(spec)
    return builtin(spec)
