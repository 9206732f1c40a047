"""Decision-making algorithms sharing a step/update interface.

Safety-aware policies gate every non-baseline pull on the empirical budget;
actively adaptive ones run the confidence-scan detector after each reward.
All tie-breaks are deterministic and no policy holds its own randomness, so
a policy replayed against the same reward sequence reproduces its actions.

Budget contributions are the positive part max(L, 0) of the lower
confidence value: rewards live in [0, 1], so zero is always a certified
floor for a pull's contribution, and the clamp keeps the gate a no-op at
alpha = 1 (where the policy must coincide with plain UCB).  The clamp also
resolves the post-restart cold start: no re-initialization sweep is run
(unless ``resample_on_restart`` is set); empty arms carry an infinite UCB
that steers the argmax back to them, their budget candidate is 0 instead of
-inf, and an unsampled baseline still forces baseline pulls through its
infinite UCB in the subtracted term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budget import BudgetLedger
from .confidence import ArmState, ConfidenceParams, lcb, ucb, ucb_arm
from .detector import DetectionOutcome, RestartMode, cpd

__all__ = ["Action", "PolicyParams", "Policy", "make_policy", "POLICY_TAGS"]

POLICY_TAGS = (
    "sgr",
    "slr",
    "cucb",
    "ucbcpd",
    "ucbcpde",
    "ducb",
    "umoss",
    "glrucb-global",
    "glrucb-local",
)


@dataclass(frozen=True)
class Action:
    arm: int
    reason: str  # init | ucb | forced | baseline


@dataclass
class PolicyParams:
    """Everything a policy needs besides the environment itself."""

    alpha: float = 0.7
    delta: float = 0.05
    gamma: float = 0.05
    horizon: int = 1000
    radius_constant: float = 2.0
    baseline_contribution_mode: str = "lcb"
    carry_budget: bool = False
    resample_on_restart: bool = False
    discount: float | None = None  # D-UCB; default 1 - (1/4) sqrt(1/T)
    xi: float = 0.5  # D-UCB exploration constant
    umoss_mu0: float | None = None
    sigma2: float = 0.25  # Gaussian-KL GLR variance
    glr_threshold_scale: float = 1.0

    def confidence(self) -> ConfidenceParams:
        return ConfidenceParams(delta=self.delta, radius_constant=self.radius_constant)


class Policy:
    """Base: K+1 arm histories plus bookkeeping shared by every algorithm."""

    kind = "base"
    safety_aware = False

    def __init__(self, K: int, params: PolicyParams):
        self.K = K
        self.params = params
        self.cparams = params.confidence()
        self.arms = [ArmState(i) for i in range(K + 1)]
        self.last_budget: float | None = None

    @property
    def restart_vec(self) -> list[int]:
        return [arm.restart_round for arm in self.arms]

    def step(self, t: int) -> Action:
        raise NotImplementedError

    def update(self, action: Action, reward: float, t: int) -> DetectionOutcome:
        raise NotImplementedError

    def _init_action(self, t: int) -> Action | None:
        """Round-robin warm-up: round t pulls arm t-1 while t <= K+1."""
        if t <= self.K + 1:
            return Action(arm=t - 1, reason="init")
        if self.params.resample_on_restart:
            for arm in self.arms:
                if arm.count == 0:
                    return Action(arm=arm.arm_id, reason="init")
        return None

    def _forced_block(self) -> int:
        block = math.floor(self.K / self.params.gamma)
        if block < self.K:
            raise ValueError(
                f"forced-exploration block floor(K/gamma) = {block} < K = {self.K}"
            )
        return block


class SafeRestartPolicy(Policy):
    """SGR/SLR family plus the gate-only and detector-only ablations.

    kind        gate  detector  restart  forced
    sgr          yes    yes     global     no
    slr          yes    yes     local      yes
    cucb         yes     no       -        no
    ucbcpd        no    yes     global     no
    ucbcpde       no    yes     local      yes
    """

    def __init__(self, kind: str, K: int, params: PolicyParams):
        super().__init__(K, params)
        self.kind = kind
        self.use_gate = kind in ("sgr", "slr", "cucb")
        self.use_detector = kind in ("sgr", "slr", "ucbcpd", "ucbcpde")
        self.forced = kind in ("slr", "ucbcpde")
        self.mode = RestartMode.LOCAL if kind in ("slr", "ucbcpde") else RestartMode.GLOBAL
        self.safety_aware = self.use_gate
        self.ledger = (
            BudgetLedger(
                alpha=params.alpha,
                baseline_contribution_mode=params.baseline_contribution_mode,
            )
            if self.use_gate
            else None
        )
        self.block = self._forced_block() if self.forced else 0

    def step(self, t: int) -> Action:
        self.last_budget = None
        init = self._init_action(t)
        if init is not None:
            return init
        u = ucb_arm(self.arms[1:], t, self.cparams)
        if self.use_gate:
            candidate = max(lcb(self.arms[u], t, self.cparams), 0.0)
            z = self.ledger.evaluate(candidate, ucb(self.arms[0], t, self.cparams))
            self.last_budget = z
            if z < 0:
                return Action(arm=0, reason="baseline")
        if self.forced:
            m = t % self.block
            if 1 <= m <= self.K:
                return Action(arm=m, reason="forced")
        return Action(arm=u, reason="ucb")

    def update(self, action: Action, reward: float, t: int) -> DetectionOutcome:
        arm = self.arms[action.arm]
        arm.append(reward)
        if self.use_gate:
            if action.arm == 0 and self.params.baseline_contribution_mode == "ucb":
                value = ucb(arm, t, self.cparams)
            else:
                value = max(lcb(arm, t, self.cparams), 0.0)
            self.ledger.record_pull(value)
        if self.use_detector:
            return cpd(
                self.arms,
                self.ledger,
                t,
                self.mode,
                pulled_arm=action.arm,
                params=self.cparams,
                carry_budget=self.params.carry_budget,
            )
        return DetectionOutcome.none(t)


class DiscountedUCBPolicy(Policy):
    """Passive baseline: exponentially discounted counts and means."""

    kind = "ducb"

    def __init__(self, K: int, params: PolicyParams):
        super().__init__(K, params)
        T = params.horizon
        self.gamma_d = params.discount if params.discount is not None else 1.0 - 0.25 * math.sqrt(1.0 / T)
        self.counts = np.zeros(K + 1)
        self.sums = np.zeros(K + 1)

    def step(self, t: int) -> Action:
        self.last_budget = None
        init = self._init_action(t)
        if init is not None:
            return init
        n_t = self.counts.sum()
        log_n = math.log(max(n_t, 2.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            bonus = 2.0 * np.sqrt(self.params.xi * log_n / self.counts)
            index = self.sums / self.counts + bonus
        index[self.counts <= 0] = math.inf
        return Action(arm=int(np.argmax(index)), reason="ucb")

    def update(self, action: Action, reward: float, t: int) -> DetectionOutcome:
        self.arms[action.arm].append(reward)
        self.counts *= self.gamma_d
        self.sums *= self.gamma_d
        self.counts[action.arm] += 1.0
        self.sums[action.arm] += reward
        return DetectionOutcome.none(t)


def umoss_budgets(T: int, K: int, alpha: float, mu0: float) -> np.ndarray:
    """Per-arm regret budgets: baseline gets T K / b, every other arm b,
    with b = sqrt(T K) + K / (alpha mu0)."""
    b = math.sqrt(T * K) + K / (alpha * mu0)
    budgets = np.full(K + 1, b)
    budgets[0] = T * K / b
    return budgets


class UnbalancedMossPolicy(Policy):
    """MOSS-style index with the balanced per-arm budget T/K replaced by
    the conservative weighting above; needs the baseline mean as input."""

    kind = "umoss"

    def __init__(self, K: int, params: PolicyParams):
        super().__init__(K, params)
        if params.umoss_mu0 is None or params.umoss_mu0 <= 0:
            raise ValueError("umoss requires a known positive baseline mean")
        self.budgets = umoss_budgets(params.horizon, K, params.alpha, params.umoss_mu0)
        self.counts = np.zeros(K + 1)
        self.sums = np.zeros(K + 1)

    def index(self) -> np.ndarray:
        T = self.params.horizon
        with np.errstate(divide="ignore", invalid="ignore"):
            log_arg = np.maximum(T / (self.budgets * self.counts), 1.0)
            value = self.sums / self.counts + np.sqrt(np.log(log_arg) / self.counts)
        value[self.counts <= 0] = math.inf
        return value

    def step(self, t: int) -> Action:
        self.last_budget = None
        init = self._init_action(t)
        if init is not None:
            return init
        return Action(arm=int(np.argmax(self.index())), reason="ucb")

    def update(self, action: Action, reward: float, t: int) -> DetectionOutcome:
        self.arms[action.arm].append(reward)
        self.counts[action.arm] += 1.0
        self.sums[action.arm] += reward
        return DetectionOutcome.none(t)


def glr_statistic(prefix: np.ndarray, n: int, sigma2: float) -> tuple[float, int]:
    """Gaussian GLR scan value and its maximizing split for n samples."""
    total = prefix[n]
    grand = total / n
    s = np.arange(1, n, dtype=np.float64)
    left = prefix[1:n] / s
    right = (total - prefix[1:n]) / (n - s)
    stat = (s * (left - grand) ** 2 + (n - s) * (right - grand) ** 2) / (2.0 * sigma2)
    split = int(np.argmax(stat))
    return float(stat[split]), split + 1


class GLRPolicy(Policy):
    """UCB with forced exploration and a Gaussian generalized-likelihood
    ratio changepoint test (threshold ln(3 n^{3/2} / delta))."""

    def __init__(self, kind: str, K: int, params: PolicyParams):
        super().__init__(K, params)
        self.kind = kind
        self.mode = RestartMode.GLOBAL if kind.endswith("global") else RestartMode.LOCAL
        self.block = self._forced_block()

    def step(self, t: int) -> Action:
        self.last_budget = None
        init = self._init_action(t)
        if init is not None:
            return init
        m = t % self.block
        if 1 <= m <= self.K:
            return Action(arm=m, reason="forced")
        return Action(arm=ucb_arm(self.arms[1:], t, self.cparams), reason="ucb")

    def update(self, action: Action, reward: float, t: int) -> DetectionOutcome:
        arm = self.arms[action.arm]
        arm.append(reward)
        n = arm.count
        if n < 2:
            return DetectionOutcome.none(t)
        stat, split = glr_statistic(arm.prefix_with_zero(), n, self.params.sigma2)
        threshold = self.params.glr_threshold_scale * math.log(
            3.0 * n**1.5 / self.params.delta
        )
        if stat < threshold:
            return DetectionOutcome.none(t)
        if self.mode is RestartMode.GLOBAL:
            for state in self.arms:
                state.reset(t)
        else:
            arm.reset(t)
        return DetectionOutcome(detected=True, arm=action.arm, split=split, round=t)


def make_policy(tag: str, K: int, params: PolicyParams) -> Policy:
    if tag in ("sgr", "slr", "cucb", "ucbcpd", "ucbcpde"):
        return SafeRestartPolicy(tag, K, params)
    if tag == "ducb":
        return DiscountedUCBPolicy(K, params)
    if tag == "umoss":
        return UnbalancedMossPolicy(K, params)
    if tag in ("glrucb-global", "glrucb-local"):
        return GLRPolicy(tag, K, params)
    raise ValueError(f"unknown policy tag {tag!r}; choose from {POLICY_TAGS}")
