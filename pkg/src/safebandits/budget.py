"""Empirical safety budget: a pessimistic account of cumulative reward.

The running value is

    Z(t) = sum of frozen lower-confidence values of past pulls
           + lower-confidence value of the candidate arm
           - (1 - alpha) * (rounds since reset + 1) * baseline UCB,

all windows restarting whenever the detector erases history.  A negative
value means pulling anything but the baseline cannot be certified safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["BudgetLedger", "check_constraint"]


@dataclass
class BudgetLedger:
    """Incremental realization of the safety budget.

    baseline_contribution_mode selects how baseline pulls enter the history
    sum: "lcb" treats them like every other arm, "ucb" credits them at
    their upper bound (the accounting used by the sample-count analysis).
    The ledger itself just accumulates whatever value the policy hands it.
    """

    alpha: float
    baseline_contribution_mode: str = "lcb"
    lcb_history_sum: float = 0.0
    rounds_since_reset: int = field(default=0)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.baseline_contribution_mode not in ("lcb", "ucb"):
            raise ValueError("baseline_contribution_mode must be 'lcb' or 'ucb'")

    def evaluate(self, candidate_lcb: float, baseline_ucb: float) -> float:
        """Budget value if the candidate arm were pulled this round.

        An unsampled baseline (UCB = +inf) makes the result -inf for any
        alpha < 1: safety cannot be certified against an unknown baseline,
        which forces a baseline pull.  At alpha = 1 the subtracted term is
        exactly zero.
        """
        if self.alpha == 1.0:
            subtracted = 0.0
        elif math.isinf(baseline_ucb):
            return -math.inf
        else:
            subtracted = (1.0 - self.alpha) * (self.rounds_since_reset + 1) * baseline_ucb
        return self.lcb_history_sum + candidate_lcb - subtracted

    def record_pull(self, pulled_arm_lcb: float) -> None:
        """Freeze the pulled arm's confidence value at its pull round."""
        self.lcb_history_sum += pulled_arm_lcb
        self.rounds_since_reset += 1

    def reset(self) -> None:
        self.lcb_history_sum = 0.0
        self.rounds_since_reset = 0


def check_constraint(
    realized_rewards,
    baseline_means,
    alpha: float,
) -> int | None:
    """First round where the cumulative-reward safety constraint fails.

    Compares prefix sums of the supplied per-round values against
    (1 - alpha) times the prefix sums of the true baseline means, and
    returns the smallest 1-based round where the left side falls short,
    or None if the constraint holds throughout.
    """
    if len(realized_rewards) != len(baseline_means):
        raise ValueError("length mismatch")
    lhs = 0.0
    rhs = 0.0
    for t, (x, mu0) in enumerate(zip(realized_rewards, baseline_means), start=1):
        lhs += x
        rhs += mu0
        if lhs < (1.0 - alpha) * rhs:
            return t
    return None
