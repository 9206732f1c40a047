"""Confidence-scan changepoint detector with global/local restart semantics.

A changepoint is flagged for an arm when some split of its post-restart
sample sequence produces two disjoint confidence intervals:

    |mean(1..s) - mean(s+1..n)| > beta(s, t) + beta(n-s, t).

Only the arm pulled at the current round is scanned; an arm that was not
pulled has an unchanged sequence and a larger threshold than at its last
pull, so any qualifying split would already have fired then.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .budget import BudgetLedger
from .confidence import ArmState, ConfidenceParams, log_term

__all__ = ["DetectionOutcome", "RestartMode", "scan_arm", "cpd"]


class RestartMode(Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class DetectionOutcome:
    detected: bool
    arm: int | None = None
    split: int | None = None
    round: int = 0

    @staticmethod
    def none(t: int) -> "DetectionOutcome":
        return DetectionOutcome(detected=False, round=t)


# 1/k and 1/sqrt(k) lookup tables, grown on demand; index 0 unused.
_INV = np.array([np.inf, 1.0])
_INV_SQRT = np.array([np.inf, 1.0])


def _tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    global _INV, _INV_SQRT
    if _INV.shape[0] <= n:
        size = max(2 * _INV.shape[0], n + 1)
        k = np.arange(1, size, dtype=np.float64)
        _INV = np.concatenate([[np.inf], 1.0 / k])
        _INV_SQRT = np.concatenate([[np.inf], 1.0 / np.sqrt(k)])
    return _INV, _INV_SQRT


def scan_arm(state: ArmState, t: int, params: ConfidenceParams) -> DetectionOutcome:
    """Smallest split of the arm's sample sequence with disjoint intervals.

    Returns a no-detection outcome when the arm has fewer than two samples
    or no split qualifies.
    """
    n = state.count
    if n < 2:
        return DetectionOutcome.none(t)
    inv, inv_sqrt = _tables(n)
    prefix = state.prefix_with_zero()
    total = prefix[n]
    left_sums = prefix[1:n]
    left_mean = left_sums * inv[1:n]
    right_mean = (total - left_sums) * inv[n - 1 : 0 : -1]
    radius = math.sqrt(params.radius_constant * log_term(t, params.delta))
    threshold = radius * (inv_sqrt[1:n] + inv_sqrt[n - 1 : 0 : -1])
    fired = np.abs(left_mean - right_mean) > threshold
    if not fired.any():
        return DetectionOutcome.none(t)
    split = int(fired.argmax()) + 1
    return DetectionOutcome(detected=True, arm=state.arm_id, split=split, round=t)


def cpd(
    states: list[ArmState],
    ledger: BudgetLedger | None,
    t: int,
    mode: RestartMode,
    pulled_arm: int,
    params: ConfidenceParams,
    carry_budget: bool = False,
) -> DetectionOutcome:
    """Run the scan on the arm pulled at round t and restart on detection.

    mode GLOBAL erases every arm (baseline included) and sets all restart
    rounds to t; mode LOCAL erases only the flagged arm.  The budget ledger
    is zeroed on any detection unless carry_budget is set.
    """
    outcome = scan_arm(states[pulled_arm], t, params)
    if not outcome.detected:
        return outcome
    if mode is RestartMode.GLOBAL:
        for state in states:
            state.reset(t)
    else:
        states[pulled_arm].reset(t)
    if ledger is not None and not carry_budget:
        ledger.reset()
    return outcome
