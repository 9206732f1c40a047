"""Anytime confidence radii and bounds over per-arm sample windows.

Each arm keeps the rewards observed since its last restart together with a
prefix-sum buffer, so the mean of any contiguous slice is O(1).  The radius
is the iterated-logarithm style width

    beta(n, t) = sqrt(c * ln(4 * log2(t+1) / delta) / n)

with c = 2 by default and beta = +inf for an unsampled arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArmState",
    "ConfidenceParams",
    "slice_mean",
    "beta",
    "log_term",
    "ucb",
    "lcb",
    "ucb_arm",
]


@dataclass(frozen=True)
class ConfidenceParams:
    """Confidence level and leading radius constant.

    radius_constant defaults to 2, the smallest constant known to make the
    anytime bound valid; tighter constants can be configured.
    """

    delta: float
    radius_constant: float = 2.0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.radius_constant <= 0.0:
            raise ValueError("radius_constant must be positive")


class ArmState:
    """Reward history of one arm since its last restart.

    Samples are stored in a growing numpy buffer next to their prefix sums:
    prefix[k] holds the sum of the first k samples, so slice means never
    rescan the data.
    """

    __slots__ = ("arm_id", "restart_round", "count", "_buf", "_prefix")

    def __init__(self, arm_id: int, restart_round: int = 1, capacity: int = 64):
        self.arm_id = arm_id
        self.restart_round = restart_round
        self.count = 0
        self._buf = np.empty(capacity, dtype=np.float64)
        self._prefix = np.zeros(capacity + 1, dtype=np.float64)

    def append(self, reward: float) -> None:
        n = self.count
        if n == self._buf.shape[0]:
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
            grown = np.zeros(2 * self._prefix.shape[0] - 1, dtype=np.float64)
            grown[: n + 1] = self._prefix[: n + 1]
            self._prefix = grown
        self._buf[n] = reward
        self._prefix[n + 1] = self._prefix[n] + reward
        self.count = n + 1

    def reset(self, restart_round: int) -> None:
        """Erase all samples; the arm restarts at the given round."""
        self.count = 0
        self.restart_round = restart_round

    @property
    def samples(self) -> np.ndarray:
        return self._buf[: self.count]

    @property
    def prefix_sums(self) -> np.ndarray:
        """prefix_sums[k-1] is the sum of the first k samples."""
        return self._prefix[1 : self.count + 1]

    def prefix_with_zero(self) -> np.ndarray:
        """Internal prefix view including the leading zero (length count+1)."""
        return self._prefix[: self.count + 1]

    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("empty slice")
        return self._prefix[self.count] / self.count


def slice_mean(state: ArmState, lo: int, hi: int) -> float:
    """Mean of samples lo..hi (1-based, inclusive) in O(1)."""
    if not 1 <= lo <= hi <= state.count:
        raise ValueError("empty slice")
    p = state._prefix
    return (p[hi] - p[lo - 1]) / (hi - lo + 1)


def log_term(t: int, delta: float) -> float:
    """ln(4 * log2(t+1) / delta), the shared log factor of the radius."""
    if t < 1:
        raise ValueError("invalid round")
    return math.log(4.0 * math.log2(t + 1.0) / delta)


def beta(n: int, t: int, params: ConfidenceParams) -> float:
    """Anytime radius for n samples at round t; +inf when n = 0."""
    if t < 1:
        raise ValueError("invalid round")
    if n == 0:
        return math.inf
    return math.sqrt(params.radius_constant * log_term(t, params.delta) / n)


def ucb(state: ArmState, t: int, params: ConfidenceParams) -> float:
    if state.count == 0:
        return math.inf
    return state.mean() + beta(state.count, t, params)


def lcb(state: ArmState, t: int, params: ConfidenceParams) -> float:
    if state.count == 0:
        return -math.inf
    return state.mean() - beta(state.count, t, params)


def ucb_arm(states: list[ArmState], t: int, params: ConfidenceParams) -> int:
    """Index of the non-baseline arm with the largest UCB.

    `states` holds arms 1..K only.  Ties break toward the smallest arm id so
    runs are reproducible.
    """
    best_arm = states[0].arm_id
    best_val = ucb(states[0], t, params)
    for state in states[1:]:
        val = ucb(state, t, params)
        if val > best_val or (val == best_val and state.arm_id < best_arm):
            best_val = val
            best_arm = state.arm_id
    return best_arm
