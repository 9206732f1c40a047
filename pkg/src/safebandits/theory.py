"""Closed-form theory quantities: detection delays, sample counts, hardness
terms and regret-bound evaluators.

Gap indexing convention used throughout this module: segments are numbered
0..G (G = number of changepoints); boundary g (1-based) is the jump between
segments g-1 and g, so ``chg_at(profile, g)`` reads row g-1 of the profile's
jump table.  All bound evaluators set the O(.) constant to 1 and are meant
for trend and ratio tests only, never as absolute thresholds.

The delay formula follows the main-text form, with the 4K factor applied to
the whole bracket; the appendix restatement distributes the 4 differently
(4K on the max term only) and is available as ``variant="appendix"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import GapProfile

__all__ = [
    "TheoryInputs",
    "b_of",
    "delay_global",
    "delay_local",
    "n_baseline",
    "n_opt",
    "n_chg",
    "hardness",
    "bound_sgr",
    "bound_slr",
    "bound_gap_independent",
    "equal_gap_profile",
]


@dataclass(frozen=True)
class TheoryInputs:
    profile: GapProfile
    T: int
    delta: float
    alpha: float
    gamma: float
    K: int

    @property
    def G_T(self) -> int:
        return self.profile.n_boundaries

    def G_i(self, i: int) -> int:
        return self.profile.arm_changes[i]


def b_of(T: int, delta: float) -> float:
    """B(T, delta) = 16 ln(4 log2(T / delta))."""
    return 16.0 * math.log(4.0 * math.log2(T / delta))


def _sample_log(T: int, delta: float) -> float:
    """ln(4 log2(T+1) / delta), the log factor of the sample-count lemmas."""
    return math.log(4.0 * math.log2(T + 1.0) / delta)


def chg_at(profile: GapProfile, g: int) -> np.ndarray:
    """Per-arm jump at boundary g (1-based)."""
    if not 1 <= g <= profile.n_boundaries:
        raise ValueError(f"boundary {g} outside 1..{profile.n_boundaries}")
    return profile.chg[g - 1]


def n_baseline(inputs: TheoryInputs, g: int) -> float:
    """Baseline pulls forced by a depleted budget in segment g."""
    profile = inputs.profile
    opt = profile.opt[g]
    mu0 = profile.mu0[g]
    if mu0 <= 0:
        raise ValueError("degenerate segment: zero baseline mean")
    log_factor = 16.0 * _sample_log(inputs.T, inputs.delta)
    total = 0.0
    for i in range(1, profile.n_arms):
        denom = max(opt[i], opt[0] - opt[i])
        if denom <= 0:
            raise ValueError(f"degenerate segment: zero gap denominator for arm {i}")
        total += log_factor / denom
    return total / (inputs.alpha * mu0)


def delay_global(
    inputs: TheoryInputs,
    g: int,
    n_bse: float | None = None,
    variant: str = "main",
) -> int:
    """Detection-delay bound for the g-th global changepoint."""
    profile = inputs.profile
    chg = chg_at(profile, g)
    if (chg <= 0).any():
        raise ValueError(f"degenerate boundary {g}: zero changepoint gap")
    B = b_of(inputs.T, inputs.delta)
    K = inputs.K
    if n_bse is None:
        n_bse = n_baseline(inputs, g)
    max_term = max(B / chg[i] ** 2 for i in range(1, profile.n_arms))
    base_term = B / chg[0] ** 2
    if variant == "main":
        value = K + (max_term + base_term + n_bse) * 4.0 * K
    elif variant == "appendix":
        value = K + 4.0 * (K * max_term + base_term + n_bse)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return math.ceil(value)


def delay_local(
    inputs: TheoryInputs,
    i: int,
    g: int,
    n_bse: float | None = None,
) -> float:
    """Detection-delay bound for arm i's change at boundary g.

    Returns +inf when the arm (or the baseline) does not move at that
    boundary, since the scan has no gap to work with.
    """
    profile = inputs.profile
    chg = chg_at(profile, g)
    if chg[i] <= 0 or chg[0] <= 0:
        return math.inf
    B = b_of(inputs.T, inputs.delta)
    if n_bse is None:
        n_bse = n_baseline(inputs, g)
    gamma = inputs.gamma
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    value = inputs.K / gamma + (4.0 / gamma) * (
        B / chg[i] ** 2 + B / chg[0] ** 2 + n_bse
    )
    return math.ceil(value)


def n_opt(inputs: TheoryInputs, i: int, g: int) -> float:
    """Samples before sub-optimal arm i is discarded in segment g."""
    gap = inputs.profile.opt[g][i]
    if gap <= 0:
        raise ValueError(f"arm {i} is optimal in segment {g}")
    return 8.0 * _sample_log(inputs.T, inputs.delta) / gap**2


def n_chg(inputs: TheoryInputs, i: int, g: int) -> float:
    """Samples of arm i before its jump at boundary g is detectable."""
    gap = chg_at(inputs.profile, g)[i]
    if gap <= 0:
        raise ValueError(f"arm {i} does not change at boundary {g}")
    return 8.0 * _sample_log(inputs.T, inputs.delta) / gap**2


def _h3(profile: GapProfile, i: int, seg: int) -> float:
    opt = profile.opt[seg]
    denom = max(opt[i], opt[0] - opt[i])
    if denom <= 0:
        raise ValueError(f"degenerate H3 denominator for arm {i} in segment {seg}")
    return profile.opt_max[seg] / denom


def hardness(inputs: TheoryInputs, i: int, g: int) -> tuple[float, float, float, float]:
    """(H1, H2, H2bar, H3) for arm i at boundary g (1-based).

    H1 covers the pre-change segment g-1 (its inverse-gap term only when the
    arm is sub-optimal there); H2, H2bar and H3 cover the post-change
    segment g.  H3 is a baseline trade-off quantity and is only defined for
    non-baseline arms; it comes back as NaN for i = 0.
    """
    profile = inputs.profile
    chg = chg_at(profile, g)
    opt_before = profile.opt[g - 1][i]
    opt_after = profile.opt[g][i]
    if opt_before <= 0:
        raise ValueError(f"arm {i} is optimal in segment {g - 1}; H1 undefined")
    h1 = max(1.0 / opt_before, opt_before / chg[i] ** 2) if chg[i] > 0 else 1.0 / opt_before
    positive = chg[chg > 0]
    h2 = opt_after / positive.min() ** 2 if positive.size else 0.0
    h2bar = opt_after / chg[i] ** 2 if chg[i] > 0 else math.inf
    h3 = _h3(profile, i, g) if i > 0 else math.nan
    return h1, h2, h2bar, h3


def _bound_log(inputs: TheoryInputs) -> float:
    return math.log(math.log2(inputs.T) / inputs.delta)


def bound_sgr(inputs: TheoryInputs) -> float:
    """Order-only evaluation of the global-restart regret bound."""
    profile = inputs.profile
    K = inputs.K
    total = 0.0
    for g in range(1, profile.n_segments):
        chg = chg_at(profile, g)
        positive = chg[chg > 0]
        min_chg_sq = positive.min() ** 2 if positive.size else math.inf
        for i in range(profile.n_arms):
            opt_before = profile.opt[g - 1][i]
            if opt_before > 0:
                if chg[i] > 0:
                    total += max(1.0 / opt_before, opt_before / chg[i] ** 2)
                else:
                    total += 1.0 / opt_before
            total += profile.opt[g][i] / min_chg_sq
        total += sum(_h3(profile, i, g - 1) for i in range(1, profile.n_arms)) / (
            inputs.alpha * profile.mu0[g - 1]
        )
        total += (
            K
            * sum(_h3(profile, i, g) for i in range(1, profile.n_arms))
            / (inputs.alpha * profile.mu0[g])
        )
    return total * _bound_log(inputs)


def bound_slr(inputs: TheoryInputs) -> float:
    """Order-only evaluation of the local-restart regret bound."""
    profile = inputs.profile
    K = inputs.K
    total = 0.0
    for g in range(1, profile.n_segments):
        chg = chg_at(profile, g)
        for i in range(profile.n_arms):
            if chg[i] <= 0:
                continue
            opt_before = profile.opt[g - 1][i]
            if opt_before > 0:
                total += max(1.0 / opt_before, opt_before / chg[i] ** 2)
            total += profile.opt[g][i] / chg[i] ** 2
        h3_before = sum(_h3(profile, i, g - 1) for i in range(1, profile.n_arms))
        changed_arms = sum(1 for i in range(1, profile.n_arms) if chg[i] > 0)
        total += changed_arms * h3_before / (inputs.alpha * profile.mu0[g - 1])
        total += (
            K
            * sum(_h3(profile, i, g) for i in range(1, profile.n_arms))
            / (inputs.alpha * profile.mu0[g])
        )
    return total * _bound_log(inputs) + inputs.gamma * inputs.T


def bound_gap_independent(inputs: TheoryInputs, kind: str) -> float:
    """Closed-form gap-independent bounds; kind 'global' or 'local'."""
    G = inputs.G_T
    T = inputs.T
    K = inputs.K
    log_T = math.log(T)
    tail = G * log_T / (inputs.alpha * inputs.profile.mu0_min)
    if kind in ("global", "sgr"):
        return G * K * math.sqrt(K * T * log_T) + tail
    if kind in ("local", "slr"):
        return G * math.sqrt(K * T * log_T) + tail
    raise ValueError(f"unknown kind {kind!r}")


def equal_gap_profile(K: int, T: int, n_changepoints: int, mu0: float = 0.5) -> GapProfile:
    """Synthetic profile with all gaps equal to sqrt(K ln T / T).

    Used by the gap-independent consistency checks; no arm is marked
    optimal, mirroring the corollary's uniform-gap idealization.
    """
    gap = math.sqrt(K * math.log(T) / T)
    segs = n_changepoints + 1
    opt = np.full((segs, K + 1), gap)
    chg = np.full((n_changepoints, K + 1), gap)
    return GapProfile(
        opt=opt,
        chg=chg,
        mu0=np.full(segs, mu0),
        opt_max=np.full(segs, gap),
        mu0_min=mu0,
        arm_changes=tuple(n_changepoints for _ in range(K + 1)),
    )
