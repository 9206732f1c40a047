import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safebandits.confidence import (
    ArmState,
    ConfidenceParams,
    beta,
    lcb,
    slice_mean,
    ucb,
    ucb_arm,
)
from oracles import brute_beta, brute_mean

P = ConfidenceParams(delta=0.05)


def make_state(samples, arm_id=1):
    state = ArmState(arm_id)
    for x in samples:
        state.append(x)
    return state


class TestSliceMean:
    def test_three_samples(self):
        state = make_state([0.2, 0.4, 0.6])
        assert slice_mean(state, 1, 3) == pytest.approx(0.4)

    def test_singleton(self):
        assert slice_mean(make_state([1.0]), 1, 1) == 1.0

    def test_matches_loop_on_long_sequence(self):
        rng = np.random.default_rng(7)
        samples = rng.random(100)
        state = make_state(samples)
        for lo, hi in [(1, 100), (3, 3), (17, 54), (99, 100), (1, 1)]:
            assert slice_mean(state, lo, hi) == pytest.approx(
                brute_mean(samples, lo, hi), abs=1e-12
            )

    @pytest.mark.parametrize("lo,hi", [(0, 1), (2, 1), (1, 4), (1, 0)])
    def test_bad_slice_raises(self, lo, hi):
        state = make_state([0.5, 0.5, 0.5])
        with pytest.raises(ValueError, match="empty slice"):
            slice_mean(state, lo, hi)

    @given(
        st.lists(st.floats(0.0, 1.0, width=32), min_size=1, max_size=64),
        st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_exhaustive_short_sequences(self, samples, data):
        state = make_state(samples)
        n = len(samples)
        lo = data.draw(st.integers(1, n))
        hi = data.draw(st.integers(lo, n))
        assert slice_mean(state, lo, hi) == pytest.approx(
            brute_mean(samples, lo, hi), abs=1e-12
        )


class TestBeta:
    def test_unsampled_is_infinite(self):
        assert beta(0, 10, P) == math.inf

    def test_spot_value(self):
        # sqrt(2 ln(4 log2(16) / 0.05) / 8) = sqrt(2 ln(320) / 8)
        expected = math.sqrt(2.0 * math.log(320.0) / 8.0)
        assert beta(8, 15, P) == pytest.approx(expected, abs=1e-12)
        assert beta(8, 15, P) == pytest.approx(1.2009, abs=2e-4)

    def test_invalid_round(self):
        with pytest.raises(ValueError, match="invalid round"):
            beta(5, 0, P)

    def test_monotone_decreasing_in_n(self):
        values = [beta(n, 1000, P) for n in range(1, 400)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 0.5  # heads toward zero

    @given(st.integers(1, 10_000), st.integers(1, 100_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_reference(self, n, t):
        assert beta(n, t, P) == pytest.approx(brute_beta(n, t, 0.05), abs=1e-12)


class TestBounds:
    def test_symmetric_around_mean(self):
        state = make_state([0.5] * 25)
        radius = beta(25, 100, P)
        assert ucb(state, 100, P) == pytest.approx(0.5 + radius)
        assert lcb(state, 100, P) == pytest.approx(0.5 - radius)

    def test_unsampled(self):
        state = ArmState(1)
        assert ucb(state, 10, P) == math.inf
        assert lcb(state, 10, P) == -math.inf

    def test_ordering(self):
        state = make_state([0.1, 0.9, 0.4])
        assert lcb(state, 50, P) <= state.mean() <= ucb(state, 50, P)


class TestUcbArm:
    def test_strict_argmax(self):
        low = make_state([0.1] * 50, arm_id=1)
        high = make_state([0.9] * 50, arm_id=2)
        assert ucb_arm([low, high], 60, P) == 2

    def test_unsampled_dominates(self):
        sampled = [make_state([0.9] * 10, arm_id=i) for i in (1, 2)]
        empty = ArmState(3)
        assert ucb_arm(sampled + [empty], 30, P) == 3

    def test_tie_breaks_to_smallest_index(self):
        a = make_state([0.8] * 20, arm_id=1)
        b = make_state([0.8] * 20, arm_id=2)
        assert ucb_arm([a, b], 50, P) == 1
        assert ucb_arm([b, a], 50, P) == 1


class TestArmState:
    def test_prefix_invariant(self):
        rng = np.random.default_rng(3)
        state = ArmState(0, capacity=4)  # force buffer growth
        samples = []
        for x in rng.random(200):
            state.append(float(x))
            samples.append(float(x))
        assert state.count == len(samples)
        running = 0.0
        for k, x in enumerate(samples, start=1):
            running += x
            assert state.prefix_sums[k - 1] == pytest.approx(running, abs=1e-12)

    def test_reset(self):
        state = make_state([0.5, 0.7])
        state.reset(42)
        assert state.count == 0
        assert state.restart_round == 42
        with pytest.raises(ValueError):
            state.mean()
