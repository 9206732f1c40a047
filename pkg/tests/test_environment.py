import math

import numpy as np
import pytest

import safebandits as sb
from safebandits.environment import (
    BUILTIN_NAMES,
    EnvSpec,
    builtin,
    gap_profile,
    mean_of,
    parse_env,
    sample,
    serialize_env,
    validate_separation,
)

SMALL = EnvSpec(
    K=2,
    T=100,
    noise="bernoulli",
    starts=(1, 40, 70),
    means=((0.5, 0.8, 0.2), (0.5, 0.1, 0.6), (0.4, 0.3, 0.9)),
)


class TestMeanOf:
    def test_boundary_round_uses_new_segment(self):
        env = builtin("global6")
        assert mean_of(env, 1, 1999) == 0.9
        assert mean_of(env, 1, 2000) == 0.06

    def test_single_segment_constant(self):
        env = EnvSpec(K=1, T=50, noise="bernoulli", starts=(1,), means=((0.3, 0.6),))
        assert {mean_of(env, 1, t) for t in range(1, 51)} == {0.6}

    def test_matches_linear_scan(self):
        def linear_scan(env, arm, t):
            value = None
            for start, row in zip(env.starts, env.means):
                if t >= start:
                    value = row[arm]
            return value

        rng = np.random.default_rng(2)
        for _ in range(200):
            arm = int(rng.integers(0, SMALL.K + 1))
            t = int(rng.integers(1, SMALL.T + 1))
            assert mean_of(SMALL, arm, t) == linear_scan(SMALL, arm, t)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            mean_of(SMALL, 3, 10)
        with pytest.raises(ValueError):
            mean_of(SMALL, 0, 0)
        with pytest.raises(ValueError):
            mean_of(SMALL, 0, 101)


class TestSample:
    def test_degenerate_means(self):
        env = EnvSpec(K=1, T=10, noise="bernoulli", starts=(1,), means=((0.0, 1.0),))
        for u in (0.0, 0.3, 0.999):
            assert sample(env, 0, 1, u) == 0.0
            assert sample(env, 1, 1, u) == 1.0

    def test_monte_carlo_mean(self):
        env = EnvSpec(K=1, T=10, noise="bernoulli", starts=(1,), means=((0.5, 0.2),))
        uniforms = np.random.Generator(np.random.Philox(key=4)).random(100_000)
        draws = [sample(env, 0, 1, u) for u in uniforms]
        assert np.mean(draws) == pytest.approx(0.5, abs=0.01)

    def test_gaussian_clipped_and_deterministic(self):
        env = EnvSpec(
            K=1, T=10, noise="gaussian", sigma=0.4, starts=(1,), means=((0.5, 0.2),)
        )
        values = [sample(env, 0, 1, u) for u in (0.0, 0.001, 0.5, 0.999, 0.42)]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert sample(env, 0, 1, 0.42) == sample(env, 0, 1, 0.42)
        assert sample(env, 0, 1, 0.5) == pytest.approx(0.5, abs=1e-9)


class TestBuiltins:
    def test_global6_structure(self):
        env = builtin("global6")
        assert env.T == 8000 and env.K == 5
        assert env.changepoints == (2000, 4000, 6000)
        assert env.is_global()

    def test_local6_structure(self):
        env = builtin("local6")
        assert env.T == 8000 and env.K == 5
        assert env.changepoints == (2000, 4000, 6000)
        assert not env.is_global()
        assert all(row[0] == 0.35 for row in env.means)

    def test_alpha4_structure(self):
        env = builtin("alpha4")
        assert env.T == 1500 and env.K == 3
        assert env.changepoints == (500, 1000, 1500)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown preset"):
            builtin("nope")

    def test_baseline_never_optimal_in_presets(self):
        for name in BUILTIN_NAMES:
            env = builtin(name)
            for row in env.means:
                assert max(row[1:]) > row[0]


class TestLoader:
    def test_round_trip_is_byte_identical_for_canonical_text(self):
        canonical = serialize_env(SMALL)
        assert serialize_env(parse_env(canonical)) == canonical

    def test_parse_serialize_idempotent_on_presets(self):
        for name in BUILTIN_NAMES:
            env = builtin(name)
            again = parse_env(serialize_env(env))
            assert again.starts == env.starts and again.means == env.means

    @pytest.mark.parametrize(
        "text,err",
        [
            ("K = 1\nT = 10\nnoise = bernoulli\nwat = 3\nsegment 1: 0.1 0.2\n", "unknown key"),
            ("K = 1\nK = 2\nT = 10\nnoise = bernoulli\nsegment 1: 0.1 0.2\n", "duplicate"),
            ("K = 1\nT = 10\nsegment 1: 0.1 0.2\n", "missing required"),
            ("K = 1\nT = 10\nnoise = bernoulli\nsegment 1: 0.1\n", "expected 2 means"),
            ("K = 1\nT = 10\nnoise = bernoulli\nsegment 1: 0.1 1.2\n", "lie in"),
            ("K = 1\nT = 10\nnoise = bernoulli\nsegment 2: 0.1 0.2\n", "start at round 1"),
            ("K = 1\nT = 10\nnoise = bernoulli\nsigma = 0.1\nsegment 1: 0.1 0.2\n", "only valid"),
            ("K = 1\nT = 10\nnoise = gaussian\nsegment 1: 0.1 0.2\n", "requires sigma"),
            ("K = 1\nT = 10\nnoise = bernoulli\ngibberish\nsegment 1: 0.1 0.2\n", "unparseable"),
            (
                "K = 1\nT = 10\nnoise = bernoulli\nsegment 1: 0.1 0.2\nsegment 5: 0.1 0.2\n",
                "changes no arm",
            ),
        ],
    )
    def test_strict_parsing(self, text, err):
        with pytest.raises(ValueError, match=err):
            parse_env(text)


class TestGapProfile:
    def test_matches_brute_force(self):
        profile = gap_profile(SMALL)
        for g, row in enumerate(SMALL.means):
            best = max(row)
            for i, mu in enumerate(row):
                assert profile.opt[g, i] == pytest.approx(best - mu)
            assert profile.opt_max[g] == pytest.approx(best - min(row))
            assert profile.mu0[g] == row[0]
        for b in range(1, len(SMALL.means)):
            for i in range(SMALL.K + 1):
                expected = abs(SMALL.means[b][i] - SMALL.means[b - 1][i])
                assert profile.chg[b - 1, i] == pytest.approx(expected)
        assert profile.mu0_min == pytest.approx(0.4)
        assert profile.arm_changes == (1, 2, 2)

    def test_optimal_arm_gap_is_zero(self):
        profile = gap_profile(SMALL)
        assert profile.opt[0, 1] == 0.0


class TestValidateSeparation:
    def test_single_segment_vacuous(self):
        env = EnvSpec(K=1, T=50, noise="bernoulli", starts=(1,), means=((0.3, 0.6),))
        assert validate_separation(env, 0.05, 0.1) == []

    def test_global6_fails_as_expected(self):
        env = builtin("global6")
        reports = validate_separation(env, 1.0 / env.T, 0.05, mode="global")
        assert len(reports) == 3
        assert all(not rep.satisfied for rep in reports)
        assert all(rep.delay > 2000 for rep in reports)

    def test_constructed_instance_satisfies(self):
        env = EnvSpec(
            K=1,
            T=10_000,
            noise="bernoulli",
            starts=(1, 5000),
            means=((0.2, 0.95), (0.8, 0.05)),
        )
        reports = validate_separation(env, 0.05, 1.0, mode="global")
        assert len(reports) == 1
        assert reports[0].satisfied

    def test_local_mode_handles_unchanged_baseline(self):
        env = builtin("local6")
        reports = validate_separation(env, 0.05, 0.05, mode="local")
        # the baseline never moves, so local delays are infinite: advisory fail
        assert all(not rep.satisfied for rep in reports)
