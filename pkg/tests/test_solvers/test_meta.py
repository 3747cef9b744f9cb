"""Tests for the outer-loop solvers."""

import logging
import os
import time

import numpy as np
import pytest
from pydantic import ValidationError

from equiscope.core import StrategyProfile, ValueMode, ValueTable
from equiscope.errors import ParameterError, UnsupportedGameError
from equiscope.evaluation import epsilon_persistent
from equiscope.scenarios import SizeProfile, build_game, generate_synthetic
from equiscope.solvers import (
    ALGORITHMS,
    SolverConfig,
    SolverRegistry,
    solve,
    solve_parallel_stale,
    solve_st_pifp,
)

from ..toy_games import chain_game, random_dag_game


logger = logging.getLogger(__name__)


def _config(**overrides) -> SolverConfig:
    fields = dict(fp_iterations=50, outer_iterations=3)
    fields.update(overrides)
    return SolverConfig(**fields)


def _assert_same_profile(a, b):
    for stage_a, stage_b in zip(a.dist, b.dist):
        for x, y in zip(stage_a, stage_b):
            assert np.array_equal(x, y)


class TestSolverConfig:
    """Tests for SolverConfig."""

    def test_defaults(self):
        """Defaults match the reference settings."""
        config = SolverConfig()

        assert config.algorithm == "st-pifp"
        assert config.fp_iterations == 10_000
        assert config.outer_iterations == 25
        assert config.epsilon_prune == 0.01

    def test_rejects_bad_values(self):
        """Counts must be positive and algorithms known."""
        with pytest.raises(ValidationError):
            SolverConfig(fp_iterations=0)
        with pytest.raises(ValidationError):
            SolverConfig(algorithm="gradient-descent")
        with pytest.raises(ValidationError):
            SolverConfig(unknown=1)

    def test_every_algorithm_registered(self):
        """Each algorithm name maps to a solver class."""
        assert SolverRegistry.names() == sorted(ALGORITHMS)


class TestSequentialSolver:
    """Tests for st-pifp and st-pifp-tdv."""

    def test_chain_reaches_optimum(self):
        """Values propagate back one state per iteration, then play settles."""
        spec = chain_game()
        result = solve(spec, _config(fp_iterations=10, outer_iterations=25, early_stop_delta=1e-9))

        assert result.stopped_early
        assert len(result.trace) == 4
        assert result.values.values[0].tolist() == [7.5, 7.5, 7.5]
        for state in range(3):
            assert result.profile.get(state, 0, 0).tolist() == [1.0, 0.0]

    def test_trace_rows(self):
        """One trace row per outer iteration."""
        spec = random_dag_game(0)
        result = solve(spec, _config())

        assert [row.outer_iteration for row in result.trace.rows] == [1, 2, 3]
        assert all(row.epsilon is None for row in result.trace.rows)
        assert result.profile.violations(spec) == []

    def test_unpacking(self):
        """Results unpack into profile, values and trace."""
        spec = random_dag_game(1)
        profile, values, trace = solve(spec, _config(outer_iterations=1))

        assert values.mode is ValueMode.STATE
        assert len(trace) == 1
        assert profile.num_states == spec.num_states

    def test_checkpoint_hook(self):
        """The hook sees every completed iteration."""
        spec = random_dag_game(2)
        seen = []
        solve(spec, _config(), on_checkpoint=lambda c: seen.append(c.iteration))
        assert seen == [1, 2, 3]

    def test_resume_is_bit_identical(self):
        """Resuming after a checkpoint reproduces the uninterrupted run."""
        spec = random_dag_game(3, num_states=5)
        checkpoints = []
        full = solve(spec, _config(), on_checkpoint=checkpoints.append)
        resumed = solve(spec, _config(), resume=checkpoints[0])

        _assert_same_profile(full.profile, resumed.profile)
        assert np.array_equal(full.values.values, resumed.values.values)
        assert [r.max_strategy_delta for r in full.trace.rows] == [
            r.max_strategy_delta for r in resumed.trace.rows
        ]

    def test_tdv_matches_state_values_with_one_type(self):
        """With a single joint type both value modes give the same play."""
        spec = random_dag_game(4, type_counts=(1, 1), max_actions=3)
        plain = solve(spec, _config(algorithm="st-pifp"))
        typed = solve(spec, _config(algorithm="st-pifp-tdv"))

        _assert_same_profile(plain.profile, typed.profile)
        assert typed.values.mode is ValueMode.TYPE_DEPENDENT
        assert np.allclose(plain.values.values, typed.values.values[..., 0])

    def test_tdv_table_shape(self):
        """Type-dependent runs keep one value per joint type."""
        spec = random_dag_game(5, type_counts=(2, 2))
        result = solve(spec, _config(algorithm="st-pifp-tdv", outer_iterations=1))
        assert result.values.values.shape == (2, spec.num_states, 4)

    def test_random_initial_values_are_seeded(self):
        """The same value seed gives the same run."""
        spec = random_dag_game(6)
        first = solve(spec, _config(value_init="random", value_seed=3, outer_iterations=1))
        second = solve(spec, _config(value_init="random", value_seed=3, outer_iterations=1))
        _assert_same_profile(first.profile, second.profile)

    def test_custom_values_required(self):
        """value_init='custom' needs a table."""
        spec = random_dag_game(7)
        with pytest.raises(ParameterError):
            solve(spec, _config(value_init="custom"))

    def test_custom_values_used(self):
        """A caller table warm-starts the run."""
        spec = chain_game()
        warm = ValueTable(ValueMode.STATE, np.array([[0.0, 7.5, 7.5], [0.0, 0.0, 0.0]]))
        result = solve(spec, _config(value_init="custom", outer_iterations=1), initial_values=warm)
        assert result.profile.get(0, 0, 0).tolist() == [1.0, 0.0]

    def test_epsilon_trace(self):
        """Epsilon is traced every k iterations."""
        spec = chain_game()
        result = solve(spec, _config(outer_iterations=4, epsilon_every=2, epsilon_prune=0.0))
        epsilons = [row.epsilon for row in result.trace.rows]

        assert epsilons[0] is None and epsilons[2] is None
        assert epsilons[1] is not None
        assert epsilons[3] == pytest.approx(0.0)


class TestParallelSolvers:
    """Tests for parallel-pifp-ii and parallel-pifp."""

    @pytest.mark.parametrize("workers", [2, 8])
    def test_workers_do_not_change_results(self, workers):
        """One worker and a process pool give bit-identical runs."""
        spec = random_dag_game(8, num_states=6)
        single = solve(spec, _config(algorithm="parallel-pifp-ii", workers=1))
        pooled = solve(spec, _config(algorithm="parallel-pifp-ii", workers=workers))

        _assert_same_profile(single.profile, pooled.profile)
        assert np.array_equal(single.values.values, pooled.values.values)
        assert np.array_equal(single.beliefs, pooled.beliefs)

    def test_single_iteration(self):
        """One iteration under prior beliefs gives a valid profile."""
        spec = random_dag_game(9)
        result = solve(spec, _config(algorithm="parallel-pifp-ii", outer_iterations=1))
        assert result.profile.violations(spec) == []

    def test_perfect_information_rejects_types(self):
        """parallel-pifp needs one type per player."""
        spec = random_dag_game(10, type_counts=(2, 1))
        with pytest.raises(UnsupportedGameError, match="one type per player"):
            solve(spec, _config(algorithm="parallel-pifp"))

    def test_perfect_information_matches_stale(self):
        """On one-type games parallel-pifp is parallel-pifp-ii."""
        spec = random_dag_game(11, type_counts=(1, 1))
        stale = solve(spec, _config(algorithm="parallel-pifp-ii"))
        perfect = solve(spec, _config(algorithm="parallel-pifp"))
        _assert_same_profile(stale.profile, perfect.profile)

    def test_convenience_entry_points(self):
        """Named entry points override the configured algorithm."""
        spec = random_dag_game(12)
        config = _config(algorithm="parallel-pifp-ii")

        _assert_same_profile(
            solve_st_pifp(spec, config).profile,
            solve(spec, _config(algorithm="st-pifp")).profile,
        )
        _assert_same_profile(
            solve_parallel_stale(spec, _config()).profile,
            solve(spec, config).profile,
        )


@pytest.mark.slow
class TestHostilityTrend:
    """Solving a small Hostility Game improves on uniform play."""

    @pytest.mark.parametrize("algorithm", ["st-pifp", "parallel-pifp-ii"])
    def test_epsilon_below_uniform(self, algorithm):
        """Solved profiles are closer to equilibrium than uniform play."""
        params = generate_synthetic(
            0, SizeProfile(num_red=1, action_counts=[3, 3], kinetic_threshold=6)
        )
        spec = build_game(params)
        result = solve(spec, SolverConfig(algorithm=algorithm, fp_iterations=2000, outer_iterations=10))

        solved = epsilon_persistent(spec, result.profile, prune_threshold=0.0, belief_model="joint")
        uniform = epsilon_persistent(
            spec, StrategyProfile.uniform(spec), prune_threshold=0.0, belief_model="joint"
        )
        assert solved.epsilon < uniform.epsilon


@pytest.mark.slow
class TestTypeDependentTrend:
    """Type-dependent values against state values on a K=50 Hostility Game."""

    def test_type_dependent_values_close_the_gap(self):
        """st-pifp-tdv ends no worse than st-pifp and both land within 10% of the smallest payoff."""
        params = generate_synthetic(
            0, SizeProfile(num_red=1, action_counts=[3, 3], kinetic_threshold=50, num_types=2)
        )
        spec = build_game(params)
        config = SolverConfig(fp_iterations=1000, outer_iterations=10)
        bound = 0.1 * min(abs(params.win_payoff), abs(params.kinetic_payoff))

        epsilons = {}
        for algorithm in ("st-pifp", "st-pifp-tdv", "parallel-pifp-ii"):
            result = solve(spec, config.model_copy(update={"algorithm": algorithm}))
            epsilons[algorithm] = epsilon_persistent(spec, result.profile).epsilon
        logger.info(
            "K=50 epsilons: st-pifp %.4f, st-pifp-tdv %.4f, parallel-pifp-ii %.4f",
            epsilons["st-pifp"],
            epsilons["st-pifp-tdv"],
            epsilons["parallel-pifp-ii"],
        )

        assert epsilons["st-pifp-tdv"] <= epsilons["st-pifp"]
        assert epsilons["st-pifp"] <= bound
        assert epsilons["st-pifp-tdv"] <= bound


@pytest.mark.slow
@pytest.mark.skipif((os.cpu_count() or 1) < 2, reason="needs at least two cores")
class TestParallelSpeedup:
    """Wall-clock gain of the process pool."""

    def test_two_workers_are_faster(self):
        """Two workers finish at least 1.3 times sooner than one."""
        params = generate_synthetic(
            1, SizeProfile(num_red=2, action_counts=[4, 4, 4], kinetic_threshold=30)
        )
        spec = build_game(params)
        config = SolverConfig(algorithm="parallel-pifp-ii", fp_iterations=2000, outer_iterations=2)

        timings = {}
        for workers in (1, 2):
            started = time.perf_counter()
            solve(spec, config.model_copy(update={"workers": workers}))
            timings[workers] = time.perf_counter() - started
        logger.info("parallel-pifp-ii: %.2fs with one worker, %.2fs with two", timings[1], timings[2])

        assert timings[1] / timings[2] >= 1.3
