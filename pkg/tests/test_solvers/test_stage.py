"""Tests for stage games and fictitious play."""

import numpy as np
import pytest

from equiscope.core import GameSpec, JointTypeBelief, StateKernel, ValueMode, ValueTable, check_game
from equiscope.errors import MissingValueError, ParameterError
from equiscope.solvers import StageGame, build_stage, fictitious_play, stage_epsilon

from ..toy_games import chain_game

PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])
RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])


def _zero_sum(payoffs: np.ndarray) -> StageGame:
    return StageGame.normal_form([payoffs, -payoffs])


def _type_matching_game() -> GameSpec:
    """Player a's type t is paid only for action t; b has one action."""
    kernel = StateKernel((2, 1), np.array([[[1]], [[2]]]), np.ones((2, 2, 1, 1)))
    payoffs = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]]])
    spec = GameSpec(
        players=("a", "b"),
        type_counts=(2, 1),
        prior=JointTypeBelief((2, 1), [0.3, 0.7]),
        states=("stage",),
        terminals=("left", "right"),
        kernels=(kernel,),
        terminal_payoffs=payoffs,
        topological_order=(0,),
    )
    return check_game(spec)


class TestFictitiousPlay:
    """Tests for fictitious_play()."""

    def test_matching_pennies(self):
        """Average strategies approach the uniform equilibrium."""
        strategy = fictitious_play(_zero_sum(PENNIES), 10_000)

        for player in range(2):
            assert np.max(np.abs(strategy[player][0] - 0.5)) <= 0.01

    def test_rock_paper_scissors(self):
        """Average strategies approach one third each."""
        strategy = fictitious_play(_zero_sum(RPS), 10_000)

        for player in range(2):
            assert np.max(np.abs(strategy[player][0] - 1 / 3)) <= 0.02
        assert stage_epsilon(_zero_sum(RPS), strategy) < 0.05

    def test_epsilon_shrinks_with_iterations(self):
        """Epsilon after 10^2, 10^3 and 10^4 iterations never goes up."""
        stage = _zero_sum(PENNIES)
        epsilons = [stage_epsilon(stage, fictitious_play(stage, n)) for n in (100, 1_000, 10_000)]

        assert epsilons[1] <= epsilons[0] + 1e-12
        assert epsilons[2] <= epsilons[1] + 1e-12

    def test_dominant_strategy(self):
        """A strictly dominant action is played from the first iteration."""
        dilemma_row = np.array([[3.0, 0.0], [5.0, 1.0]])
        stage = StageGame.normal_form([dilemma_row, dilemma_row.T])
        strategy = fictitious_play(stage, 50)

        assert strategy[0].tolist() == [[0.0, 1.0]]
        assert strategy[1].tolist() == [[0.0, 1.0]]

    def test_ties_go_to_lowest_action(self):
        """With all payoffs equal every agent keeps playing action 0."""
        stage = StageGame.normal_form([np.zeros((3, 2)), np.zeros((3, 2))])
        strategy = fictitious_play(stage, 10)

        assert strategy[0].tolist() == [[1.0, 0.0, 0.0]]
        assert strategy[1].tolist() == [[1.0, 0.0]]

    def test_rows_are_distributions(self):
        """Averages are probability vectors."""
        strategy = fictitious_play(_zero_sum(RPS), 37)
        for array in strategy:
            assert np.allclose(array.sum(axis=1), 1.0)
            assert np.all(array >= 0)

    def test_needs_one_iteration(self):
        """Zero iterations is a parameter error."""
        with pytest.raises(ParameterError):
            fictitious_play(_zero_sum(PENNIES), 0)

    def test_per_type_agents(self):
        """Each type of a player best-responds on its own."""
        spec = _type_matching_game()
        stage = build_stage(spec, 0, ValueTable.zeros(spec), spec.prior)
        strategy = fictitious_play(stage, 20)

        assert strategy[0].tolist() == [[1.0, 0.0], [0.0, 1.0]]
        assert stage_epsilon(stage, strategy) == 0.0


class TestStageEpsilon:
    """Tests for stage_epsilon()."""

    def test_known_gain(self):
        """Column gains 0.2 against a 0.6/0.4 row mix in matching pennies."""
        strategy = (np.array([[0.6, 0.4]]), np.array([[0.5, 0.5]]))
        assert stage_epsilon(_zero_sum(PENNIES), strategy) == pytest.approx(0.2)

    def test_equilibrium(self):
        """The uniform mix is an exact equilibrium of matching pennies."""
        strategy = (np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]]))
        assert stage_epsilon(_zero_sum(PENNIES), strategy) == pytest.approx(0.0)


class TestBuildStage:
    """Tests for build_stage()."""

    def test_terminal_payoffs(self):
        """Moves into terminals pay the terminal payoff."""
        spec = chain_game()
        stage = build_stage(spec, 2, ValueTable.zeros(spec), spec.prior)

        assert stage.payoffs.shape == (2, 1, 2, 1)
        assert stage.payoff((0, 0)).tolist() == [7.5, 0.0]
        assert stage.payoff((1, 0)).tolist() == [4.0, 0.0]

    def test_continuation_values(self):
        """Moves into nonterminal states pay the successor's value."""
        spec = chain_game()
        values = ValueTable(ValueMode.STATE, np.array([[0.0, 7.5, 7.5], [0.0, 0.0, 0.0]]))
        stage = build_stage(spec, 0, values, spec.prior)

        assert stage.payoff((0, 0))[0] == 7.5
        assert stage.payoff((1, 0))[0] == 5.0

    def test_type_dependent_values(self):
        """Type-dependent tables feed one value per joint type."""
        spec = chain_game()
        values = ValueTable(ValueMode.TYPE_DEPENDENT, np.full((2, 3, 1), 2.0))
        stage = build_stage(spec, 1, values, spec.prior)
        assert stage.payoff((0, 0))[0] == 2.0

    def test_missing_successor_value(self):
        """A NaN successor value names the successor."""
        spec = chain_game()
        values = ValueTable(ValueMode.STATE, np.array([[0.0, np.nan, 0.0], [0.0, 0.0, 0.0]]))

        with pytest.raises(MissingValueError, match="s1"):
            build_stage(spec, 0, values, spec.prior)

    def test_value_table_wrong_size(self):
        """Tables must cover every state."""
        spec = chain_game()
        with pytest.raises(MissingValueError, match="covers 2 states"):
            build_stage(spec, 0, ValueTable(ValueMode.STATE, np.zeros((2, 2))), spec.prior)
