"""Bayesian stage games and fictitious play."""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core.beliefs import JointTypeBelief, type_profiles
from ..core.game import GameSpec
from ..core.strategy import StageStrategy
from ..core.values import ValueTable
from ..errors import MissingValueError, ParameterError

logger = logging.getLogger(__name__)

# einsum axis letters for actions; "j" is the joint-type axis.
_ACTION_AXES = string.ascii_letters.replace("j", "")


@dataclass(frozen=True, eq=False)
class StageGame:
    """The one-shot Bayesian game played at a single state.

    Attributes:
        state: Index of the state the stage was built for (-1 if standalone).
        type_counts: Types per player.
        action_counts: Actions per player.
        payoffs: Array of shape (num_players, J, *action_counts).
        belief: Joint type belief the stage is solved under.
    """

    state: int
    type_counts: tuple[int, ...]
    action_counts: tuple[int, ...]
    payoffs: np.ndarray = field(repr=False)
    belief: JointTypeBelief = field(repr=False)

    @classmethod
    def normal_form(
        cls,
        payoffs: Sequence[np.ndarray],
        belief: JointTypeBelief | None = None,
    ) -> StageGame:
        """Wrap per-player payoff tensors of a complete-information game.

        Args:
            payoffs: One array of shape (*action_counts) per player.
            belief: Optional belief; defaults to a single type per player.

        Returns:
            A StageGame with one joint type vector.
        """
        tensors = np.stack([np.asarray(p, dtype=np.float64) for p in payoffs])
        type_counts = (1,) * len(payoffs)
        belief = belief or JointTypeBelief.uniform(type_counts)
        return cls(
            state=-1,
            type_counts=type_counts,
            action_counts=tuple(tensors.shape[1:]),
            payoffs=tensors[:, np.newaxis],
            belief=belief,
        )

    @property
    def num_players(self) -> int:
        return len(self.action_counts)

    def payoff(self, joint_action: Sequence[int], joint_type: int = 0) -> np.ndarray:
        """Per-player payoff of one joint action under one joint type vector."""
        return self.payoffs[(slice(None), joint_type) + tuple(joint_action)]


def build_stage(
    spec: GameSpec,
    state: int,
    values: ValueTable,
    belief: JointTypeBelief,
) -> StageGame:
    """Build the stage game at ``state`` from continuation values.

    The payoff of joint action ``a`` under joint types ``t`` is the terminal
    payoff mass plus the transition-weighted continuation values. State-value
    tables use ``v_i(G')``; type-dependent tables use ``v_i(G', t)``.

    Args:
        spec: The game.
        state: Nonterminal state index.
        values: Continuation values.
        belief: Joint type belief at ``state``.

    Returns:
        The StageGame.

    Raises:
        MissingValueError: If a successor value is absent or not finite.
    """
    if values.values.shape[1] != spec.num_states:
        raise MissingValueError(
            f"Value table covers {values.values.shape[1]} states, game has "
            f"{spec.num_states}; cannot build stage {spec.states[state]}"
        )
    kernel = spec.kernels[state]
    continuation = values.continuation(spec)
    gathered = continuation[:, kernel.successors, :]
    if not np.all(np.isfinite(gathered)):
        missing = sorted(
            {
                spec.outcome_name(int(kernel.successors[tuple(entry[1:-1])]))
                for entry in np.argwhere(~np.isfinite(gathered))
            }
        )
        raise MissingValueError(
            f"Stage {spec.states[state]} needs values for successor(s) {missing}"
        )
    gathered = np.moveaxis(gathered, -1, 1)
    payoffs = (gathered * kernel.probs[np.newaxis]).sum(axis=-1)
    return StageGame(
        state=state,
        type_counts=spec.type_counts,
        action_counts=kernel.action_counts,
        payoffs=payoffs,
        belief=belief,
    )


class _ExpectedPayoff:
    """Expected payoff of each (type, action) of one player.

    Contracts the player's payoff tensor against the opponents' per-type
    average strategies, then weights joint types by the belief conditioned
    on the player's own type.
    """

    def __init__(self, stage: StageGame, player: int) -> None:
        profiles = type_profiles(stage.type_counts)
        self._profiles = profiles
        self._player = player
        self._tensor = stage.payoffs[player]
        num_players = stage.num_players

        letters = _ACTION_AXES[:num_players]
        operands = ["j" + letters]
        self._opponents = [k for k in range(num_players) if k != player]
        for k in self._opponents:
            operands.append("j" + letters[k])
        self._subscripts = ",".join(operands) + "->j" + letters[player]
        dummies = [self._tensor] + [
            np.ones((len(profiles), stage.action_counts[k])) for k in self._opponents
        ]
        self._path = np.einsum_path(self._subscripts, *dummies, optimize="greedy")[0]

        weights = stage.belief.conditional_weights(player)
        own = profiles[:, player]
        indicator = own[np.newaxis, :] == np.arange(stage.type_counts[player])[:, None]
        self._weights = indicator * weights[np.newaxis, :]

    def __call__(self, strategies: Sequence[np.ndarray]) -> np.ndarray:
        """Return an array of shape (T_i, m_i)."""
        operands = [self._tensor] + [
            strategies[k][self._profiles[:, k]] for k in self._opponents
        ]
        per_type = np.einsum(self._subscripts, *operands, optimize=self._path)
        return self._weights @ per_type


def fictitious_play(stage: StageGame, iterations: int) -> StageStrategy:
    """Approximate a stage equilibrium with simultaneous fictitious play.

    Every (player, type) pair is a separate agent. In each iteration all
    agents best-respond to the opponents' current average strategies, with
    ties going to the lowest action index, and then every average is
    updated at once. Averages start uniform.

    Args:
        stage: The stage game.
        iterations: Number of fictitious play iterations (>= 1).

    Returns:
        Per player, the average strategy of shape (T_i, m_i).

    Raises:
        ParameterError: If ``iterations`` < 1.
        ValueError: If a player has no actions.
    """
    if iterations < 1:
        raise ParameterError(f"Fictitious play needs at least 1 iteration, got {iterations}")
    if any(m < 1 for m in stage.action_counts):
        raise ValueError(f"Stage {stage.state} has an empty action set: {stage.action_counts}")

    expected = [_ExpectedPayoff(stage, k) for k in range(stage.num_players)]
    counts = [np.zeros((t, m)) for t, m in zip(stage.type_counts, stage.action_counts)]
    average = [np.full((t, m), 1.0 / m) for t, m in zip(stage.type_counts, stage.action_counts)]
    rows = [np.arange(t) for t in stage.type_counts]

    for iteration in range(1, iterations + 1):
        responses = [np.argmax(payoff(average), axis=1) for payoff in expected]
        for k, response in enumerate(responses):
            counts[k][rows[k], response] += 1.0
            average[k] = counts[k] / iteration

    logger.debug("Stage %d: %d fictitious play iterations", stage.state, iterations)
    return tuple(average)


def stage_epsilon(stage: StageGame, strategy: Sequence[np.ndarray]) -> float:
    """Largest best-response gain of any (player, type) in the stage."""
    gain = 0.0
    for k in range(stage.num_players):
        payoff = _ExpectedPayoff(stage, k)(strategy)
        current = np.sum(payoff * strategy[k], axis=1)
        gain = max(gain, float(np.max(payoff.max(axis=1) - current)))
    return gain
