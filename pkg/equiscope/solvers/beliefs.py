"""Bayesian propagation of joint type beliefs through the state DAG."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core.beliefs import JointTypeBelief
from ..core.game import GameSpec
from ..core.strategy import StrategyProfile
from ..errors import StaleReadError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReachMass:
    """Unnormalized joint mass of (types = t and state reached).

    Attributes:
        mass: Array of shape (K, J) over nonterminal states.
        terminal: Array of shape (T, J) absorbed by terminal states.
    """

    mass: np.ndarray = field(repr=False)
    terminal: np.ndarray = field(repr=False)

    @property
    def total(self) -> np.ndarray:
        """Reach probability of every nonterminal state."""
        return self.mass.sum(axis=1)


@dataclass(frozen=True, eq=False)
class BeliefPropagation:
    """Beliefs at every state together with the reach mass behind them.

    Attributes:
        reach: Reach mass per state.
        beliefs: Array of shape (K, J); row ``s`` is the belief at state ``s``
            (NaN where it was not computed).
        zero_reach: True where the state has no reach and the prior was used.
    """

    reach: ReachMass
    beliefs: np.ndarray = field(repr=False)
    zero_reach: np.ndarray = field(repr=False)

    def belief(self, state: int, type_counts: Sequence[int]) -> JointTypeBelief:
        return JointTypeBelief(tuple(type_counts), self.beliefs[state])


class ReachAccumulator:
    """Incremental forward pass over the DAG.

    States are pushed in topological order. Reading a state's belief before
    every predecessor was pushed raises :class:`StaleReadError` when
    ``strict`` is set, which is how sequential solvers prove they only use
    strategies already updated in the current pass.
    """

    def __init__(self, spec: GameSpec, strict: bool = True) -> None:
        self._spec = spec
        self._strict = strict
        num_types = spec.num_type_profiles
        self._mass = np.zeros((spec.num_states, num_types))
        self._mass[spec.root] = spec.prior.mass
        self._terminal = np.zeros((spec.num_terminals, num_types))
        self._pushed = np.zeros(spec.num_states, dtype=bool)
        self._pending = {
            s: set(spec.graph.predecessors(s)) for s in range(spec.num_states)
        }
        self._beliefs = np.full((spec.num_states, num_types), np.nan)
        self._zero_reach = np.zeros(spec.num_states, dtype=bool)

    def belief(self, state: int) -> JointTypeBelief:
        """Belief at ``state`` given everything pushed so far.

        Raises:
            StaleReadError: In strict mode, if a predecessor is not pushed.
        """
        pending = self._pending[state]
        if self._strict and pending:
            names = sorted(self._spec.states[p] for p in pending)
            raise StaleReadError(
                f"Belief at {self._spec.states[state]} read before predecessors "
                f"{names} were updated"
            )
        weights = self._mass[state]
        total = float(weights.sum())
        if total <= 0.0:
            if not self._zero_reach[state]:
                logger.debug(
                    "State %s has zero reach; using the prior", self._spec.states[state]
                )
            self._zero_reach[state] = True
            belief = self._spec.prior
        else:
            self._zero_reach[state] = False
            belief = JointTypeBelief(self._spec.type_counts, weights / total)
        self._beliefs[state] = belief.mass
        return belief

    def push(self, state: int, strategies: Sequence[np.ndarray]) -> None:
        """Send ``state``'s reach mass to its successors under ``strategies``."""
        if self._pushed[state]:
            raise ValueError(f"State {self._spec.states[state]} was already pushed")
        flow = self._spec.flow(state, strategies)
        contribution = self._mass[state][:, np.newaxis] * flow
        k = self._spec.num_states
        self._mass += contribution[:, :k].T
        self._terminal += contribution[:, k:].T
        self._pushed[state] = True
        for successor in self._spec.graph.successors(state):
            self._pending[successor].discard(state)

    def frontier_mass(self) -> float:
        """Mass absorbed by terminals plus mass waiting at unpushed states."""
        waiting = self._mass[~self._pushed].sum()
        return float(self._terminal.sum() + waiting)

    def result(self) -> BeliefPropagation:
        return BeliefPropagation(
            reach=ReachMass(self._mass.copy(), self._terminal.copy()),
            beliefs=self._beliefs.copy(),
            zero_reach=self._zero_reach.copy(),
        )


def propagate(
    spec: GameSpec,
    profile: StrategyProfile,
    up_to_state: int | None = None,
) -> BeliefPropagation:
    """Propagate the prior through the DAG under ``profile``.

    ``w_root = prior`` and ``w_s(t) = sum_p w_p(t) P(p -> s | t, profile)``;
    the belief at ``s`` is ``w_s`` normalized, or the prior when ``s`` has
    no reach.

    Args:
        spec: The game.
        profile: Strategies at (at least) every state before ``up_to_state``.
        up_to_state: Stop after computing this state's belief; None covers
            every state.

    Returns:
        The BeliefPropagation; rows after ``up_to_state`` are NaN.
    """
    accumulator = ReachAccumulator(spec)
    for state in spec.topological_order:
        accumulator.belief(state)
        if state == up_to_state:
            break
        accumulator.push(state, profile.at(state))
    return accumulator.result()


def stale_beliefs(
    spec: GameSpec, previous_profile: StrategyProfile | None
) -> BeliefPropagation:
    """Beliefs consistent with the previous iteration's full profile.

    With no previous profile every state gets the prior.
    """
    if previous_profile is not None:
        return propagate(spec, previous_profile)
    result = propagate(spec, StrategyProfile.uniform(spec))
    beliefs = np.tile(spec.prior.mass, (spec.num_states, 1))
    return BeliefPropagation(result.reach, beliefs, result.zero_reach)
