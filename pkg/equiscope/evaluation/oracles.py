"""Brute-force best response for small games.

Enumerates every deterministic history-dependent policy of one player
against a fixed profile and keeps the best. It shares nothing with
:mod:`equiscope.evaluation.persistent` beyond the game model, so the two
can be checked against each other on games small enough to enumerate.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from ..core.game import GameSpec
from ..core.strategy import StrategyProfile
from ..errors import BudgetExceededError, NoAttainableOutcomeError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_MAX_POLICIES = 10_000

History = tuple[int, ...]
Policy = dict[History, int]


@dataclass
class HistoryNode:
    """One observed history of the deviating player.

    Attributes:
        history: Visited states interleaved with own actions, ending at the
            current state.
        terminal_value: Per own action, weighted terminal payoff.
        terminal_mass: Per own action, probability of ending here.
        children: Per own action, (probability, child) pairs.
        defined: Whether any action reaches an outcome.
    """

    history: History
    terminal_value: list[float]
    terminal_mass: list[float]
    children: list[list[tuple[float, "HistoryNode"]]] = field(default_factory=list)
    defined: bool = False

    @property
    def num_actions(self) -> int:
        return len(self.terminal_value)

    def action_defined(self, action: int) -> bool:
        return self.terminal_mass[action] > 0 or any(
            child.defined for _, child in self.children[action]
        )


def _joint_index(spec: GameSpec, player: int, own_type: int, others: tuple[int, ...]) -> int:
    types = others[:player] + (own_type,) + others[player:]
    return int(np.ravel_multi_index(types, spec.type_counts))


def _build_tree(
    spec: GameSpec,
    profile: StrategyProfile,
    player: int,
    own_type: int,
    history: History,
    horizon: int,
    weights: dict[tuple[int, ...], float],
) -> HistoryNode:
    state = history[-1]
    kernel = spec.kernels[state]
    counts = kernel.action_counts
    strategies = profile.at(state)
    opponents = [k for k in range(spec.num_players) if k != player]
    k_states = spec.num_states

    node = HistoryNode(history, [], [])
    for action in range(counts[player]):
        value = 0.0
        terminal = 0.0
        reached: dict[int, dict[tuple[int, ...], float]] = {}
        for others, weight in weights.items():
            if weight <= 0:
                continue
            j = _joint_index(spec, player, own_type, others)
            for opponent_actions in itertools.product(*(range(counts[k]) for k in opponents)):
                p_actions = weight
                for k, a_k, t_k in zip(opponents, opponent_actions, others):
                    p_actions *= float(strategies[k][t_k, a_k])
                if p_actions == 0:
                    continue
                joint_action = opponent_actions[:player] + (action,) + opponent_actions[player:]
                for branch in range(kernel.num_branches):
                    p = p_actions * float(kernel.probs[(j,) + joint_action + (branch,)])
                    if p == 0:
                        continue
                    outcome = int(kernel.successors[joint_action + (branch,)])
                    if outcome >= k_states:
                        terminal += p
                        value += p * float(
                            spec.terminal_payoffs[outcome - k_states, player, j]
                        )
                    else:
                        posterior = reached.setdefault(outcome, {})
                        posterior[others] = posterior.get(others, 0.0) + p

        children = []
        if horizon >= 1:
            for outcome in sorted(reached):
                mass = sum(reached[outcome].values())
                child = _build_tree(
                    spec,
                    profile,
                    player,
                    own_type,
                    history + (action, outcome),
                    horizon - 1,
                    reached[outcome],
                )
                children.append((mass, child))
        node.terminal_value.append(value)
        node.terminal_mass.append(terminal)
        node.children.append(children)

    node.defined = any(node.action_defined(a) for a in range(node.num_actions))
    return node


def count_policies(node: HistoryNode) -> int:
    """Number of deterministic policies on the histories below ``node``."""
    return sum(
        math.prod(count_policies(child) for _, child in node.children[action])
        for action in range(node.num_actions)
    )


def enumerate_policies(node: HistoryNode) -> Iterator[Policy]:
    """Yield every deterministic policy as a history -> action mapping."""
    for action in range(node.num_actions):
        subtrees = [list(enumerate_policies(child)) for _, child in node.children[action]]
        for combination in itertools.product(*subtrees):
            policy: Policy = {node.history: action}
            for sub in combination:
                policy.update(sub)
            yield policy


def policy_value(node: HistoryNode, policy: Policy) -> Optional[float]:
    """Value of ``policy`` from ``node``; None when nothing is attainable."""
    if not node.defined:
        return None
    action = policy[node.history]
    if not node.action_defined(action):
        return -math.inf
    numerator = node.terminal_value[action]
    denominator = node.terminal_mass[action]
    for mass, child in node.children[action]:
        value = policy_value(child, policy)
        if value is None:
            continue
        numerator += mass * value
        denominator += mass
    return numerator / denominator


def brute_force_best_response(
    spec: GameSpec,
    profile: StrategyProfile,
    player: int,
    horizon: int,
    max_policies: int = DEFAULT_MAX_POLICIES,
) -> float:
    """Best deviation value of ``player`` by exhaustive policy enumeration.

    Beliefs over opponents' types are exact joint posteriors and nothing is
    pruned, so the result agrees with the persistent evaluator run with the
    ``joint`` belief model and a zero prune threshold.

    Args:
        spec: The game.
        profile: Profile followed by the opponents.
        player: Deviating player index.
        horizon: Allowed nonterminal transitions after the root.
        max_policies: Largest number of policies to enumerate.

    Returns:
        Prior-weighted best-response value.

    Raises:
        BudgetExceededError: If there are more than ``max_policies`` policies.
        NoAttainableOutcomeError: If some own type reaches no outcome.
    """
    if horizon < 0:
        raise ParameterError(f"Horizon must be nonnegative, got {horizon}")
    player = spec.player_index(player)
    prior = spec.prior.tensor()
    opponents = [k for k in range(spec.num_players) if k != player]
    marginal = spec.prior.marginal(player)

    trees: list[tuple[float, HistoryNode]] = []
    for own_type, weight in enumerate(marginal):
        if weight <= 0:
            continue
        weights = {}
        for others in itertools.product(*(range(spec.type_counts[k]) for k in opponents)):
            types = others[:player] + (own_type,) + others[player:]
            weights[others] = float(prior[types])
        tree = _build_tree(
            spec, profile, player, own_type, (spec.root,), horizon, weights
        )
        if not tree.defined:
            raise NoAttainableOutcomeError(
                f"No attainable outcome for {spec.players[player]} type {own_type} "
                f"within horizon {horizon}"
            )
        trees.append((float(weight), tree))

    count = sum(count_policies(tree) for _, tree in trees)
    if count > max_policies:
        raise BudgetExceededError(count, max_policies)
    logger.debug("Enumerating %d policies for %s", count, spec.players[player])

    total = 0.0
    for weight, tree in trees:
        best = max(policy_value(tree, policy) for policy in enumerate_policies(tree))
        total += weight * best
    return total
