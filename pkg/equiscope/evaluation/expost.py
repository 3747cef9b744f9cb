"""Ex-post best-response check through induced MDPs.

With one type per player, fixing every opponent's strategy turns the game
into an MDP for the remaining player. Policy iteration started from the
player's own strategy finds the best deviation; the value gained at the
root is that player's epsilon.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..core.game import GameSpec
from ..core.strategy import StrategyProfile
from ..errors import UnsupportedGameError
from ..solvers.values import solve_linear_system
from .persistent import EpsilonReport, PlayerEpsilon

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MDP:
    """A finite MDP whose terminal rewards are folded into ``rewards``.

    Attributes:
        transitions: Shape (S, A, S); rows may sum to less than 1, the
            rest of the mass terminates.
        rewards: Shape (S, A); expected terminal reward of each action.
        action_mask: Shape (S, A); False for padding actions.
    """

    transitions: np.ndarray = field(repr=False)
    rewards: np.ndarray = field(repr=False)
    action_mask: np.ndarray = field(repr=False)

    @property
    def num_states(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.rewards.shape[1])


@dataclass(frozen=True, eq=False)
class PolicyIterationResult:
    """Outcome of policy iteration."""

    policy: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    iterations: int = 0


def evaluate_policy(mdp: MDP, policy: np.ndarray) -> np.ndarray:
    """Solve ``v = r_pi + P_pi v`` for a (possibly mixed) policy."""
    policy = np.asarray(policy, dtype=np.float64)
    transition = np.einsum("sa,sat->st", policy, mdp.transitions)
    reward = np.sum(policy * mdp.rewards, axis=1)
    return solve_linear_system(np.eye(mdp.num_states) - transition, reward)


def mdp_policy_iteration(
    mdp: MDP, initial_policy: np.ndarray, max_iterations: int = 10_000
) -> PolicyIterationResult:
    """Optimal policy by policy iteration.

    Improvement keeps the current choice at a state whenever every action in
    its support is greedy (within a relative tolerance); otherwise it moves
    to the lowest-index greedy action. The loop stops when no state changes.

    Args:
        mdp: A terminating MDP.
        initial_policy: Shape (S, A); rows may be mixed.
        max_iterations: Safety cap on improvement steps.

    Returns:
        The optimal deterministic-or-kept policy, its values and the number of
        evaluation steps.
    """
    policy = np.asarray(initial_policy, dtype=np.float64).copy()
    for iteration in range(1, max_iterations + 1):
        values = evaluate_policy(mdp, policy)
        q = mdp.rewards + mdp.transitions @ values
        q = np.where(mdp.action_mask, q, -np.inf)
        best = q.max(axis=1, keepdims=True)
        greedy = q >= best - TIE_TOLERANCE * (1.0 + np.abs(best))

        improved = policy.copy()
        for state in range(mdp.num_states):
            support = policy[state] > 0
            if np.all(greedy[state][support]):
                continue
            improved[state] = 0.0
            improved[state, int(np.argmax(greedy[state]))] = 1.0

        if np.array_equal(improved, policy):
            return PolicyIterationResult(policy, values, iteration)
        policy = improved
    raise RuntimeError(f"Policy iteration did not stop within {max_iterations} steps")


def build_player_mdp(
    spec: GameSpec, profile: StrategyProfile, player: int
) -> tuple[MDP, np.ndarray]:
    """MDP faced by ``player`` when everyone else follows ``profile``.

    Returns:
        The MDP over nonterminal states and the player's own profile
        strategy as an initial policy.
    """
    k = spec.num_states
    width = max(spec.action_counts(s)[player] for s in range(k))
    transitions = np.zeros((k, width, k))
    rewards = np.zeros((k, width))
    mask = np.zeros((k, width), dtype=bool)
    policy = np.zeros((k, width))
    payoffs = spec.terminal_payoffs[:, player, 0]
    for state in range(k):
        flow = spec.deviation_flow(state, player, profile.at(state))[0]
        m = flow.shape[0]
        transitions[state, :m] = flow[:, :k]
        rewards[state, :m] = flow[:, k:] @ payoffs
        mask[state, :m] = True
        policy[state, :m] = profile.at(state)[player][0]
    return MDP(transitions, rewards, mask), policy


def ex_post_check(spec: GameSpec, profile: StrategyProfile) -> EpsilonReport:
    """Per-player improvement available against ``profile``.

    Raises:
        UnsupportedGameError: If any player has more than one type.
    """
    if any(t != 1 for t in spec.type_counts):
        raise UnsupportedGameError(
            "The ex-post check needs one type per player; use the persistent "
            "evaluator for games with private types"
        )
    rows = []
    for player, name in enumerate(spec.players):
        mdp, initial = build_player_mdp(spec, profile, player)
        current = evaluate_policy(mdp, initial)[spec.root]
        result = mdp_policy_iteration(mdp, initial)
        optimal = float(result.values[spec.root])
        logger.debug(
            "%s: profile value %.6f, best response %.6f after %d steps",
            name,
            current,
            optimal,
            result.iterations,
        )
        rows.append(
            PlayerEpsilon(
                player=name,
                profile_value=float(current),
                optimal_value=optimal,
                profile_type_values=(float(current),),
                optimal_type_values=(optimal,),
            )
        )
    report = EpsilonReport(method="expost", players=tuple(rows))
    logger.info("Ex-post epsilon %.4f", report.epsilon)
    return report
