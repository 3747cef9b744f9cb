"""Best-response values under persistent private types.

A deviating player knows its own type and holds a belief over the opponents'
types. Opponents keep playing the profile, so the deviator faces a POMDP
whose belief is updated by Bayes' rule after every observed transition.
:class:`PersistentEvaluator` computes the finite-horizon value of that POMDP
recursively, and :func:`epsilon_persistent` grows the horizon until the
value settles.

Horizon ``t`` allows ``t`` further transitions into nonterminal states.
Payoffs are normalized by the outcome mass that was actually considered,
so a truncated horizon values an action by its attainable terminal
outcomes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..core.beliefs import product_belief
from ..core.game import GameSpec
from ..core.strategy import StrategyProfile
from ..errors import NoAttainableOutcomeError, ParameterError
from ..solvers.values import evaluate_strategies_tdv

logger = logging.getLogger(__name__)

BeliefModel = Literal["marginal", "joint"]
PrunedMass = Literal["renormalize", "penalize"]

QUANTUM = 1e-9


@dataclass(frozen=True, eq=False)
class BeliefStateKey:
    """Root of a best-response recursion.

    Attributes:
        player: Index of the deviating player.
        own_type: The deviator's type index.
        state: Nonterminal state index.
        horizon: Remaining nonterminal transitions (>= 0).
        opponent_belief: Joint distribution over the opponents' type
            vectors, in lexicographic order of the remaining players.
    """

    player: int
    own_type: int
    state: int
    horizon: int
    opponent_belief: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.horizon < 0:
            raise ParameterError(f"Horizon must be nonnegative, got {self.horizon}")
        belief = np.array(self.opponent_belief, dtype=np.float64).reshape(-1)
        if np.any(belief < 0) or abs(float(belief.sum()) - 1.0) > 1e-9:
            raise ParameterError("Opponent belief must be a probability vector")
        belief.setflags(write=False)
        object.__setattr__(self, "opponent_belief", belief)

    @classmethod
    def from_marginals(
        cls,
        player: int,
        own_type: int,
        state: int,
        horizon: int,
        marginals: Sequence[Sequence[float]],
    ) -> BeliefStateKey:
        """Key whose opponent belief is the product of per-opponent marginals."""
        joint = product_belief(marginals).mass if marginals else np.ones(1)
        return cls(player, own_type, state, horizon, joint)

    def marginals(self, opponent_type_counts: Sequence[int]) -> list[np.ndarray]:
        """Per-opponent marginals of the opponent belief."""
        tensor = self.opponent_belief.reshape(tuple(opponent_type_counts))
        axes = range(len(opponent_type_counts))
        return [
            tensor.sum(axis=tuple(a for a in axes if a != k)) for k in axes
        ]


class NodeValue(NamedTuple):
    """Value of a belief state with the pruning error bound behind it."""

    value: float
    pruned_bound: float


def bayes_update(belief: np.ndarray, likelihood: np.ndarray) -> np.ndarray:
    """Posterior proportional to ``belief * likelihood``.

    Raises:
        NoAttainableOutcomeError: If the observation has zero probability.
    """
    joint = np.asarray(belief) * np.asarray(likelihood)
    total = float(joint.sum())
    if total <= 0.0:
        raise NoAttainableOutcomeError("Observation has zero probability")
    return joint / total


class PersistentEvaluator:
    """Memoized best-response recursion for one strategy profile.

    Args:
        spec: The game.
        profile: Strategy profile the opponents follow.
        prune_threshold: Transitions whose probability is below this are
            ignored (0 disables pruning).
        belief_model: ``joint`` (the default) keeps the exact joint
            posterior over opponent types; ``marginal`` projects it onto
            independent marginals after every update, which is exact only
            with a single opponent.
        pruned_mass: ``renormalize`` drops pruned transitions from the
            normalizing mass; ``penalize`` keeps their mass and credits it
            with the player's worst terminal payoff.
    """

    def __init__(
        self,
        spec: GameSpec,
        profile: StrategyProfile,
        prune_threshold: float = 0.01,
        belief_model: BeliefModel = "joint",
        pruned_mass: PrunedMass = "renormalize",
    ) -> None:
        if prune_threshold < 0:
            raise ParameterError(f"Prune threshold must be >= 0, got {prune_threshold}")
        if belief_model not in ("marginal", "joint"):
            raise ParameterError(f"Unknown belief model {belief_model!r}")
        if pruned_mass not in ("renormalize", "penalize"):
            raise ParameterError(f"Unknown pruned-mass policy {pruned_mass!r}")
        self.spec = spec
        self.profile = profile
        self.prune_threshold = prune_threshold
        self.belief_model = belief_model
        self.pruned_mass = pruned_mass
        self._coefficients: dict[tuple[int, int], np.ndarray] = {}
        self._payoffs: dict[int, np.ndarray] = {}
        self._memo: dict[tuple, Optional[NodeValue]] = {}

    # ------------------------------------------------------------------
    # Precomputed tables
    # ------------------------------------------------------------------

    def opponent_type_counts(self, player: int) -> tuple[int, ...]:
        return tuple(t for k, t in enumerate(self.spec.type_counts) if k != player)

    def _split_own_type(self, table: np.ndarray, player: int) -> np.ndarray:
        """Reshape a leading joint-type axis into (own type, opponent vector)."""
        counts = self.spec.type_counts
        shaped = table.reshape(counts + table.shape[1:])
        shaped = np.moveaxis(shaped, player, 0)
        return shaped.reshape((counts[player], -1) + table.shape[1:])

    def coefficients(self, player: int, state: int) -> np.ndarray:
        """Outcome probabilities of each own action.

        Returns:
            Array of shape (T_i, J_-i, m_i, num_outcomes).
        """
        key = (player, state)
        if key not in self._coefficients:
            flow = self.spec.deviation_flow(state, player, self.profile.at(state))
            self._coefficients[key] = self._split_own_type(flow, player)
        return self._coefficients[key]

    def terminal_payoffs(self, player: int) -> np.ndarray:
        """Array of shape (T_i, J_-i, num_terminals)."""
        if player not in self._payoffs:
            table = self.spec.terminal_payoffs[:, player, :].T
            self._payoffs[player] = self._split_own_type(table, player)
        return self._payoffs[player]

    def initial_belief(self, player: int, own_type: int) -> np.ndarray:
        """Opponent belief at the root for a deviator of ``own_type``."""
        prior = self.spec.prior
        if self.belief_model == "marginal":
            others = [prior.marginal(k) for k in range(len(prior.type_counts)) if k != player]
            return product_belief(others).mass if others else np.ones(1)
        joint = self._split_own_type(prior.mass, player)[own_type]
        total = float(joint.sum())
        if total <= 0.0:
            return self._project(np.full(joint.shape, 1.0 / joint.size), player)
        return joint / total

    def _project(self, belief: np.ndarray, player: int) -> np.ndarray:
        counts = self.opponent_type_counts(player)
        if self.belief_model == "joint" or len(counts) <= 1:
            return belief
        tensor = belief.reshape(counts)
        axes = range(len(counts))
        marginals = [tensor.sum(axis=tuple(a for a in axes if a != k)) for k in axes]
        return reduce(np.multiply.outer, marginals).reshape(-1)

    # ------------------------------------------------------------------
    # Recursion
    # ------------------------------------------------------------------

    def compute_value(self, key: BeliefStateKey) -> float:
        """Best-response value of a belief state.

        Raises:
            NoAttainableOutcomeError: If no action has any considered mass.
        """
        node = self.compute_node(key)
        return node.value

    def compute_node(self, key: BeliefStateKey) -> NodeValue:
        """Like :meth:`compute_value`, also returning the pruning bound."""
        belief = self._project(key.opponent_belief, key.player)
        node = self._node(key.player, key.own_type, key.state, key.horizon, belief)
        if node is None:
            raise NoAttainableOutcomeError(
                f"No attainable outcome for {self.spec.players[key.player]} type "
                f"{key.own_type} at {self.spec.states[key.state]} with horizon "
                f"{key.horizon}"
            )
        return node

    def _node(
        self, player: int, own_type: int, state: int, horizon: int, belief: np.ndarray
    ) -> NodeValue | None:
        memo_key = (
            player,
            own_type,
            state,
            horizon,
            tuple(np.rint(belief / QUANTUM).astype(np.int64)),
        )
        if memo_key in self._memo:
            return self._memo[memo_key]

        k = self.spec.num_states
        coefficients = self.coefficients(player, state)[own_type]
        weighted = belief[:, np.newaxis, np.newaxis] * coefficients
        mass = weighted.sum(axis=0)
        payoffs = self.terminal_payoffs(player)[own_type]
        terminal_value = np.einsum("uat,ut->a", weighted[:, :, k:], payoffs)
        terminal_mass = mass[:, k:].sum(axis=1)
        worst = float(self.spec.terminal_payoffs[:, player, :].min())

        best: float | None = None
        # Largest per-action bound; the max over actions moves by no more.
        bound = 0.0
        for action in range(coefficients.shape[1]):
            numerator = float(terminal_value[action])
            kept = float(terminal_mass[action])
            pruned = 0.0
            children: list[tuple[float, float]] = []
            if horizon >= 1:
                for outcome in np.flatnonzero(mass[action, :k] > 0):
                    p = float(mass[action, outcome])
                    if p < self.prune_threshold:
                        pruned += p
                        continue
                    posterior = self._project(
                        bayes_update(belief, coefficients[:, action, outcome]), player
                    )
                    child = self._node(player, own_type, int(outcome), horizon - 1, posterior)
                    if child is None:
                        continue
                    numerator += p * child.value
                    kept += p
                    children.append((p, child.pruned_bound))
            denominator = kept
            if self.pruned_mass == "penalize" and pruned > 0.0:
                numerator += pruned * worst
                denominator += pruned
            if denominator <= 0.0:
                continue
            action_bound = pruned / (kept + pruned)
            if kept > 0.0:
                action_bound += sum(p / kept * b for p, b in children)
            bound = max(bound, action_bound)
            value = numerator / denominator
            if best is None or value > best:
                best = value

        node = None if best is None else NodeValue(best, bound)
        self._memo[memo_key] = node
        return node

    def type_values(self, player: int, horizon: int) -> np.ndarray:
        """Best-response value per own type at the root.

        Types with zero prior mass get NaN.
        """
        marginal = self.spec.prior.marginal(player)
        values = np.full(len(marginal), np.nan)
        for own_type, weight in enumerate(marginal):
            if weight <= 0.0:
                continue
            key = BeliefStateKey(
                player,
                own_type,
                self.spec.root,
                horizon,
                self.initial_belief(player, own_type),
            )
            values[own_type] = self.compute_value(key)
        return values

    def player_value(self, player: int, horizon: int) -> float:
        """Prior-weighted best-response value of ``player``."""
        marginal = self.spec.prior.marginal(player)
        values = self.type_values(player, horizon)
        return float(np.sum(marginal * np.nan_to_num(values)))

    def pruned_bound(self, player: int, horizon: int) -> float:
        """Bound on the value change caused by pruning, in payoff-range units."""
        marginal = self.spec.prior.marginal(player)
        total = 0.0
        for own_type, weight in enumerate(marginal):
            if weight <= 0.0:
                continue
            key = BeliefStateKey(
                player, own_type, self.spec.root, horizon, self.initial_belief(player, own_type)
            )
            total += weight * self.compute_node(key).pruned_bound
        return total


# ============================================================================
# Profile values and epsilon reports
# ============================================================================


def profile_value(spec: GameSpec, profile: StrategyProfile) -> np.ndarray:
    """Expected payoff of every player under ``profile``.

    Returns:
        Array of shape (num_players,): the prior-weighted type-dependent
        value at the root.
    """
    table = evaluate_strategies_tdv(spec, profile)
    return table.values[:, spec.root, :] @ spec.prior.mass


def profile_type_values(spec: GameSpec, profile: StrategyProfile) -> list[np.ndarray]:
    """Expected payoff of every player conditioned on each own type."""
    root = evaluate_strategies_tdv(spec, profile).values[:, spec.root, :]
    profiles = spec.type_profiles
    result = []
    for player in range(spec.num_players):
        marginal = spec.prior.marginal(player)
        per_type = np.full(len(marginal), np.nan)
        for own_type, weight in enumerate(marginal):
            if weight > 0.0:
                mask = profiles[:, player] == own_type
                per_type[own_type] = float(
                    root[player, mask] @ spec.prior.mass[mask] / weight
                )
        result.append(per_type)
    return result


@dataclass(frozen=True)
class PlayerEpsilon:
    """Deviation gain of one player.

    Attributes:
        player: Player name.
        profile_value: Expected payoff under the profile (V*).
        optimal_value: Best-response payoff (V).
        profile_type_values: V* conditioned on each own type.
        optimal_type_values: V conditioned on each own type.
    """

    player: str
    profile_value: float
    optimal_value: float
    profile_type_values: tuple[Optional[float], ...] = ()
    optimal_type_values: tuple[Optional[float], ...] = ()

    @property
    def epsilon(self) -> float:
        return self.optimal_value - self.profile_value


@dataclass(frozen=True)
class HorizonValue:
    """Best-response values of every player at one horizon."""

    horizon: int
    values: Optional[tuple[float, ...]]


@dataclass(frozen=True)
class EpsilonReport:
    """Distance of a profile from equilibrium.

    Attributes:
        method: ``persistent`` or ``expost``.
        players: Per-player deviation gains.
        converged: Whether the horizon sweep settled before its cap.
        horizon: Horizon of the reported values (None for the MDP check).
        series: Best-response values at every horizon tried.
        prune_threshold: Transition pruning used by the evaluator.
        belief_model: Opponent belief tracking used by the evaluator.
    """

    method: str
    players: tuple[PlayerEpsilon, ...]
    converged: bool = True
    horizon: Optional[int] = None
    series: tuple[HorizonValue, ...] = ()
    prune_threshold: float = 0.0
    belief_model: str = "joint"

    @property
    def epsilon(self) -> float:
        return max(row.epsilon for row in self.players)

    def by_player(self, player: str) -> PlayerEpsilon:
        for row in self.players:
            if row.player == player:
                return row
        raise KeyError(player)


def _optional(values: np.ndarray) -> tuple[Optional[float], ...]:
    return tuple(None if np.isnan(v) else float(v) for v in values)


def epsilon_persistent(
    spec: GameSpec,
    profile: StrategyProfile,
    horizon_cap: int | None = None,
    convergence_tol: float = 1e-3,
    prune_threshold: float = 0.01,
    belief_model: BeliefModel = "joint",
    pruned_mass: PrunedMass = "renormalize",
    progress: bool = False,
) -> EpsilonReport:
    """Measure epsilon with the persistent-information best response.

    The horizon grows from 0 until every player's value moves by less than
    ``convergence_tol``, until it covers the longest path of the DAG (the
    value is then exact), or until ``horizon_cap``. Hitting the cap first is
    reported through ``converged=False``.

    Args:
        spec: The game.
        profile: The profile to measure.
        horizon_cap: Largest horizon tried; None means the number of states.
        convergence_tol: Horizon convergence tolerance in payoff units.
        prune_threshold: Transition pruning threshold.
        belief_model: ``joint`` or ``marginal`` opponent beliefs.
        pruned_mass: ``renormalize`` or ``penalize``.
        progress: Show a progress bar over horizons.

    Returns:
        The EpsilonReport.

    Raises:
        NoAttainableOutcomeError: If no horizon up to the cap has a defined
            value for every player.
    """
    evaluator = PersistentEvaluator(
        spec, profile, prune_threshold, belief_model, pruned_mass
    )
    cap = spec.num_states if horizon_cap is None else horizon_cap
    exact_horizon = spec.graph.longest_path(spec.root)
    series: list[HorizonValue] = []
    previous: np.ndarray | None = None
    last: tuple[int, list[np.ndarray]] | None = None
    converged = False

    for horizon in tqdm(range(cap + 1), desc="horizon", disable=not progress):
        try:
            per_type = [evaluator.type_values(i, horizon) for i in range(spec.num_players)]
        except NoAttainableOutcomeError:
            logger.debug("Horizon %d has no attainable outcome; extending", horizon)
            series.append(HorizonValue(horizon, None))
            previous = None
            continue
        current = np.array(
            [
                float(np.sum(np.nan_to_num(v) * spec.prior.marginal(i)))
                for i, v in enumerate(per_type)
            ]
        )
        series.append(HorizonValue(horizon, tuple(float(v) for v in current)))
        last = (horizon, per_type)
        logger.debug("Horizon %d: best-response values %s", horizon, current)
        if previous is not None and np.all(np.abs(current - previous) < convergence_tol):
            converged = True
            break
        if horizon >= exact_horizon:
            converged = True
            break
        previous = current

    if last is None:
        raise NoAttainableOutcomeError(
            f"No horizon up to {cap} gives every player an attainable outcome"
        )
    if not converged:
        logger.warning(
            "Best-response values did not settle by horizon cap %d (tolerance %g)",
            cap,
            convergence_tol,
        )

    horizon, per_type = last
    star = profile_value(spec, profile)
    star_types = profile_type_values(spec, profile)
    rows = []
    for i, name in enumerate(spec.players):
        optimal = float(np.sum(np.nan_to_num(per_type[i]) * spec.prior.marginal(i)))
        rows.append(
            PlayerEpsilon(
                player=name,
                profile_value=float(star[i]),
                optimal_value=optimal,
                profile_type_values=_optional(star_types[i]),
                optimal_type_values=_optional(per_type[i]),
            )
        )
    report = EpsilonReport(
        method="persistent",
        players=tuple(rows),
        converged=converged,
        horizon=horizon,
        series=tuple(series),
        prune_threshold=prune_threshold,
        belief_model=belief_model,
    )
    logger.info("Persistent epsilon %.4f at horizon %d", report.epsilon, horizon)
    return report
