"""DAG-structured stochastic games with persistent private types.

A game has ``K`` nonterminal states and ``T`` terminal states. Outcome
indices run over both: ``0..K-1`` are nonterminal states and ``K + p`` is the
terminal at position ``p``. Every per-type table is indexed by joint type
vectors in the order produced by :func:`type_profiles`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from ..errors import InvalidGameError, UnknownPlayerError
from .beliefs import JointTypeBelief, type_profiles
from .graph import StateGraph

ROW_TOLERANCE = 1e-9
PRIOR_TOLERANCE = 1e-12
# Per-state cap on reported normalization/sign violations.
MAX_ROW_VIOLATIONS = 20


def _frozen(array: Any, dtype: Any) -> np.ndarray:
    """Return a read-only array, reusing ``array`` if it already is one."""
    if (
        isinstance(array, np.ndarray)
        and array.dtype == dtype
        and not array.flags.writeable
    ):
        return array
    result = np.array(array, dtype=dtype)
    result.setflags(write=False)
    return result


@dataclass(frozen=True, eq=False)
class StateKernel:
    """Transition kernel of one nonterminal state.

    Each joint action has ``B`` branches. Branch ``b`` of joint action ``a``
    moves to outcome ``successors[a + (b,)]`` with probability
    ``probs[(j,) + a + (b,)]`` under joint type vector ``j``. Branches may
    share an outcome.

    Attributes:
        action_counts: Number of actions per player at this state.
        successors: Int array of shape (*action_counts, B).
        probs: Float array of shape (J, *action_counts, B).
    """

    action_counts: tuple[int, ...]
    successors: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "action_counts", tuple(int(m) for m in self.action_counts)
        )
        object.__setattr__(self, "successors", _frozen(self.successors, np.int64))
        object.__setattr__(self, "probs", _frozen(self.probs, np.float64))

    @property
    def num_branches(self) -> int:
        return int(self.successors.shape[-1])


@dataclass(frozen=True)
class Violation:
    """One broken game invariant.

    Attributes:
        kind: Short category (``prior``, ``shape``, ``normalization``,
            ``negative``, ``dag``, ``payoff``, ``order``, ``cycle``).
        message: Human-readable description naming the fault.
        state: Name of the state at fault, if any.
        detail: Action/type tuple or other locating data.
    """

    kind: str
    message: str
    state: str | None = None
    detail: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A DAG-structured stochastic game.

    Attributes:
        players: Player names, in index order.
        type_counts: Number of private types per player.
        prior: Joint type belief at the root.
        states: Nonterminal state names; the index is the position.
        terminals: Terminal state names; outcome index is ``K + position``.
        kernels: One StateKernel per nonterminal state.
        terminal_payoffs: Array of shape (T, num_players, J).
        topological_order: Permutation of nonterminal indices.
        root: Index of the initial state.
        type_labels: Optional display labels per player per type.
        name: Human-readable game name.
    """

    players: tuple[str, ...]
    type_counts: tuple[int, ...]
    prior: JointTypeBelief
    states: tuple[str, ...]
    terminals: tuple[str, ...]
    kernels: tuple[StateKernel, ...] = field(repr=False)
    terminal_payoffs: np.ndarray = field(repr=False)
    topological_order: tuple[int, ...] = field(repr=False)
    root: int = 0
    type_labels: tuple[tuple[str, ...], ...] | None = field(default=None, repr=False)
    name: str = "game"

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "type_counts", tuple(int(t) for t in self.type_counts))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "terminals", tuple(self.terminals))
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(
            self, "topological_order", tuple(int(s) for s in self.topological_order)
        )
        object.__setattr__(
            self, "terminal_payoffs", _frozen(self.terminal_payoffs, np.float64)
        )

    # ------------------------------------------------------------------
    # Dimensions
    # ------------------------------------------------------------------

    @property
    def num_players(self) -> int:
        return len(self.players)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_terminals(self) -> int:
        return len(self.terminals)

    @property
    def num_outcomes(self) -> int:
        return self.num_states + self.num_terminals

    @property
    def num_type_profiles(self) -> int:
        return int(np.prod(self.type_counts))

    @cached_property
    def type_profiles(self) -> np.ndarray:
        return type_profiles(self.type_counts)

    @cached_property
    def graph(self) -> StateGraph:
        """Support graph between nonterminal states."""
        edges: list[tuple[int, int]] = []
        for source, kernel in enumerate(self.kernels):
            for target in _positive_nonterminal_targets(kernel, self.num_states):
                edges.append((source, target))
        return StateGraph(self.num_states, edges)

    def action_counts(self, state: int) -> tuple[int, ...]:
        return self.kernels[state].action_counts

    def outcome_name(self, outcome: int) -> str:
        if outcome < self.num_states:
            return self.states[outcome]
        return self.terminals[outcome - self.num_states]

    def player_index(self, player: int | str) -> int:
        """Resolve a player name or index.

        Raises:
            UnknownPlayerError: If the player does not exist.
        """
        if isinstance(player, str):
            if player not in self.players:
                raise UnknownPlayerError(
                    f"Unknown player {player!r}; players are {list(self.players)}"
                )
            return self.players.index(player)
        if not 0 <= int(player) < self.num_players:
            raise UnknownPlayerError(
                f"Player index {player} out of range for {self.num_players} players"
            )
        return int(player)

    @property
    def payoff_range(self) -> tuple[float, float]:
        """Smallest and largest terminal payoff over all players and types."""
        return (
            float(self.terminal_payoffs.min()),
            float(self.terminal_payoffs.max()),
        )

    # ------------------------------------------------------------------
    # Strategy-induced transition probabilities
    # ------------------------------------------------------------------

    def joint_action_probs(
        self, state: int, strategies: Sequence[np.ndarray]
    ) -> np.ndarray:
        """Probability of each joint action under each joint type vector.

        Args:
            state: Nonterminal state index.
            strategies: Per player, an array of shape (T_i, m_i).

        Returns:
            Array of shape (J, *action_counts).
        """
        profiles = self.type_profiles
        result = np.ones(len(profiles))
        for player, strategy in enumerate(strategies):
            per_type = np.asarray(strategy)[profiles[:, player]]
            result = result[..., np.newaxis] * per_type.reshape(
                (len(profiles),) + (1,) * player + (per_type.shape[1],)
            )
        return result

    def flow(self, state: int, strategies: Sequence[np.ndarray]) -> np.ndarray:
        """Outcome distribution per joint type vector.

        Returns:
            Array of shape (J, num_outcomes); row ``j`` is the probability of
            moving to each outcome when types are ``j`` and everyone plays
            ``strategies``.
        """
        kernel = self.kernels[state]
        weights = self.joint_action_probs(state, strategies)[..., np.newaxis]
        weights = weights * kernel.probs
        num_types = weights.shape[0]
        outcomes = self.num_outcomes
        index = kernel.successors.reshape(1, -1) + outcomes * np.arange(
            num_types
        ).reshape(-1, 1)
        return np.bincount(
            index.ravel(),
            weights=weights.reshape(num_types, -1).ravel(),
            minlength=num_types * outcomes,
        ).reshape(num_types, outcomes)

    def deviation_flow(
        self, state: int, player: int, strategies: Sequence[np.ndarray]
    ) -> np.ndarray:
        """Outcome distribution when ``player`` fixes each of its actions.

        Returns:
            Array of shape (J, m_i, num_outcomes): entry ``[j, a, o]`` is the
            probability of outcome ``o`` when types are ``j``, ``player`` plays
            action ``a`` and the others follow ``strategies``.
        """
        kernel = self.kernels[state]
        num_actions = kernel.action_counts[player]
        others = list(strategies)
        others[player] = np.ones((self.type_counts[player], num_actions))
        weights = self.joint_action_probs(state, others)[..., np.newaxis]
        weights = np.moveaxis(weights * kernel.probs, player + 1, 1)
        successors = np.moveaxis(kernel.successors, player, 0)
        num_types = weights.shape[0]
        outcomes = self.num_outcomes
        offsets = outcomes * (
            np.arange(num_types).reshape(-1, 1, 1) * num_actions
            + np.arange(num_actions).reshape(1, -1, 1)
        )
        index = successors.reshape(1, num_actions, -1) + offsets
        return np.bincount(
            index.ravel(),
            weights=weights.reshape(num_types, num_actions, -1).ravel(),
            minlength=num_types * num_actions * outcomes,
        ).reshape(num_types, num_actions, outcomes)

    def __repr__(self) -> str:
        return (
            f"GameSpec(name={self.name!r}, players={len(self.players)}, "
            f"states={self.num_states}, terminals={self.num_terminals}, "
            f"type_counts={self.type_counts})"
        )


def _positive_nonterminal_targets(kernel: StateKernel, num_states: int) -> set[int]:
    """Nonterminal outcomes reachable with positive probability."""
    if kernel.probs.ndim < 1 or kernel.probs.shape[1:] != kernel.successors.shape:
        return set()
    possible = np.any(kernel.probs > 0, axis=0)
    mask = possible & (kernel.successors >= 0) & (kernel.successors < num_states)
    return {int(s) for s in np.unique(kernel.successors[mask])}


# ======================================================================
# Validation
# ======================================================================


def validate(spec: GameSpec) -> list[Violation]:
    """Check every structural invariant of a game.

    Violations are returned as data; nothing is raised and ``spec`` is not
    modified.

    Args:
        spec: The game to check.

    Returns:
        An empty list iff the game is well formed.
    """
    violations: list[Violation] = []
    num_states = spec.num_states
    outcomes = spec.num_outcomes
    num_types = int(np.prod(spec.type_counts)) if spec.type_counts else 1

    if len(spec.type_counts) != spec.num_players:
        violations.append(
            Violation(
                "shape",
                f"{len(spec.type_counts)} type counts for {spec.num_players} players",
            )
        )
    if spec.prior.type_counts != spec.type_counts:
        violations.append(
            Violation(
                "prior",
                f"Prior over type counts {spec.prior.type_counts} does not match "
                f"game type counts {spec.type_counts}",
            )
        )
    else:
        total = float(spec.prior.mass.sum())
        if abs(total - 1.0) > PRIOR_TOLERANCE:
            violations.append(
                Violation("prior", f"Prior mass sums to {total!r}, expected 1")
            )

    if sorted(spec.topological_order) != list(range(num_states)):
        violations.append(
            Violation(
                "order",
                "Topological order is not a permutation of the nonterminal states",
            )
        )
        position = {s: s for s in range(num_states)}
    else:
        position = {s: i for i, s in enumerate(spec.topological_order)}

    if not 0 <= spec.root < max(num_states, 1):
        violations.append(Violation("shape", f"Root index {spec.root} out of range"))

    if len(spec.kernels) != num_states:
        violations.append(
            Violation(
                "shape", f"{len(spec.kernels)} kernels for {num_states} states"
            )
        )

    for index, kernel in enumerate(spec.kernels[:num_states]):
        violations.extend(
            _validate_kernel(spec, index, kernel, num_types, outcomes, position)
        )

    payoff_shape = (spec.num_terminals, spec.num_players, num_types)
    if spec.terminal_payoffs.shape != payoff_shape:
        violations.append(
            Violation(
                "shape",
                f"Terminal payoffs have shape {spec.terminal_payoffs.shape}, "
                f"expected {payoff_shape}",
            )
        )
    elif not np.all(np.isfinite(spec.terminal_payoffs)):
        bad = np.argwhere(~np.isfinite(spec.terminal_payoffs))[0]
        violations.append(
            Violation(
                "payoff",
                f"Non-finite payoff at terminal {spec.terminals[bad[0]]}",
                state=spec.terminals[bad[0]],
                detail={"player": int(bad[1]), "types": int(bad[2])},
            )
        )

    if not any(v.kind in ("shape", "dag") for v in violations):
        if spec.graph.has_cycle():
            violations.append(Violation("cycle", "State graph contains cycles"))

    return violations


def _validate_kernel(
    spec: GameSpec,
    index: int,
    kernel: StateKernel,
    num_types: int,
    outcomes: int,
    position: dict[int, int],
) -> list[Violation]:
    name = spec.states[index]
    found: list[Violation] = []
    if len(kernel.action_counts) != spec.num_players or any(
        m < 1 for m in kernel.action_counts
    ):
        return [
            Violation(
                "shape",
                f"State {name} has action counts {kernel.action_counts}; "
                "every player needs at least one action",
                state=name,
            )
        ]
    expected = kernel.action_counts + (kernel.num_branches,)
    if kernel.successors.shape != expected:
        return [
            Violation(
                "shape",
                f"State {name} successors have shape {kernel.successors.shape}, "
                f"expected {expected}",
                state=name,
            )
        ]
    if kernel.probs.shape != (num_types,) + expected:
        return [
            Violation(
                "shape",
                f"State {name} probabilities have shape {kernel.probs.shape}, "
                f"expected {(num_types,) + expected}",
                state=name,
            )
        ]
    out_of_range = (kernel.successors < 0) | (kernel.successors >= outcomes)
    if np.any(out_of_range):
        action = tuple(int(a) for a in np.argwhere(out_of_range)[0][:-1])
        return [
            Violation(
                "shape",
                f"State {name} action {action} points outside the "
                f"{outcomes} outcomes",
                state=name,
                detail={"action": action},
            )
        ]

    profiles = spec.type_profiles
    negative = np.argwhere(kernel.probs < 0)
    for entry in negative[:MAX_ROW_VIOLATIONS]:
        types = tuple(int(t) for t in profiles[entry[0]])
        action = tuple(int(a) for a in entry[1:-1])
        found.append(
            Violation(
                "negative",
                f"State {name} action {action} types {types} has a negative "
                "transition probability",
                state=name,
                detail={"action": action, "types": types},
            )
        )

    sums = kernel.probs.sum(axis=-1)
    bad_rows = np.argwhere(np.abs(sums - 1.0) > ROW_TOLERANCE)
    for entry in bad_rows[:MAX_ROW_VIOLATIONS]:
        types = tuple(int(t) for t in profiles[entry[0]])
        action = tuple(int(a) for a in entry[1:])
        found.append(
            Violation(
                "normalization",
                f"State {name} action {action} types {types} sums to "
                f"{float(sums[tuple(entry)])!r}",
                state=name,
                detail={"action": action, "types": types},
            )
        )

    # One DAG violation per offending target state, with a witness.
    positive = kernel.probs > 0
    for target in sorted(_positive_nonterminal_targets(kernel, spec.num_states)):
        if position[target] > position[index]:
            continue
        witness = np.argwhere(positive & (kernel.successors == target))[0]
        types = tuple(int(t) for t in profiles[witness[0]])
        action = tuple(int(a) for a in witness[1:-1])
        found.append(
            Violation(
                "dag",
                f"Transition from {name} to {spec.states[target]} does not move "
                f"forward in topological order (action {action}, types {types})",
                state=name,
                detail={"target": spec.states[target], "action": action, "types": types},
            )
        )
    return found


def check_game(spec: GameSpec) -> GameSpec:
    """Return ``spec`` unchanged, raising if it fails validation.

    Raises:
        InvalidGameError: If ``validate`` reports any violation.
    """
    violations = validate(spec)
    if violations:
        raise InvalidGameError(violations, spec.name)
    return spec
