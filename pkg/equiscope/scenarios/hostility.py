"""Hostility Game scenario for Equiscope.

A blue ship faces several red ships. At every state each player picks a
move; the encounter either ends in an outright blue win, an outright red
win, or continues with the hostility level raised by the sum of the moves'
hostilities. Once the level reaches the kinetic threshold ``K`` the game
ends with a large loss for everyone.

Private types model resource strength. A base success probability ``p`` for
a player of type ``t_own`` against an opponent of type ``t_opp`` becomes
``p ** (t_opp / t_own)``: stronger opponents lower the chance of success.

States are ``G0..G{K-1}`` (nonterminal) followed by the terminals ``B``
(blue win), ``R`` (red win) and ``G{K}`` (kinetic).
"""

from __future__ import annotations

import logging
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.beliefs import product_belief, type_profiles
from ..core.game import GameSpec, StateKernel, check_game
from ..core.registry import Registry
from ..errors import ParameterError

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-9

Aggregation = Callable[
    [Sequence[np.ndarray], Sequence[np.ndarray]], "tuple[np.ndarray, np.ndarray]"
]


class AggregationRegistry(Registry[Aggregation]):
    """Models combining per-red success probabilities into one encounter."""

    kind = "aggregation"


def register_aggregation(name: str) -> Callable[[Aggregation], Aggregation]:
    """Decorator registering an aggregation model under ``name``.

    The function receives the per-red blue-success and red-success
    probabilities (broadcast-compatible arrays) and returns the aggregated
    ``(p_blue_win, p_red_win)``.
    """
    return AggregationRegistry.register(name)


@register_aggregation("mean")
def mean_aggregation(
    blue: Sequence[np.ndarray], red: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Average the per-red probabilities."""
    return sum(blue) / len(blue), sum(red) / len(red)


@register_aggregation("independent")
def independent_aggregation(
    blue: Sequence[np.ndarray], red: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Separate draws per red ship.

    Blue wins only if it beats every red ship. Otherwise red wins if at
    least one red ship succeeds.
    """
    p_blue = np.prod(np.broadcast_arrays(*blue), axis=0)
    p_any_red = 1.0 - np.prod(np.broadcast_arrays(*[1.0 - r for r in red]), axis=0)
    return p_blue, (1.0 - p_blue) * p_any_red


class Encounter(NamedTuple):
    """Outcome probabilities of one joint move under one joint type."""

    p_blue_win: float
    p_red_win: float
    p_continue: float


class HostilityGameParams(BaseModel):
    """Parameters of an imperfect-information Hostility Game.

    Player 0 is blue; players ``1..R`` are red. Probability tables are
    indexed as:

    - ``blue_defended[b][r]`` / ``blue_undefended[b][r]``: blue success with
      blue move ``b`` against red player ``r`` (0-based among reds) when
      countered / uncountered.
    - ``red_defended[r][m]`` / ``red_undefended[r][m]``: success of red
      player ``r`` playing move ``m`` when countered / uncountered.
    - ``counters[r][m]``: blue moves that counter red player ``r``'s move ``m``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "hostility"
    players: List[str] = Field(
        default_factory=lambda: ["blue", "warship", "security", "auxiliary"]
    )
    moves: List[List[str]]
    counters: List[List[List[int]]]
    blue_defended: List[List[float]]
    blue_undefended: List[List[float]]
    red_defended: List[List[float]]
    red_undefended: List[List[float]]
    hostility: List[List[int]]
    kinetic_threshold: int = Field(ge=1)
    win_payoff: float = 100.0
    kinetic_payoff: float = -200.0
    type_values: Optional[List[List[float]]] = None
    prior: Optional[List[List[float]]] = None
    aggregation: str = "mean"

    @model_validator(mode="after")
    def _check_shapes(self) -> HostilityGameParams:
        n = len(self.players)
        if n < 2:
            raise ValueError("A hostility game needs blue and at least one red player")
        if len(set(self.players)) != n:
            raise ValueError(f"Player names must be unique, got {self.players}")
        if len(self.moves) != n or any(len(m) == 0 for m in self.moves):
            raise ValueError("Every player needs a nonempty move list")
        blue_moves = len(self.moves[0])
        reds = n - 1

        if len(self.counters) != reds:
            raise ValueError(f"counters needs one entry per red player ({reds})")
        for r, per_move in enumerate(self.counters):
            if len(per_move) != len(self.moves[r + 1]):
                raise ValueError(
                    f"counters[{r}] needs one entry per move of {self.players[r + 1]}"
                )
            for m, blue_set in enumerate(per_move):
                if any(not 0 <= b < blue_moves for b in blue_set):
                    raise ValueError(
                        f"counters[{r}][{m}] names a blue move outside 0..{blue_moves - 1}"
                    )

        for label, table in (
            ("blue_defended", self.blue_defended),
            ("blue_undefended", self.blue_undefended),
        ):
            if len(table) != blue_moves or any(len(row) != reds for row in table):
                raise ValueError(f"{label} must have shape ({blue_moves}, {reds})")
        for label, table in (
            ("red_defended", self.red_defended),
            ("red_undefended", self.red_undefended),
        ):
            if len(table) != reds or any(
                len(row) != len(self.moves[r + 1]) for r, row in enumerate(table)
            ):
                raise ValueError(f"{label} needs one row per red player sized to its moves")
        for label in ("blue_defended", "blue_undefended", "red_defended", "red_undefended"):
            values = [p for row in getattr(self, label) for p in row]
            if any(not 0.0 <= p <= 1.0 for p in values):
                raise ValueError(f"{label} probabilities must lie in [0, 1]")

        # Pairwise feasibility at base probabilities.
        for r in range(reds):
            for m in range(len(self.moves[r + 1])):
                for b in range(blue_moves):
                    countered = b in self.counters[r][m]
                    beta = (self.blue_defended if countered else self.blue_undefended)[b][r]
                    rho = (self.red_defended if countered else self.red_undefended)[r][m]
                    if beta + rho > 1.0 + FEASIBILITY_TOLERANCE:
                        raise ValueError(
                            f"Blue move {self.moves[0][b]} vs {self.players[r + 1]} "
                            f"move {self.moves[r + 1][m]}: success probabilities "
                            f"sum to {beta + rho}"
                        )

        if len(self.hostility) != n or any(
            len(h) != len(m) for h, m in zip(self.hostility, self.moves)
        ):
            raise ValueError("hostility needs one level per move of every player")
        if any(h <= 0 for row in self.hostility for h in row):
            raise ValueError("Hostility levels must be positive integers")

        types = self.resolved_type_values()
        if len(types) != n or any(len(t) == 0 for t in types):
            raise ValueError("type_values needs a nonempty list per player")
        if any(v <= 0 for row in types for v in row):
            raise ValueError("Type values must be positive")
        if self.prior is not None:
            if len(self.prior) != n or any(
                len(p) != len(t) for p, t in zip(self.prior, types)
            ):
                raise ValueError("prior needs one marginal per player sized to its types")
            for player, marginal in zip(self.players, self.prior):
                if any(p < 0 for p in marginal) or abs(sum(marginal) - 1.0) > 1e-9:
                    raise ValueError(f"Prior marginal of {player} is not a distribution")

        AggregationRegistry.require(self.aggregation)
        return self

    @property
    def num_players(self) -> int:
        return len(self.players)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self.moves)

    def resolved_type_values(self) -> list[list[float]]:
        """Type values, defaulting to one type of strength 1 per player."""
        if self.type_values is None:
            return [[1.0] for _ in self.players]
        return [list(row) for row in self.type_values]

    @property
    def type_counts(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.resolved_type_values())

    def prior_marginals(self) -> list[np.ndarray]:
        if self.prior is not None:
            return [np.asarray(p, dtype=np.float64) for p in self.prior]
        return [np.full(t, 1.0 / t) for t in self.type_counts]

    def perfect_information(self) -> HostilityGameParams:
        """The same game with every type space collapsed to one type."""
        return self.model_copy(
            update={
                "type_values": [[1.0] for _ in self.players],
                "prior": None,
                "name": f"{self.name}-perfect-information",
            }
        )


# ============================================================================
# Encounter resolution
# ============================================================================


def typed_probability(
    p: float | np.ndarray, own_type: float, opponent_type: float
) -> float | np.ndarray:
    """Adjust a base success probability for both sides' types.

    Args:
        p: Base probability in [0, 1].
        own_type: Strength of the acting player (> 0).
        opponent_type: Strength of the opponent (> 0).

    Returns:
        ``p ** (opponent_type / own_type)``.

    Raises:
        ParameterError: If a type is nonpositive or ``p`` is outside [0, 1].
    """
    if own_type <= 0 or opponent_type <= 0:
        raise ParameterError(
            f"Types must be positive, got own={own_type}, opponent={opponent_type}"
        )
    base = np.asarray(p, dtype=np.float64)
    if np.any(base < 0) or np.any(base > 1):
        raise ParameterError(f"Base probability {p} outside [0, 1]")
    result = np.power(base, opponent_type / own_type)
    return float(result) if result.ndim == 0 else result


def resolve_encounter(
    blue_move: int,
    red_moves: Sequence[int],
    joint_types: Sequence[int],
    params: HostilityGameParams,
) -> Encounter:
    """Outcome probabilities of a single encounter.

    Args:
        blue_move: Blue's move index.
        red_moves: One move index per red player.
        joint_types: One type index per player, blue first.
        params: Game parameters.

    Returns:
        The aggregated ``(p_blue_win, p_red_win, p_continue)``.

    Raises:
        ParameterError: If the aggregation leaves negative continue mass.
    """
    values = params.resolved_type_values()
    t_blue = values[0][joint_types[0]]
    blue: list[np.ndarray] = []
    red: list[np.ndarray] = []
    for r, move in enumerate(red_moves):
        countered = blue_move in params.counters[r][move]
        t_red = values[r + 1][joint_types[r + 1]]
        beta = (params.blue_defended if countered else params.blue_undefended)[blue_move][r]
        rho = (params.red_defended if countered else params.red_undefended)[r][move]
        blue.append(np.asarray(typed_probability(beta, t_blue, t_red)))
        red.append(np.asarray(typed_probability(rho, t_red, t_blue)))

    p_blue, p_red = AggregationRegistry.require(params.aggregation)(blue, red)
    p_blue, p_red = float(p_blue), float(p_red)
    p_continue = 1.0 - p_blue - p_red
    if p_continue < -FEASIBILITY_TOLERANCE:
        raise ParameterError(
            f"Aggregation '{params.aggregation}' gives continue probability "
            f"{p_continue} for blue move {params.moves[0][blue_move]} against red "
            f"moves {[params.moves[r + 1][m] for r, m in enumerate(red_moves)]}"
        )
    return Encounter(p_blue, p_red, max(p_continue, 0.0))


def encounter_tensor(params: HostilityGameParams) -> np.ndarray:
    """Outcome probabilities for every joint type vector and joint move.

    Returns:
        Array of shape (J, *action_counts, 3) with branches (blue win,
        red win, continue).

    Raises:
        ParameterError: If some entry has negative continue mass.
    """
    counts = params.action_counts
    reds = params.num_players - 1
    values = params.resolved_type_values()
    profiles = type_profiles(params.type_counts)
    num_types = len(profiles)
    t_blue = np.asarray(values[0])[profiles[:, 0]]
    full_shape = (num_types,) + counts

    blue: list[np.ndarray] = []
    red: list[np.ndarray] = []
    for r in range(reds):
        countered = np.zeros((counts[0], counts[r + 1]), dtype=bool)
        for m, blue_set in enumerate(params.counters[r]):
            countered[list(blue_set), m] = True
        beta = np.where(
            countered,
            np.asarray(params.blue_defended)[:, r : r + 1],
            np.asarray(params.blue_undefended)[:, r : r + 1],
        )
        rho = np.where(
            countered,
            np.asarray(params.red_defended[r])[np.newaxis, :],
            np.asarray(params.red_undefended[r])[np.newaxis, :],
        )
        ratio = (np.asarray(values[r + 1])[profiles[:, r + 1]] / t_blue)[:, None, None]
        shape = (num_types, counts[0]) + tuple(
            counts[k + 1] if k == r else 1 for k in range(reds)
        )
        blue.append(np.power(beta[np.newaxis], ratio).reshape(shape))
        red.append(np.power(rho[np.newaxis], 1.0 / ratio).reshape(shape))

    p_blue, p_red = AggregationRegistry.require(params.aggregation)(blue, red)
    p_blue = np.broadcast_to(p_blue, full_shape)
    p_red = np.broadcast_to(p_red, full_shape)
    p_continue = 1.0 - p_blue - p_red
    if np.any(p_continue < -FEASIBILITY_TOLERANCE):
        entry = np.argwhere(p_continue < -FEASIBILITY_TOLERANCE)[0]
        moves = [params.moves[k][int(a)] for k, a in enumerate(entry[1:])]
        raise ParameterError(
            f"Aggregation '{params.aggregation}' gives continue probability "
            f"{float(p_continue[tuple(entry)])} for moves {moves} under types "
            f"{tuple(int(t) for t in profiles[entry[0]])}"
        )
    return np.stack([p_blue, p_red, np.maximum(p_continue, 0.0)], axis=-1)


# ============================================================================
# Game construction
# ============================================================================


def build_game(params: HostilityGameParams) -> GameSpec:
    """Build the stochastic game for a set of Hostility Game parameters.

    From state ``G_n`` under joint move ``a`` the game moves to ``B`` with
    the blue-win probability, to ``R`` with the red-win probability and
    otherwise to ``G_{min(n + sum_k h(a_k), K)}``, where ``G_K`` is the
    kinetic terminal.

    Args:
        params: Validated parameters.

    Returns:
        A GameSpec with ``K`` nonterminal and 3 terminal states.

    Raises:
        ParameterError: If the aggregation is infeasible for some entry.
        InvalidGameError: If the built game fails validation.
    """
    k = params.kinetic_threshold
    n = params.num_players
    counts = params.action_counts
    probs = encounter_tensor(params)
    probs.setflags(write=False)

    total_hostility = np.zeros(counts, dtype=np.int64)
    for player, levels in enumerate(params.hostility):
        shape = tuple(counts[player] if q == player else 1 for q in range(n))
        total_hostility = total_hostility + np.asarray(levels, dtype=np.int64).reshape(shape)

    blue_terminal, red_terminal, kinetic_terminal = k, k + 1, k + 2
    kernels = []
    for level in range(k):
        target = level + total_hostility
        cont = np.where(target >= k, kinetic_terminal, target)
        successors = np.stack(
            [
                np.full(counts, blue_terminal, dtype=np.int64),
                np.full(counts, red_terminal, dtype=np.int64),
                cont,
            ],
            axis=-1,
        )
        kernels.append(StateKernel(counts, successors, probs))

    prior = product_belief(params.prior_marginals())
    num_types = prior.mass.size
    win, kinetic = params.win_payoff, params.kinetic_payoff
    payoffs = np.empty((3, n, num_types))
    payoffs[0] = -win
    payoffs[0, 0] = win
    payoffs[1] = win
    payoffs[1, 0] = -win
    payoffs[2] = kinetic

    values = params.resolved_type_values()
    spec = GameSpec(
        players=tuple(params.players),
        type_counts=params.type_counts,
        prior=prior,
        states=tuple(f"G{level}" for level in range(k)),
        terminals=("B", "R", f"G{k}"),
        kernels=tuple(kernels),
        terminal_payoffs=payoffs,
        topological_order=tuple(range(k)),
        type_labels=tuple(tuple(f"{v:g}" for v in row) for row in values),
        name=params.name,
    )
    logger.debug(
        "Built %s: %d states, %d joint moves, %d joint types",
        spec.name,
        spec.num_states + spec.num_terminals,
        int(np.prod(counts)),
        num_types,
    )
    return check_game(spec)
