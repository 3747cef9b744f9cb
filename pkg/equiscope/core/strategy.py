"""Behavior strategy profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .game import GameSpec

DISTRIBUTION_TOLERANCE = 1e-12

StageStrategy = tuple[np.ndarray, ...]


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Per (state, player, type) distributions over actions.

    Attributes:
        dist: ``dist[state][player]`` is an array of shape (T_i, m_i) whose
            rows are probability vectors.
    """

    dist: tuple[StageStrategy, ...]

    def __post_init__(self) -> None:
        frozen = []
        for stage in self.dist:
            arrays = []
            for strategy in stage:
                array = np.array(strategy, dtype=np.float64)
                array.setflags(write=False)
                arrays.append(array)
            frozen.append(tuple(arrays))
        object.__setattr__(self, "dist", tuple(frozen))

    @classmethod
    def uniform(cls, spec: GameSpec) -> StrategyProfile:
        """Every (player, type) mixes uniformly at every state."""
        stages = []
        for state in range(spec.num_states):
            counts = spec.action_counts(state)
            stages.append(
                tuple(
                    np.full((spec.type_counts[k], m), 1.0 / m)
                    for k, m in enumerate(counts)
                )
            )
        return cls(tuple(stages))

    @property
    def num_states(self) -> int:
        return len(self.dist)

    def at(self, state: int) -> StageStrategy:
        """Strategies of every player at ``state``."""
        return self.dist[state]

    def get(self, state: int, player: int, own_type: int) -> np.ndarray:
        return self.dist[state][player][own_type]

    def with_state(self, state: int, strategies: Sequence[np.ndarray]) -> StrategyProfile:
        """Copy of the profile with ``state``'s strategies replaced."""
        stages = list(self.dist)
        stages[state] = tuple(strategies)
        return StrategyProfile(tuple(stages))

    def max_delta(self, other: StrategyProfile) -> float:
        """Largest absolute probability change between two profiles."""
        delta = 0.0
        for mine, theirs in zip(self.dist, other.dist):
            for a, b in zip(mine, theirs):
                delta = max(delta, float(np.max(np.abs(a - b))))
        return delta

    def is_type_independent(self, player: int) -> bool:
        return all(
            np.allclose(stage[player], stage[player][0]) for stage in self.dist
        )

    def violations(self, spec: GameSpec) -> list[str]:
        """Describe every way the profile fails to be valid for ``spec``."""
        problems: list[str] = []
        if self.num_states != spec.num_states:
            return [
                f"Profile covers {self.num_states} states, game has {spec.num_states}"
            ]
        for state, stage in enumerate(self.dist):
            name = spec.states[state]
            if len(stage) != spec.num_players:
                problems.append(f"State {name}: {len(stage)} players in profile")
                continue
            for player, strategy in enumerate(stage):
                expected = (spec.type_counts[player], spec.action_counts(state)[player])
                if strategy.shape != expected:
                    problems.append(
                        f"State {name} player {spec.players[player]}: shape "
                        f"{strategy.shape}, expected {expected}"
                    )
                    continue
                if np.any(strategy < 0) or not np.all(np.isfinite(strategy)):
                    problems.append(
                        f"State {name} player {spec.players[player]}: negative or "
                        "non-finite probability"
                    )
                sums = strategy.sum(axis=1)
                for own_type in np.flatnonzero(
                    np.abs(sums - 1.0) > DISTRIBUTION_TOLERANCE
                ):
                    problems.append(
                        f"State {name} player {spec.players[player]} type "
                        f"{int(own_type)}: sums to {float(sums[own_type])!r}"
                    )
        return problems

    def __repr__(self) -> str:
        return f"StrategyProfile(states={self.num_states})"
