"""Value tables for nonterminal states."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .game import GameSpec


class ValueMode(Enum):
    """How values are keyed."""

    STATE = "state-values"  # (player, state)
    TYPE_DEPENDENT = "type-dependent-values"  # (player, state, joint type)


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Per-player values of the nonterminal states.

    Terminal values are never stored; :meth:`continuation` appends the
    terminal payoffs unchanged.

    Attributes:
        mode: Keying of the table.
        values: Shape (num_players, K) in state mode, (num_players, K, J) in
            type-dependent mode.
    """

    mode: ValueMode
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        expected_ndim = 2 if self.mode is ValueMode.STATE else 3
        if values.ndim != expected_ndim:
            raise ValueError(
                f"{self.mode.value} table needs {expected_ndim} axes, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, spec: GameSpec, mode: ValueMode = ValueMode.STATE) -> ValueTable:
        return cls(mode, np.zeros(_shape(spec, mode)))

    @classmethod
    def random(
        cls, spec: GameSpec, seed: int, mode: ValueMode = ValueMode.STATE
    ) -> ValueTable:
        """Values drawn uniformly inside the game's payoff range."""
        rng = np.random.default_rng(seed)
        low, high = spec.payoff_range
        return cls(mode, rng.uniform(low, high, size=_shape(spec, mode)))

    @property
    def entry_count(self) -> int:
        return int(self.values.size)

    def at(self, player: int, state: int) -> float | np.ndarray:
        return self.values[player, state]

    def as_mode(self, spec: GameSpec, mode: ValueMode) -> ValueTable:
        """Convert between modes.

        State values broadcast across joint types. Type-dependent values
        collapse with the prior as weights.
        """
        if mode is self.mode:
            return self
        if mode is ValueMode.TYPE_DEPENDENT:
            tiled = np.repeat(self.values[..., np.newaxis], spec.num_type_profiles, 2)
            return ValueTable(mode, tiled)
        return ValueTable(mode, self.values @ spec.prior.mass)

    def continuation(self, spec: GameSpec) -> np.ndarray:
        """Values of every outcome, terminals included.

        Returns:
            Array of shape (num_players, num_outcomes, J).
        """
        num_types = spec.num_type_profiles
        if self.mode is ValueMode.STATE:
            nonterminal = np.repeat(self.values[..., np.newaxis], num_types, axis=2)
        else:
            nonterminal = self.values
        terminal = np.transpose(spec.terminal_payoffs, (1, 0, 2))
        return np.concatenate([nonterminal, terminal], axis=1)

    def max_delta(self, other: ValueTable) -> float:
        if self.values.shape != other.values.shape:
            raise ValueError(
                f"Cannot compare value tables of shapes {self.values.shape} and "
                f"{other.values.shape}"
            )
        if self.values.size == 0:
            return 0.0
        return float(np.max(np.abs(self.values - other.values)))

    def bounds_violations(self, spec: GameSpec, tol: float = 1e-9) -> list[str]:
        """Entries that are not finite or fall outside the payoff range."""
        low, high = spec.payoff_range
        problems: list[str] = []
        bad = ~np.isfinite(self.values) | (self.values < low - tol) | (
            self.values > high + tol
        )
        for entry in np.argwhere(bad)[:20]:
            player, state = int(entry[0]), int(entry[1])
            problems.append(
                f"Value {float(self.values[tuple(entry)])!r} for "
                f"{spec.players[player]} at {spec.states[state]} outside "
                f"[{low}, {high}]"
            )
        return problems

    def __repr__(self) -> str:
        return f"ValueTable(mode={self.mode.value}, shape={self.values.shape})"


def _shape(spec: GameSpec, mode: ValueMode) -> tuple[int, ...]:
    if mode is ValueMode.STATE:
        return (spec.num_players, spec.num_states)
    return (spec.num_players, spec.num_states, spec.num_type_profiles)
