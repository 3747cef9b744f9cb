"""Seeded synthetic Hostility Game instances."""

from __future__ import annotations

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .hostility import AggregationRegistry, HostilityGameParams

RED_NAMES = ("warship", "security", "auxiliary")


class SizeProfile(BaseModel):
    """Shape of a generated instance.

    Attributes:
        num_red: Number of red players.
        min_actions: Smallest per-player move count drawn.
        max_actions: Largest per-player move count drawn.
        action_counts: Explicit move counts (blue first); overrides the range.
        kinetic_threshold: K.
        num_types: Types per player; type values are 1..num_types.
        max_hostility: Hostilities are drawn from 1..max_hostility.
        aggregation: Registered aggregation model.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_red: int = Field(default=3, ge=1)
    min_actions: int = Field(default=7, ge=1)
    max_actions: int = Field(default=10, ge=1)
    action_counts: Optional[List[int]] = None
    kinetic_threshold: int = Field(default=150, ge=1)
    num_types: int = Field(default=2, ge=1)
    max_hostility: int = Field(default=3, ge=1)
    aggregation: str = "mean"

    @model_validator(mode="after")
    def _check(self) -> SizeProfile:
        if self.min_actions > self.max_actions:
            raise ValueError("min_actions must not exceed max_actions")
        if self.action_counts is not None:
            if len(self.action_counts) != self.num_red + 1:
                raise ValueError(
                    f"action_counts needs {self.num_red + 1} entries, "
                    f"got {len(self.action_counts)}"
                )
            if any(m < 1 for m in self.action_counts):
                raise ValueError("Every player needs at least one move")
        AggregationRegistry.require(self.aggregation)
        return self


def generate_synthetic(seed: int, size: SizeProfile | None = None) -> HostilityGameParams:
    """Draw a Hostility Game instance deterministically from ``seed``.

    Countered red moves favor blue (``blue_defended`` in [0.15, 0.35],
    ``red_defended`` in [0.02, 0.15]); uncountered ones favor red
    (``blue_undefended`` in [0.02, 0.15], ``red_undefended`` in
    [0.15, 0.35]). Each red move is countered by every blue move with
    probability 0.3, and by at least one blue move.

    Args:
        seed: Seed for ``np.random.default_rng``.
        size: Instance shape; defaults to ``SizeProfile()``.

    Returns:
        Validated HostilityGameParams.
    """
    size = size or SizeProfile()
    rng = np.random.default_rng(seed)
    num_players = size.num_red + 1

    if size.action_counts is not None:
        counts = list(size.action_counts)
    else:
        counts = [
            int(c)
            for c in rng.integers(size.min_actions, size.max_actions + 1, num_players)
        ]

    players = ["blue"] + [
        RED_NAMES[r] if r < len(RED_NAMES) else f"red{r + 1}"
        for r in range(size.num_red)
    ]
    moves = [[f"{players[k]}-{a}" for a in range(m)] for k, m in enumerate(counts)]

    counters = []
    for r in range(size.num_red):
        per_move = []
        for _ in range(counts[r + 1]):
            chosen = np.flatnonzero(rng.random(counts[0]) < 0.3)
            if chosen.size == 0:
                chosen = np.array([rng.integers(counts[0])])
            per_move.append([int(b) for b in chosen])
        counters.append(per_move)

    blue_defended = rng.uniform(0.15, 0.35, (counts[0], size.num_red))
    blue_undefended = rng.uniform(0.02, 0.15, (counts[0], size.num_red))
    red_defended = [rng.uniform(0.02, 0.15, counts[r + 1]) for r in range(size.num_red)]
    red_undefended = [rng.uniform(0.15, 0.35, counts[r + 1]) for r in range(size.num_red)]
    hostility = [
        [int(h) for h in rng.integers(1, size.max_hostility + 1, m)] for m in counts
    ]

    return HostilityGameParams(
        name=f"synthetic-{seed}",
        players=players,
        moves=moves,
        counters=counters,
        blue_defended=blue_defended.tolist(),
        blue_undefended=blue_undefended.tolist(),
        red_defended=[row.tolist() for row in red_defended],
        red_undefended=[row.tolist() for row in red_undefended],
        hostility=hostility,
        kinetic_threshold=size.kinetic_threshold,
        type_values=[[float(t) for t in range(1, size.num_types + 1)]] * num_players,
        aggregation=size.aggregation,
    )
