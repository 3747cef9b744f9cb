"""Joint type beliefs over the players' private types."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from ..errors import UnknownPlayerError

# Mass that fails this check is rejected at construction.
CONSTRUCTION_TOLERANCE = 1e-9


def type_profiles(type_counts: Sequence[int]) -> np.ndarray:
    """Enumerate joint type vectors in lexicographic order.

    Player 0 varies slowest, so row ``j`` matches ``np.unravel_index(j,
    type_counts)``. Every table indexed by joint type uses this order.

    Args:
        type_counts: Number of types per player.

    Returns:
        An int array of shape (prod(type_counts), num_players).
    """
    counts = tuple(int(c) for c in type_counts)
    if not counts:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices(counts).reshape(len(counts), -1).T.astype(np.int64)


@dataclass(frozen=True, eq=False)
class JointTypeBelief:
    """Probability mass over joint type vectors.

    Attributes:
        type_counts: Number of types per player.
        mass: Flat probability vector in ``type_profiles`` order.
    """

    type_counts: tuple[int, ...]
    mass: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.type_counts)
        if any(c < 1 for c in counts):
            raise ValueError(f"Type counts must be positive, got {counts}")
        mass = np.array(self.mass, dtype=np.float64).reshape(-1)
        expected = int(np.prod(counts)) if counts else 1
        if mass.shape != (expected,):
            raise ValueError(
                f"Belief over type counts {counts} needs {expected} entries, "
                f"got {mass.size}"
            )
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValueError("Belief mass must be finite and nonnegative")
        total = float(mass.sum())
        if abs(total - 1.0) > CONSTRUCTION_TOLERANCE:
            raise ValueError(f"Belief mass sums to {total!r}, expected 1")
        mass.setflags(write=False)
        object.__setattr__(self, "type_counts", counts)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, type_counts: Sequence[int]) -> JointTypeBelief:
        """Uniform belief over every joint type vector."""
        size = int(np.prod(type_counts)) if len(type_counts) else 1
        return cls(tuple(type_counts), np.full(size, 1.0 / size))

    @classmethod
    def point(cls, type_counts: Sequence[int], profile: Sequence[int]) -> JointTypeBelief:
        """Point mass on one joint type vector."""
        mass = np.zeros(tuple(type_counts))
        mass[tuple(profile)] = 1.0
        return cls(tuple(type_counts), mass.reshape(-1))

    @property
    def num_players(self) -> int:
        return len(self.type_counts)

    def tensor(self) -> np.ndarray:
        """Return the mass reshaped to one axis per player."""
        return self.mass.reshape(self.type_counts)

    def marginal(self, player: int) -> np.ndarray:
        """Marginal distribution of one player's type.

        Args:
            player: Player index.

        Returns:
            A probability vector of length ``type_counts[player]``.

        Raises:
            UnknownPlayerError: If ``player`` is out of range.
        """
        if not 0 <= player < self.num_players:
            raise UnknownPlayerError(
                f"Player {player} not in belief over {self.num_players} players"
            )
        others = tuple(k for k in range(self.num_players) if k != player)
        return self.tensor().sum(axis=others)

    def marginals(self) -> list[np.ndarray]:
        return [self.marginal(k) for k in range(self.num_players)]

    def conditional_weights(self, player: int) -> np.ndarray:
        """Weight of each joint vector conditioned on the player's own type.

        Entry ``j`` is ``b(t) / b_i(t_i)`` where ``t`` is joint vector ``j``;
        for every own type the weights of the matching vectors sum to 1. Own
        types with zero marginal mass fall back to the product of the other
        players' marginals.
        """
        profiles = type_profiles(self.type_counts)
        own = self.marginal(player)[profiles[:, player]]
        weights = np.zeros_like(self.mass)
        positive = own > 0
        weights[positive] = self.mass[positive] / own[positive]
        if not np.all(positive):
            fallback = np.ones(len(self.mass))
            for k in range(self.num_players):
                if k != player:
                    fallback *= self.marginal(k)[profiles[:, k]]
            weights[~positive] = fallback[~positive]
        return weights

    def is_product(self, tol: float = 1e-12) -> bool:
        """Whether the belief factors into its marginals."""
        return bool(np.allclose(product_belief(self.marginals()).mass, self.mass, atol=tol))

    def __repr__(self) -> str:
        return f"JointTypeBelief(type_counts={self.type_counts})"


def marginal(belief: JointTypeBelief, player: int) -> np.ndarray:
    """Marginal distribution of ``player``'s type under ``belief``."""
    return belief.marginal(player)


def product_belief(marginals: Sequence[Sequence[float]]) -> JointTypeBelief:
    """Build the joint belief whose mass is the product of the marginals.

    Args:
        marginals: One probability vector per player.

    Returns:
        The product-form JointTypeBelief.
    """
    vectors = [np.asarray(m, dtype=np.float64).reshape(-1) for m in marginals]
    if not vectors:
        return JointTypeBelief((), np.ones(1))
    joint = reduce(np.multiply.outer, vectors)
    return JointTypeBelief(tuple(len(v) for v in vectors), joint.reshape(-1))
