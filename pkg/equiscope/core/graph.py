"""Directed graph over nonterminal states, with topological utilities."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Edge:
    """A possible transition between two nonterminal states.

    Attributes:
        source: Index of the state the transition leaves.
        target: Index of the state it enters.
    """

    source: int
    target: int

    def __repr__(self) -> str:
        return f"{self.source} -> {self.target}"


class StateGraph:
    """Support graph of a stochastic game's nonterminal states.

    An edge exists when some joint action and joint type vector moves
    positive probability from ``source`` to ``target``. Terminal states are
    not part of the graph.

    Example:
        >>> graph = StateGraph(3, [(0, 1), (1, 2), (0, 2)])
        >>> graph.topological_sort()
        [0, 1, 2]
    """

    def __init__(self, num_states: int, edges: Iterable[tuple[int, int]]) -> None:
        self._num_states = num_states
        self._successors: dict[int, list[int]] = defaultdict(list)
        self._predecessors: dict[int, list[int]] = defaultdict(list)
        self._edges: list[Edge] = []
        for source, target in edges:
            if not (0 <= source < num_states and 0 <= target < num_states):
                raise ValueError(
                    f"Edge {source} -> {target} outside {num_states} states"
                )
            if target in self._successors[source]:
                continue
            self._successors[source].append(target)
            self._predecessors[target].append(source)
            self._edges.append(Edge(source, target))
        self._cached_order: list[int] | None = None

    @property
    def num_states(self) -> int:
        return self._num_states

    def successors(self, state: int) -> list[int]:
        return list(self._successors[state])

    def predecessors(self, state: int) -> list[int]:
        return list(self._predecessors[state])

    def topological_sort(self) -> list[int]:
        """Return states in topological order (predecessors first).

        Ties are broken by state index, so the result is deterministic.

        Returns:
            A list of state indices.

        Raises:
            ValueError: If the graph contains cycles.
        """
        if self._cached_order is not None:
            return list(self._cached_order)

        in_degree = {s: len(self._predecessors[s]) for s in range(self._num_states)}

        # Kahn's algorithm
        queue = deque(s for s in range(self._num_states) if in_degree[s] == 0)
        result: list[int] = []

        while queue:
            state = queue.popleft()
            result.append(state)
            for neighbor in sorted(self._successors[state]):
                in_degree[neighbor] -= 1
                if in_degree[neighbor] == 0:
                    queue.append(neighbor)

        if len(result) != self._num_states:
            raise ValueError("Graph contains cycles")

        self._cached_order = result
        return list(result)

    def has_cycle(self) -> bool:
        try:
            self.topological_sort()
        except ValueError:
            return True
        return False

    def longest_path(self, source: int | None = None) -> int:
        """Number of edges on the longest path.

        Args:
            source: Start state, or None for the longest path anywhere.

        Returns:
            The edge count of the longest path (0 for an isolated state).
        """
        order = self.topological_sort()
        if source is None:
            depth = {s: 0 for s in order}
        else:
            depth = {source: 0}
        best = 0
        for state in order:
            if state not in depth:
                continue
            for target in self._successors[state]:
                candidate = depth[state] + 1
                if candidate > depth.get(target, -1):
                    depth[target] = candidate
                    best = max(best, candidate)
        return best

    def __repr__(self) -> str:
        return f"StateGraph(states={self._num_states}, edges={len(self._edges)})"
