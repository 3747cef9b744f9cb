"""Convergence traces of outer solver loops."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class TraceRow:
    """Diagnostics of one outer iteration."""

    outer_iteration: int
    max_strategy_delta: float
    max_value_delta: float
    epsilon: Optional[float]
    wall_seconds: float


@dataclass(frozen=True)
class ConvergenceTrace:
    """Ordered trace rows; iterations start at 1 and strictly increase."""

    rows: tuple[TraceRow, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        previous = 0
        for row in self.rows:
            if row.outer_iteration <= previous:
                raise ValueError(
                    f"Trace iteration {row.outer_iteration} does not follow "
                    f"{previous}"
                )
            previous = row.outer_iteration
        if self.rows and self.rows[0].outer_iteration != 1:
            raise ValueError("Trace must start at outer iteration 1")

    def appended(self, row: TraceRow) -> ConvergenceTrace:
        return ConvergenceTrace(self.rows + (row,))

    @property
    def last(self) -> TraceRow | None:
        return self.rows[-1] if self.rows else None

    def __len__(self) -> int:
        return len(self.rows)
