"""Exception hierarchy for Equiscope."""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .core.game import Violation


class EquiscopeError(Exception):
    """Base class for every error raised by the library."""


class InvalidGameError(EquiscopeError, ValueError):
    """A game failed validation.

    Attributes:
        violations: The violations reported by ``validate``.
    """

    def __init__(self, violations: Sequence[Violation], name: str = "game") -> None:
        self.violations = list(violations)
        shown = "; ".join(v.message for v in self.violations[:5])
        more = len(self.violations) - 5
        suffix = f" (+{more} more)" if more > 0 else ""
        super().__init__(
            f"{name} has {len(self.violations)} violation(s): {shown}{suffix}"
        )


class ParameterError(EquiscopeError, ValueError):
    """Model parameters or solver settings are infeasible."""


class UnknownPlayerError(EquiscopeError, KeyError):
    """A player name or index does not exist in the game."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown player"


class MissingValueError(EquiscopeError, ValueError):
    """A value or belief needed at a state is absent or not finite."""


class SingularSystemError(EquiscopeError, ArithmeticError):
    """A linear system has no unique solution."""


class NoAttainableOutcomeError(EquiscopeError, ArithmeticError):
    """A best-response recursion found no outcome mass to normalize by."""


class BudgetExceededError(EquiscopeError, RuntimeError):
    """An enumeration would exceed its budget.

    Attributes:
        count: The number of items the enumeration would have visited.
        budget: The configured limit.
    """

    def __init__(self, count: int, budget: int) -> None:
        self.count = count
        self.budget = budget
        super().__init__(
            f"Enumeration needs {count} deviator policies, budget is {budget}"
        )


class UnsupportedGameError(EquiscopeError, ValueError):
    """The procedure does not apply to this kind of game."""


class StaleReadError(EquiscopeError, RuntimeError):
    """A belief was read before all of its predecessors were updated."""


class ArtifactError(EquiscopeError, ValueError):
    """An artifact file is malformed or of an unexpected kind."""
