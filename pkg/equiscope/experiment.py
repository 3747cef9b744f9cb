"""Side-by-side comparison of outer-loop algorithms on one game."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from .core.game import GameSpec
from .core.strategy import StrategyProfile
from .errors import ParameterError
from .evaluation.expost import ex_post_check
from .evaluation.persistent import BeliefModel, EpsilonReport, PrunedMass, epsilon_persistent
from .solvers.meta import Checkpoint, SolverConfig, SolverRegistry

logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINTS = (10, 25)


@dataclass(frozen=True)
class EvaluationOptions:
    """How profiles are scored in a comparison."""

    method: str = "persistent"
    horizon_cap: Optional[int] = None
    convergence_tol: float = 1e-3
    prune_threshold: float = 0.01
    belief_model: BeliefModel = "joint"
    pruned_mass: PrunedMass = "renormalize"

    def evaluate(self, spec: GameSpec, profile: StrategyProfile) -> EpsilonReport:
        if self.method == "expost":
            return ex_post_check(spec, profile)
        if self.method != "persistent":
            raise ParameterError(f"Unknown evaluation method {self.method!r}")
        return epsilon_persistent(
            spec,
            profile,
            horizon_cap=self.horizon_cap,
            convergence_tol=self.convergence_tol,
            prune_threshold=self.prune_threshold,
            belief_model=self.belief_model,
            pruned_mass=self.pruned_mass,
        )


@dataclass(frozen=True)
class ComparisonRow:
    algorithm: str
    iteration: int
    report: EpsilonReport


@dataclass(frozen=True)
class ComparisonReport:
    """Epsilon reports per (algorithm, outer iteration)."""

    game: str
    rows: tuple[ComparisonRow, ...]

    def get(self, algorithm: str, iteration: int) -> EpsilonReport:
        for row in self.rows:
            if row.algorithm == algorithm and row.iteration == iteration:
                return row.report
        raise KeyError((algorithm, iteration))

    def final(self, algorithm: str) -> EpsilonReport:
        """Report at the last recorded iteration of ``algorithm``."""
        rows = [row for row in self.rows if row.algorithm == algorithm]
        if not rows:
            raise KeyError(algorithm)
        return max(rows, key=lambda row: row.iteration).report

    def table(self) -> list[dict[str, object]]:
        """Flat rows: one per (algorithm, iteration, player)."""
        result = []
        for row in self.rows:
            for player in row.report.players:
                result.append(
                    {
                        "algorithm": row.algorithm,
                        "iteration": row.iteration,
                        "player": player.player,
                        "profile_value": player.profile_value,
                        "optimal_value": player.optimal_value,
                        "epsilon": player.epsilon,
                    }
                )
        return result


def run_comparison(
    spec: GameSpec,
    algorithms: Sequence[str],
    checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
    config: SolverConfig | None = None,
    evaluation: EvaluationOptions | None = None,
) -> ComparisonReport:
    """Solve ``spec`` with each algorithm and score the requested iterations.

    Each algorithm runs once for ``max(checkpoints)`` outer iterations; the
    profile at every checkpoint iteration is captured and evaluated. An
    algorithm that stops early is scored at its last iteration in place of
    the checkpoints it never reached.

    Args:
        spec: The game.
        algorithms: Registered algorithm names.
        checkpoints: Outer iterations to score.
        config: Base solver settings; ``algorithm`` and ``outer_iterations``
            are overridden.
        evaluation: Scoring settings.

    Returns:
        A ComparisonReport with rows in algorithm then iteration order.
    """
    if not algorithms:
        raise ParameterError("Need at least one algorithm to compare")
    marks = sorted(set(int(c) for c in checkpoints))
    if not marks or marks[0] < 1:
        raise ParameterError(f"Checkpoints must be positive, got {list(checkpoints)}")
    for name in algorithms:
        SolverRegistry.require(name)
    base = config or SolverConfig()
    evaluation = evaluation or EvaluationOptions()

    rows: list[ComparisonRow] = []
    for name in algorithms:
        captured: dict[int, StrategyProfile] = {}

        def capture(checkpoint: Checkpoint, captured=captured) -> None:
            if checkpoint.iteration in marks:
                captured[checkpoint.iteration] = checkpoint.profile

        solver_config = base.model_copy(
            update={"algorithm": name, "outer_iterations": marks[-1]}
        )
        solver = SolverRegistry.require(name)(solver_config)
        result = solver.solve(spec, on_checkpoint=capture)
        if result.stopped_early and result.trace.last is not None:
            last = result.trace.last.outer_iteration
            for mark in marks:
                if mark > last:
                    captured.setdefault(mark, result.profile)

        for iteration in sorted(captured):
            report = evaluation.evaluate(spec, captured[iteration])
            logger.info("%s at iteration %d: epsilon %.4f", name, iteration, report.epsilon)
            rows.append(ComparisonRow(name, iteration, report))

    return ComparisonReport(spec.name, tuple(rows))
