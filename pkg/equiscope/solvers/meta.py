"""Outer-loop solvers combining fictitious play with value updates.

Four algorithms share one loop. Each outer iteration solves every stage
game with fictitious play, refreshes the type beliefs and re-evaluates the
values of the new profile exactly:

- ``st-pifp``: sequential over the topological order; the belief at a state
  comes from strategies already updated in the current iteration.
- ``st-pifp-tdv``: as ``st-pifp`` with values keyed by joint type vector.
- ``parallel-pifp-ii``: all stages solved concurrently under stale beliefs
  derived from the previous iteration's profile.
- ``parallel-pifp``: the perfect-information case (one type per player).
"""

from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from collections import deque
from concurrent.futures import Future, ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from ..core.game import GameSpec
from ..core.registry import Registry
from ..core.strategy import StageStrategy, StrategyProfile
from ..core.trace import ConvergenceTrace, TraceRow
from ..core.values import ValueMode, ValueTable
from ..errors import ParameterError, UnsupportedGameError
from .beliefs import BeliefPropagation, ReachAccumulator, propagate, stale_beliefs
from .stage import StageGame, build_stage, fictitious_play
from .values import evaluate_strategies, evaluate_strategies_tdv

if TYPE_CHECKING:
    from ..evaluation.persistent import EpsilonReport

logger = logging.getLogger(__name__)

Algorithm = Literal["st-pifp", "st-pifp-tdv", "parallel-pifp-ii", "parallel-pifp"]
ALGORITHMS: tuple[str, ...] = ("st-pifp", "st-pifp-tdv", "parallel-pifp-ii", "parallel-pifp")


class SolverConfig(BaseModel):
    """Settings of an outer-loop solve.

    Attributes:
        algorithm: Which outer loop to run.
        fp_iterations: Fictitious play iterations per stage solve.
        outer_iterations: Number of outer (value update) iterations.
        workers: Worker processes for the parallel algorithms.
        value_init: Initial values: zeros, seeded random, or a caller table.
        value_seed: Seed for ``value_init="random"``.
        early_stop_delta: Stop once the strategy delta falls below this.
        epsilon_every: Compute epsilon every this many iterations (0 = never).
        epsilon_horizon_cap: Horizon cap for traced epsilon (None = K).
        epsilon_prune: Prune threshold for traced epsilon.
        progress: Show a progress bar over outer iterations.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    algorithm: Algorithm = "st-pifp"
    fp_iterations: int = Field(default=10_000, ge=1)
    outer_iterations: int = Field(default=25, ge=1)
    workers: int = Field(default=1, ge=1)
    value_init: Literal["zero", "random", "custom"] = "zero"
    value_seed: int = 0
    early_stop_delta: Optional[float] = Field(default=None, gt=0)
    epsilon_every: int = Field(default=0, ge=0)
    epsilon_horizon_cap: Optional[int] = Field(default=None, ge=0)
    epsilon_prune: float = Field(default=0.01, ge=0)
    progress: bool = False


@dataclass(frozen=True, eq=False)
class Checkpoint:
    """Solver state after a completed outer iteration."""

    iteration: int
    profile: StrategyProfile
    values: ValueTable
    beliefs: np.ndarray
    trace: ConvergenceTrace


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Output of an outer-loop solve."""

    profile: StrategyProfile
    values: ValueTable
    trace: ConvergenceTrace
    beliefs: np.ndarray
    stopped_early: bool = False

    def __iter__(self):
        return iter((self.profile, self.values, self.trace))


CheckpointHook = Callable[[Checkpoint], None]


class SolverRegistry(Registry[type]):
    """Outer-loop solver classes by algorithm name."""

    kind = "algorithm"


def register_solver(name: str) -> Callable[[type], type]:
    """Decorator registering a Solver subclass under ``name``."""
    return SolverRegistry.register(name)


class Solver(ABC):
    """Abstract outer loop.

    Subclasses decide how stage games are scheduled and which beliefs they
    see (``solve_stages``) and may override how values are updated.
    """

    value_mode = ValueMode.STATE

    def __init__(self, config: SolverConfig) -> None:
        self.config = config

    @property
    @abstractmethod
    def name(self) -> str:
        """Algorithm name."""

    def check(self, spec: GameSpec) -> None:
        """Reject games the algorithm cannot handle."""

    @abstractmethod
    def solve_stages(
        self,
        spec: GameSpec,
        previous: StrategyProfile | None,
        values: ValueTable,
    ) -> tuple[StrategyProfile, BeliefPropagation]:
        """Solve every stage game once.

        Args:
            spec: The game.
            previous: Profile of the previous outer iteration (None at first).
            values: Continuation values of the previous outer iteration.

        Returns:
            The new profile and the beliefs the stages were solved under.
        """

    def refresh_beliefs(
        self, spec: GameSpec, profile: StrategyProfile, used: BeliefPropagation
    ) -> BeliefPropagation:
        """Beliefs for the value update; defaults to a fresh propagation."""
        return propagate(spec, profile)

    def update_values(
        self, spec: GameSpec, profile: StrategyProfile, beliefs: BeliefPropagation
    ) -> ValueTable:
        return evaluate_strategies(spec, profile, beliefs.beliefs)

    def initial_values(
        self, spec: GameSpec, initial_values: ValueTable | None
    ) -> ValueTable:
        init = self.config.value_init
        if initial_values is not None:
            return initial_values.as_mode(spec, self.value_mode)
        if init == "custom":
            raise ParameterError("value_init='custom' needs an initial value table")
        if init == "random":
            return ValueTable.random(spec, self.config.value_seed, self.value_mode)
        return ValueTable.zeros(spec, self.value_mode)

    def solve(
        self,
        spec: GameSpec,
        initial_values: ValueTable | None = None,
        resume: Checkpoint | None = None,
        on_checkpoint: CheckpointHook | None = None,
    ) -> SolveResult:
        """Run the outer loop.

        Args:
            spec: A validated game.
            initial_values: Warm-start values (any mode).
            resume: Continue after this checkpoint instead of starting over.
            on_checkpoint: Called after every outer iteration.

        Returns:
            The final profile, values, trace and beliefs.

        Raises:
            UnsupportedGameError: If the algorithm cannot handle ``spec``.
            ParameterError: If the configuration is inconsistent.
        """
        self.check(spec)
        config = self.config
        if resume is not None:
            start = resume.iteration + 1
            profile: StrategyProfile | None = resume.profile
            values = resume.values.as_mode(spec, self.value_mode)
            trace = resume.trace
            beliefs = resume.beliefs
            logger.info("%s: resuming after iteration %d", self.name, resume.iteration)
        else:
            start = 1
            profile = None
            values = self.initial_values(spec, initial_values)
            trace = ConvergenceTrace()
            beliefs = np.tile(spec.prior.mass, (spec.num_states, 1))

        stopped_early = False
        iterations = tqdm(
            range(start, config.outer_iterations + 1),
            total=config.outer_iterations,
            initial=start - 1,
            desc=self.name,
            disable=not config.progress,
        )
        for iteration in iterations:
            started = time.perf_counter()
            new_profile, used = self.solve_stages(spec, profile, values)
            refreshed = self.refresh_beliefs(spec, new_profile, used)
            new_values = self.update_values(spec, new_profile, refreshed)

            strategy_delta = new_profile.max_delta(
                profile if profile is not None else StrategyProfile.uniform(spec)
            )
            value_delta = new_values.max_delta(values)
            epsilon = None
            if config.epsilon_every and iteration % config.epsilon_every == 0:
                epsilon = self._epsilon(spec, new_profile).epsilon

            row = TraceRow(
                outer_iteration=iteration,
                max_strategy_delta=strategy_delta,
                max_value_delta=value_delta,
                epsilon=epsilon,
                wall_seconds=time.perf_counter() - started,
            )
            trace = trace.appended(row)
            profile, values, beliefs = new_profile, new_values, refreshed.beliefs
            logger.info(
                "%s iteration %d: strategy delta %.3e, value delta %.3e%s (%.2fs)",
                self.name,
                iteration,
                strategy_delta,
                value_delta,
                "" if epsilon is None else f", epsilon {epsilon:.4f}",
                row.wall_seconds,
            )
            if on_checkpoint is not None:
                on_checkpoint(Checkpoint(iteration, profile, values, beliefs, trace))
            if config.early_stop_delta is not None and strategy_delta < config.early_stop_delta:
                logger.info(
                    "%s: strategy delta %.3e below %.3e, stopping after iteration %d",
                    self.name,
                    strategy_delta,
                    config.early_stop_delta,
                    iteration,
                )
                stopped_early = True
                break

        if profile is None:
            profile = StrategyProfile.uniform(spec)
        return SolveResult(profile, values, trace, beliefs, stopped_early)

    def _epsilon(self, spec: GameSpec, profile: StrategyProfile) -> EpsilonReport:
        from ..evaluation.persistent import epsilon_persistent

        return epsilon_persistent(
            spec,
            profile,
            horizon_cap=self.config.epsilon_horizon_cap,
            prune_threshold=self.config.epsilon_prune,
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r})"


# ============================================================================
# Sequential topological solvers
# ============================================================================


@register_solver("st-pifp")
class SequentialTopologicalSolver(Solver):
    """Solves stages in topological order with freshly propagated beliefs."""

    @property
    def name(self) -> str:
        return "st-pifp"

    def solve_stages(
        self,
        spec: GameSpec,
        previous: StrategyProfile | None,
        values: ValueTable,
    ) -> tuple[StrategyProfile, BeliefPropagation]:
        stages = list((previous or StrategyProfile.uniform(spec)).dist)
        accumulator = ReachAccumulator(spec, strict=True)
        for state in spec.topological_order:
            belief = accumulator.belief(state)
            stage = build_stage(spec, state, values, belief)
            stages[state] = fictitious_play(stage, self.config.fp_iterations)
            accumulator.push(state, stages[state])
        return StrategyProfile(tuple(stages)), accumulator.result()

    def refresh_beliefs(
        self, spec: GameSpec, profile: StrategyProfile, used: BeliefPropagation
    ) -> BeliefPropagation:
        # Already consistent with the new profile at every state.
        return used


@register_solver("st-pifp-tdv")
class TypeDependentSolver(SequentialTopologicalSolver):
    """Sequential solver whose values are keyed by joint type vector."""

    value_mode = ValueMode.TYPE_DEPENDENT

    @property
    def name(self) -> str:
        return "st-pifp-tdv"

    def update_values(
        self, spec: GameSpec, profile: StrategyProfile, beliefs: BeliefPropagation
    ) -> ValueTable:
        return evaluate_strategies_tdv(spec, profile)


# ============================================================================
# Parallel solvers
# ============================================================================


def _solve_stage(stage: StageGame, iterations: int) -> StageStrategy:
    return fictitious_play(stage, iterations)


@register_solver("parallel-pifp-ii")
class ParallelStaleSolver(Solver):
    """Solves all stages concurrently under stale beliefs.

    One process pool serves the whole solve. Each stage game is submitted as
    soon as the parent has built it, with at most ``4 * workers`` stages in
    flight; results are collected in state order, so the output does not
    depend on scheduling.
    """

    def __init__(self, config: SolverConfig) -> None:
        super().__init__(config)
        self._pool: ProcessPoolExecutor | None = None

    @property
    def name(self) -> str:
        return "parallel-pifp-ii"

    def solve(
        self,
        spec: GameSpec,
        initial_values: ValueTable | None = None,
        resume: Checkpoint | None = None,
        on_checkpoint: CheckpointHook | None = None,
    ) -> SolveResult:
        if self.config.workers == 1:
            return super().solve(spec, initial_values, resume, on_checkpoint)
        with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
            self._pool = pool
            try:
                return super().solve(spec, initial_values, resume, on_checkpoint)
            finally:
                self._pool = None

    def solve_stages(
        self,
        spec: GameSpec,
        previous: StrategyProfile | None,
        values: ValueTable,
    ) -> tuple[StrategyProfile, BeliefPropagation]:
        stale = stale_beliefs(spec, previous)
        solved: list[StageStrategy | None] = [None] * spec.num_states
        iterations = self.config.fp_iterations

        def build(state: int) -> StageGame:
            return build_stage(spec, state, values, stale.belief(state, spec.type_counts))

        if self._pool is None:
            for state in spec.topological_order:
                solved[state] = _solve_stage(build(state), iterations)
            return StrategyProfile(tuple(solved)), stale

        window = 4 * self.config.workers
        pending: deque[tuple[int, Future[StageStrategy]]] = deque()
        for state in spec.topological_order:
            pending.append((state, self._pool.submit(_solve_stage, build(state), iterations)))
            if len(pending) >= window:
                done, future = pending.popleft()
                solved[done] = future.result()
        for done, future in pending:
            solved[done] = future.result()
        return StrategyProfile(tuple(solved)), stale


@register_solver("parallel-pifp")
class PerfectInformationSolver(ParallelStaleSolver):
    """Parallel solver for games where every player has a single type."""

    @property
    def name(self) -> str:
        return "parallel-pifp"

    def check(self, spec: GameSpec) -> None:
        if any(t != 1 for t in spec.type_counts):
            raise UnsupportedGameError(
                f"parallel-pifp needs one type per player, game has type counts "
                f"{spec.type_counts}; use st-pifp, st-pifp-tdv or parallel-pifp-ii"
            )


# ============================================================================
# Convenience entry points
# ============================================================================


def solve(
    spec: GameSpec,
    config: SolverConfig | None = None,
    initial_values: ValueTable | None = None,
    resume: Checkpoint | None = None,
    on_checkpoint: CheckpointHook | None = None,
) -> SolveResult:
    """Run the algorithm named in ``config``."""
    config = config or SolverConfig()
    solver = SolverRegistry.require(config.algorithm)(config)
    return solver.solve(spec, initial_values, resume, on_checkpoint)


def _solve_with(algorithm: str, spec: GameSpec, config: SolverConfig | None, **kwargs) -> SolveResult:
    config = (config or SolverConfig()).model_copy(update={"algorithm": algorithm})
    return solve(spec, config, **kwargs)


def solve_st_pifp(spec: GameSpec, config: SolverConfig | None = None, **kwargs) -> SolveResult:
    return _solve_with("st-pifp", spec, config, **kwargs)


def solve_st_pifp_tdv(spec: GameSpec, config: SolverConfig | None = None, **kwargs) -> SolveResult:
    return _solve_with("st-pifp-tdv", spec, config, **kwargs)


def solve_parallel_stale(spec: GameSpec, config: SolverConfig | None = None, **kwargs) -> SolveResult:
    return _solve_with("parallel-pifp-ii", spec, config, **kwargs)


def solve_perfect_info(spec: GameSpec, config: SolverConfig | None = None, **kwargs) -> SolveResult:
    return _solve_with("parallel-pifp", spec, config, **kwargs)
