"""Stage solving, belief propagation, value updates and outer loops."""

from .stage import (
    StageGame,
    build_stage,
    fictitious_play,
    stage_epsilon,
)

from .beliefs import (
    BeliefPropagation,
    ReachAccumulator,
    ReachMass,
    propagate,
    stale_beliefs,
)

from .values import (
    evaluate_strategies,
    evaluate_strategies_tdv,
    solve_linear_system,
)

from .meta import (
    ALGORITHMS,
    Checkpoint,
    ParallelStaleSolver,
    PerfectInformationSolver,
    SequentialTopologicalSolver,
    SolveResult,
    Solver,
    SolverConfig,
    SolverRegistry,
    TypeDependentSolver,
    register_solver,
    solve,
    solve_parallel_stale,
    solve_perfect_info,
    solve_st_pifp,
    solve_st_pifp_tdv,
)

__all__ = [
    # stage.py
    "StageGame",
    "build_stage",
    "fictitious_play",
    "stage_epsilon",
    # beliefs.py
    "BeliefPropagation",
    "ReachAccumulator",
    "ReachMass",
    "propagate",
    "stale_beliefs",
    # values.py
    "evaluate_strategies",
    "evaluate_strategies_tdv",
    "solve_linear_system",
    # meta.py
    "ALGORITHMS",
    "Checkpoint",
    "ParallelStaleSolver",
    "PerfectInformationSolver",
    "SequentialTopologicalSolver",
    "SolveResult",
    "Solver",
    "SolverConfig",
    "SolverRegistry",
    "TypeDependentSolver",
    "register_solver",
    "solve",
    "solve_parallel_stale",
    "solve_perfect_info",
    "solve_st_pifp",
    "solve_st_pifp_tdv",
]
