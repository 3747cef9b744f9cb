"""Core abstractions for Equiscope."""

from .beliefs import (
    JointTypeBelief,
    marginal,
    product_belief,
    type_profiles,
)

from .graph import (
    Edge,
    StateGraph,
)

from .game import (
    GameSpec,
    StateKernel,
    Violation,
    check_game,
    validate,
)

from .strategy import (
    StageStrategy,
    StrategyProfile,
)

from .values import (
    ValueMode,
    ValueTable,
)

from .trace import (
    ConvergenceTrace,
    TraceRow,
)

from .registry import Registry

from .summary import compute_summary, support_sizes

__all__ = [
    # beliefs.py
    "JointTypeBelief",
    "marginal",
    "product_belief",
    "type_profiles",
    # graph.py
    "Edge",
    "StateGraph",
    # game.py
    "GameSpec",
    "StateKernel",
    "Violation",
    "check_game",
    "validate",
    # strategy.py
    "StageStrategy",
    "StrategyProfile",
    # values.py
    "ValueMode",
    "ValueTable",
    # trace.py
    "ConvergenceTrace",
    "TraceRow",
    # registry.py
    "Registry",
    # summary.py
    "compute_summary",
    "support_sizes",
]
