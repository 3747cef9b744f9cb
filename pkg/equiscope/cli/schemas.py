"""Pydantic documents for Equiscope artifact files."""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..scenarios.hostility import HostilityGameParams

FORMAT_VERSION = 1


class ArtifactDocument(BaseModel):
    """Common header of every artifact file."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    format_version: int = Field(default=FORMAT_VERSION, alias="formatVersion")
    kind: str


class ParamsDocument(ArtifactDocument):
    """Hostility Game parameters, as written by ``gen``."""

    kind: Literal["hostility-params"] = "hostility-params"
    params: HostilityGameParams


class KernelSchema(BaseModel):
    """Transition kernel of one nonterminal state."""

    model_config = ConfigDict(extra="forbid")

    action_counts: List[int]
    successors: List[Any]  # nested (*action_counts, branches)
    probs: List[Any]  # nested (joint types, *action_counts, branches)


class GameDocument(ArtifactDocument):
    """A fully built game."""

    kind: Literal["game-spec"] = "game-spec"
    name: str
    players: List[str]
    type_counts: List[int]
    type_labels: Optional[List[List[str]]] = None
    prior: List[float]
    states: List[str]
    terminals: List[str]
    root: int = 0
    topological_order: List[int]
    kernels: List[KernelSchema]
    terminal_payoffs: List[List[List[float]]]


class StrategyDocument(ArtifactDocument):
    """Strategy profile: ``strategies[state][player][type][action]``."""

    kind: Literal["strategy"] = "strategy"
    game: str
    strategies: List[List[List[List[float]]]]


class ValuesDocument(ArtifactDocument):
    """Value table of the nonterminal states."""

    kind: Literal["values"] = "values"
    game: str
    mode: Literal["state-values", "type-dependent-values"]
    values: List[Any]


class TraceRowSchema(BaseModel):
    """One outer iteration of a convergence trace."""

    model_config = ConfigDict(extra="forbid")

    outer_iteration: int
    max_strategy_delta: float
    max_value_delta: float
    epsilon: Optional[float] = None
    wall_seconds: float


class CheckpointDocument(ArtifactDocument):
    """Solver state after an outer iteration."""

    kind: Literal["checkpoint"] = "checkpoint"
    game: str
    algorithm: str
    config: Dict[str, Any]
    iteration: int
    strategies: List[List[List[List[float]]]]
    mode: Literal["state-values", "type-dependent-values"]
    values: List[Any]
    beliefs: List[List[float]]
    trace: List[TraceRowSchema]


class PlayerEpsilonSchema(BaseModel):
    """Deviation gain of one player."""

    model_config = ConfigDict(extra="forbid")

    player: str
    profile_value: float
    optimal_value: float
    epsilon: float
    profile_type_values: List[Optional[float]] = Field(default_factory=list)
    optimal_type_values: List[Optional[float]] = Field(default_factory=list)


class HorizonValueSchema(BaseModel):
    """Best-response values of every player at one horizon."""

    model_config = ConfigDict(extra="forbid")

    horizon: int
    values: Optional[List[float]] = None


class EpsilonReportBody(BaseModel):
    """Epsilon report content, shared by reports and comparisons."""

    model_config = ConfigDict(extra="forbid")

    method: Literal["persistent", "expost"]
    epsilon: float
    converged: bool
    horizon: Optional[int] = None
    prune_threshold: float
    belief_model: str
    players: List[PlayerEpsilonSchema]
    series: List[HorizonValueSchema] = Field(default_factory=list)


class EpsilonReportDocument(ArtifactDocument, EpsilonReportBody):
    """Output of ``eval``."""

    kind: Literal["epsilon-report"] = "epsilon-report"
    game: str


class ComparisonRowSchema(BaseModel):
    """One (algorithm, iteration) entry of a comparison."""

    model_config = ConfigDict(extra="forbid")

    algorithm: str
    iteration: int
    report: EpsilonReportBody


class ComparisonDocument(ArtifactDocument):
    """Output of ``compare``."""

    kind: Literal["comparison"] = "comparison"
    game: str
    rows: List[ComparisonRowSchema]


DOCUMENT_KINDS: Dict[str, type[ArtifactDocument]] = {
    "hostility-params": ParamsDocument,
    "game-spec": GameDocument,
    "strategy": StrategyDocument,
    "values": ValuesDocument,
    "checkpoint": CheckpointDocument,
    "epsilon-report": EpsilonReportDocument,
    "comparison": ComparisonDocument,
}
