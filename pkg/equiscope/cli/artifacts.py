"""Reading and writing artifact files.

Structured artifacts are canonical JSON: sorted keys, two-space indent,
floats in shortest round-trip form. Loading a file and writing it back
reproduces it byte for byte. Traces and horizon series are CSV.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from ..core.beliefs import JointTypeBelief
from ..core.game import GameSpec, StateKernel, check_game
from ..core.strategy import StrategyProfile
from ..core.trace import ConvergenceTrace, TraceRow
from ..core.values import ValueMode, ValueTable
from ..errors import ArtifactError
from ..evaluation.persistent import EpsilonReport, HorizonValue, PlayerEpsilon
from ..experiment import ComparisonReport
from ..solvers.meta import Checkpoint, SolverConfig
from .schemas import (
    DOCUMENT_KINDS,
    ArtifactDocument,
    CheckpointDocument,
    ComparisonDocument,
    ComparisonRowSchema,
    EpsilonReportBody,
    EpsilonReportDocument,
    GameDocument,
    HorizonValueSchema,
    KernelSchema,
    PlayerEpsilonSchema,
    StrategyDocument,
    TraceRowSchema,
    ValuesDocument,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Rows off by more than this are rewritten on load; beyond the second bound
# the file is rejected.
RENORMALIZE_TOLERANCE = 1e-12
REJECT_TOLERANCE = 1e-9

TRACE_COLUMNS = (
    "outer_iteration",
    "max_strategy_delta",
    "max_value_delta",
    "epsilon",
    "wall_seconds",
)


# ============================================================================
# Canonical JSON
# ============================================================================


def canonical_json(document: ArtifactDocument) -> str:
    payload = document.model_dump(by_alias=True)
    try:
        text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    except ValueError as exc:
        raise ArtifactError(f"{document.kind} contains a non-finite number") from exc
    return text + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_artifact(path: PathLike, document: ArtifactDocument) -> Path:
    """Write ``document`` as canonical JSON, replacing ``path`` atomically."""
    path = Path(path)
    _atomic_write(path, canonical_json(document))
    logger.debug("Wrote %s artifact to %s", document.kind, path)
    return path


def read_artifact(path: PathLike, kind: str | None = None) -> ArtifactDocument:
    """Load an artifact file, dispatching on its ``kind`` field.

    Args:
        path: File to read.
        kind: Required kind; None accepts any known kind.

    Returns:
        The validated document.

    Raises:
        ArtifactError: If the file is not JSON, has an unknown or unexpected
            kind, or fails schema validation.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ArtifactError(f"{path}: missing 'kind' field")
    found = payload["kind"]
    model = DOCUMENT_KINDS.get(found)
    if model is None:
        raise ArtifactError(
            f"{path}: unknown artifact kind {found!r}; known kinds are "
            f"{sorted(DOCUMENT_KINDS)}"
        )
    if kind is not None and found != kind:
        raise ArtifactError(f"{path}: expected a {kind} artifact, found {found}")
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        raise ArtifactError(f"{path}: invalid {found} artifact\n{exc}") from exc


# ============================================================================
# Games
# ============================================================================


def game_to_document(spec: GameSpec) -> GameDocument:
    return GameDocument(
        name=spec.name,
        players=list(spec.players),
        type_counts=list(spec.type_counts),
        type_labels=None
        if spec.type_labels is None
        else [list(labels) for labels in spec.type_labels],
        prior=spec.prior.mass.tolist(),
        states=list(spec.states),
        terminals=list(spec.terminals),
        root=spec.root,
        topological_order=list(spec.topological_order),
        kernels=[
            KernelSchema(
                action_counts=list(kernel.action_counts),
                successors=kernel.successors.tolist(),
                probs=kernel.probs.tolist(),
            )
            for kernel in spec.kernels
        ],
        terminal_payoffs=spec.terminal_payoffs.tolist(),
    )


def _renormalized_kernel(probs: np.ndarray) -> np.ndarray:
    """Rescale rows off by at most 1e-9; larger errors are left for validation."""
    if probs.ndim == 0:
        return probs
    sums = probs.sum(axis=-1, keepdims=True)
    error = np.abs(sums - 1.0)
    fix = (error > RENORMALIZE_TOLERANCE) & (error <= REJECT_TOLERANCE)
    if np.any(fix):
        return np.divide(probs, sums, out=probs.copy(), where=fix)
    return probs


def document_to_game(document: GameDocument) -> GameSpec:
    """Rebuild and validate a game.

    Transition rows within 1e-9 of summing to one are rescaled to sum to one.

    Raises:
        InvalidGameError: If the game breaks any invariant.
        ArtifactError: If an array is ragged.
    """
    try:
        kernels = tuple(
            StateKernel(
                tuple(kernel.action_counts),
                np.asarray(kernel.successors, dtype=np.int64),
                _renormalized_kernel(np.asarray(kernel.probs, dtype=np.float64)),
            )
            for kernel in document.kernels
        )
        payoffs = np.asarray(document.terminal_payoffs, dtype=np.float64)
        prior = JointTypeBelief(tuple(document.type_counts), document.prior)
    except ValueError as exc:
        raise ArtifactError(f"Game {document.name!r}: {exc}") from exc
    spec = GameSpec(
        players=tuple(document.players),
        type_counts=tuple(document.type_counts),
        prior=prior,
        states=tuple(document.states),
        terminals=tuple(document.terminals),
        kernels=kernels,
        terminal_payoffs=payoffs,
        topological_order=tuple(document.topological_order),
        root=document.root,
        type_labels=None
        if document.type_labels is None
        else tuple(tuple(labels) for labels in document.type_labels),
        name=document.name,
    )
    return check_game(spec)


# ============================================================================
# Strategies and values
# ============================================================================


def _strategy_lists(profile: StrategyProfile) -> list[list[list[list[float]]]]:
    return [[strategy.tolist() for strategy in stage] for stage in profile.dist]


def _renormalized(rows: np.ndarray, where: str) -> np.ndarray:
    sums = rows.sum(axis=-1, keepdims=True)
    error = np.abs(sums - 1.0)
    if np.any(error > REJECT_TOLERANCE):
        raise ArtifactError(f"{where}: strategy row sums to {float(sums.max())!r}")
    if np.any(error > RENORMALIZE_TOLERANCE):
        return np.where(error > RENORMALIZE_TOLERANCE, rows / sums, rows)
    return rows


def _profile_from_lists(
    strategies: Sequence[Sequence[Sequence[Sequence[float]]]],
    spec: GameSpec | None,
) -> StrategyProfile:
    stages = []
    for state, stage in enumerate(strategies):
        name = spec.states[state] if spec is not None and state < spec.num_states else state
        arrays = []
        for player, rows in enumerate(stage):
            try:
                array = np.asarray(rows, dtype=np.float64)
            except ValueError as exc:
                raise ArtifactError(f"State {name} player {player}: {exc}") from exc
            if array.ndim != 2 or np.any(array < 0):
                raise ArtifactError(
                    f"State {name} player {player}: expected nonnegative "
                    "(types, actions) rows"
                )
            arrays.append(_renormalized(array, f"State {name} player {player}"))
        stages.append(tuple(arrays))
    profile = StrategyProfile(tuple(stages))
    if spec is not None:
        problems = profile.violations(spec)
        if problems:
            raise ArtifactError(
                f"Strategy does not match game {spec.name!r}: " + "; ".join(problems[:5])
            )
    return profile


def profile_to_document(profile: StrategyProfile, game: str) -> StrategyDocument:
    return StrategyDocument(game=game, strategies=_strategy_lists(profile))


def document_to_profile(
    document: StrategyDocument, spec: GameSpec | None = None
) -> StrategyProfile:
    """Rebuild a profile, checking it against ``spec`` when given."""
    return _profile_from_lists(document.strategies, spec)


def values_to_document(table: ValueTable, game: str) -> ValuesDocument:
    return ValuesDocument(game=game, mode=table.mode.value, values=table.values.tolist())


def document_to_values(document: ValuesDocument) -> ValueTable:
    try:
        return ValueTable(ValueMode(document.mode), np.asarray(document.values))
    except ValueError as exc:
        raise ArtifactError(f"Value table for {document.game!r}: {exc}") from exc


# ============================================================================
# Checkpoints
# ============================================================================


def checkpoint_to_document(
    checkpoint: Checkpoint, config: SolverConfig, game: str
) -> CheckpointDocument:
    return CheckpointDocument(
        game=game,
        algorithm=config.algorithm,
        config=config.model_dump(mode="json"),
        iteration=checkpoint.iteration,
        strategies=_strategy_lists(checkpoint.profile),
        mode=checkpoint.values.mode.value,
        values=checkpoint.values.values.tolist(),
        beliefs=np.asarray(checkpoint.beliefs).tolist(),
        trace=[TraceRowSchema(**vars(row)) for row in checkpoint.trace.rows],
    )


def document_to_checkpoint(
    document: CheckpointDocument, spec: GameSpec | None = None
) -> tuple[Checkpoint, SolverConfig]:
    """Rebuild a checkpoint and the solver settings that produced it."""
    try:
        config = SolverConfig.model_validate(document.config)
        values = ValueTable(ValueMode(document.mode), np.asarray(document.values))
        trace = ConvergenceTrace(
            tuple(TraceRow(**row.model_dump()) for row in document.trace)
        )
    except (ValueError, ValidationError) as exc:
        raise ArtifactError(f"Checkpoint {document.iteration}: {exc}") from exc
    checkpoint = Checkpoint(
        iteration=document.iteration,
        profile=_profile_from_lists(document.strategies, spec),
        values=values,
        beliefs=np.asarray(document.beliefs, dtype=np.float64),
        trace=trace,
    )
    return checkpoint, config


# ============================================================================
# Epsilon reports
# ============================================================================


def _report_body(report: EpsilonReport) -> dict[str, Any]:
    return {
        "method": report.method,
        "epsilon": report.epsilon,
        "converged": report.converged,
        "horizon": report.horizon,
        "prune_threshold": report.prune_threshold,
        "belief_model": report.belief_model,
        "players": [
            PlayerEpsilonSchema(
                player=row.player,
                profile_value=row.profile_value,
                optimal_value=row.optimal_value,
                epsilon=row.epsilon,
                profile_type_values=list(row.profile_type_values),
                optimal_type_values=list(row.optimal_type_values),
            )
            for row in report.players
        ],
        "series": [
            HorizonValueSchema(
                horizon=point.horizon,
                values=None if point.values is None else list(point.values),
            )
            for point in report.series
        ],
    }


def report_to_document(report: EpsilonReport, game: str) -> EpsilonReportDocument:
    return EpsilonReportDocument(game=game, **_report_body(report))


def document_to_report(document: EpsilonReportBody) -> EpsilonReport:
    return EpsilonReport(
        method=document.method,
        players=tuple(
            PlayerEpsilon(
                player=row.player,
                profile_value=row.profile_value,
                optimal_value=row.optimal_value,
                profile_type_values=tuple(row.profile_type_values),
                optimal_type_values=tuple(row.optimal_type_values),
            )
            for row in document.players
        ),
        converged=document.converged,
        horizon=document.horizon,
        series=tuple(
            HorizonValue(point.horizon, None if point.values is None else tuple(point.values))
            for point in document.series
        ),
        prune_threshold=document.prune_threshold,
        belief_model=document.belief_model,
    )


def comparison_to_document(comparison: ComparisonReport) -> ComparisonDocument:
    return ComparisonDocument(
        game=comparison.game,
        rows=[
            ComparisonRowSchema(
                algorithm=row.algorithm,
                iteration=row.iteration,
                report=EpsilonReportBody(**_report_body(row.report)),
            )
            for row in comparison.rows
        ],
    )


# ============================================================================
# CSV outputs
# ============================================================================


def _write_csv(path: PathLike, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_trace_csv(path: PathLike, trace: ConvergenceTrace) -> Path:
    """One row per outer iteration; ``epsilon`` is empty when not computed."""
    rows = [
        [
            row.outer_iteration,
            _cell(row.max_strategy_delta),
            _cell(row.max_value_delta),
            _cell(row.epsilon),
            _cell(row.wall_seconds),
        ]
        for row in trace.rows
    ]
    return _write_csv(path, TRACE_COLUMNS, rows)


def read_trace_csv(path: PathLike) -> ConvergenceTrace:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ArtifactError(f"{path}: unexpected trace columns {reader.fieldnames}")
        rows = [
            TraceRow(
                outer_iteration=int(record["outer_iteration"]),
                max_strategy_delta=float(record["max_strategy_delta"]),
                max_value_delta=float(record["max_value_delta"]),
                epsilon=float(record["epsilon"]) if record["epsilon"] else None,
                wall_seconds=float(record["wall_seconds"]),
            )
            for record in reader
        ]
    return ConvergenceTrace(tuple(rows))


def write_series_csv(path: PathLike, report: EpsilonReport) -> Path:
    """Best-response value of every player at each horizon tried."""
    header = ["horizon"] + [row.player for row in report.players]
    rows = []
    for point in report.series:
        values = point.values or (None,) * len(report.players)
        rows.append([point.horizon] + [_cell(v) for v in values])
    return _write_csv(path, header, rows)


def write_comparison_csv(path: PathLike, comparison: ComparisonReport) -> Path:
    header = ["algorithm", "iteration", "player", "profile_value", "optimal_value", "epsilon"]
    rows = [
        [
            entry["algorithm"],
            entry["iteration"],
            entry["player"],
            _cell(entry["profile_value"]),
            _cell(entry["optimal_value"]),
            _cell(entry["epsilon"]),
        ]
        for entry in comparison.table()
    ]
    return _write_csv(path, header, rows)
