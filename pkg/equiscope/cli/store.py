"""On-disk layout of a solver run."""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Optional, cast

from ..core.game import GameSpec
from ..solvers.meta import Checkpoint, SolveResult, SolverConfig
from .artifacts import (
    checkpoint_to_document,
    document_to_checkpoint,
    game_to_document,
    profile_to_document,
    read_artifact,
    values_to_document,
    write_artifact,
    write_trace_csv,
)
from .schemas import CheckpointDocument

logger = logging.getLogger(__name__)

CHECKPOINT_PATTERN = re.compile(r"iter-(\d{4,})\.json$")


class RunStore:
    """Files of one run directory.

    Layout::

        game.json
        checkpoints/iter-0001.json ...
        strategy.json
        values.json
        trace.csv
    """

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)

    @property
    def game_path(self) -> Path:
        return self.root / "game.json"

    @property
    def checkpoint_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def strategy_path(self) -> Path:
        return self.root / "strategy.json"

    @property
    def values_path(self) -> Path:
        return self.root / "values.json"

    @property
    def trace_path(self) -> Path:
        return self.root / "trace.csv"

    def checkpoint_path(self, iteration: int) -> Path:
        return self.checkpoint_dir / f"iter-{iteration:04d}.json"

    def save_game(self, spec: GameSpec) -> Path:
        return write_artifact(self.game_path, game_to_document(spec))

    def save_checkpoint(
        self, checkpoint: Checkpoint, config: SolverConfig, spec: GameSpec
    ) -> Path:
        path = self.checkpoint_path(checkpoint.iteration)
        write_artifact(path, checkpoint_to_document(checkpoint, config, spec.name))
        # Keep the trace current so an interrupted run still leaves one.
        write_trace_csv(self.trace_path, checkpoint.trace)
        return path

    def checkpoints(self) -> list[Path]:
        """Checkpoint files in iteration order."""
        if not self.checkpoint_dir.is_dir():
            return []
        found = []
        for path in self.checkpoint_dir.iterdir():
            match = CHECKPOINT_PATTERN.match(path.name)
            if match:
                found.append((int(match.group(1)), path))
        return [path for _, path in sorted(found)]

    def latest_checkpoint(self) -> Optional[Path]:
        paths = self.checkpoints()
        return paths[-1] if paths else None

    def load_checkpoint(
        self, path: Path, spec: GameSpec | None = None
    ) -> tuple[Checkpoint, SolverConfig]:
        document = cast(CheckpointDocument, read_artifact(path, kind="checkpoint"))
        return document_to_checkpoint(document, spec)

    def save_result(self, result: SolveResult, spec: GameSpec) -> None:
        """Write the final strategy, values and trace."""
        write_artifact(self.strategy_path, profile_to_document(result.profile, spec.name))
        write_artifact(self.values_path, values_to_document(result.values, spec.name))
        write_trace_csv(self.trace_path, result.trace)
        logger.info("Wrote results to %s", self.root)

    def __repr__(self) -> str:
        return f"RunStore(root={str(self.root)!r})"
