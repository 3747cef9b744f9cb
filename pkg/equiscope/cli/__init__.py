"""Command-line interface, artifact formats and run storage."""

from .artifacts import canonical_json, read_artifact, write_artifact
from .main import build_parser, main
from .store import RunStore

__all__ = [
    "RunStore",
    "build_parser",
    "canonical_json",
    "main",
    "read_artifact",
    "write_artifact",
]
