"""Tests for artifact files."""

import json

import numpy as np
import pytest

from equiscope.cli.artifacts import (
    canonical_json,
    checkpoint_to_document,
    document_to_checkpoint,
    document_to_game,
    document_to_profile,
    document_to_report,
    document_to_values,
    game_to_document,
    profile_to_document,
    read_artifact,
    read_trace_csv,
    report_to_document,
    values_to_document,
    write_artifact,
    write_series_csv,
    write_trace_csv,
)
from equiscope.cli.schemas import ParamsDocument, StrategyDocument, ValuesDocument
from equiscope.cli.store import RunStore
from equiscope.core import ConvergenceTrace, TraceRow, ValueMode, ValueTable
from equiscope.errors import ArtifactError, InvalidGameError
from equiscope.evaluation import epsilon_persistent
from equiscope.scenarios import SizeProfile, generate_synthetic
from equiscope.solvers import SolverConfig, solve

from ..toy_games import chain_game, pure_profile, random_dag_game, random_profile


def _strategy_document(rows):
    """One-state strategy document for the matrix-shaped chain root."""
    return StrategyDocument(game="chain", strategies=[[rows, [[1.0]]]])


class TestCanonicalJson:
    """Tests for write_artifact() and read_artifact()."""

    def test_game_round_trip_is_byte_identical(self, tmp_path):
        """Loading a game and writing it back reproduces the file."""
        spec = random_dag_game(90, type_counts=(2, 2), correlated_prior=True)
        first = write_artifact(tmp_path / "a.json", game_to_document(spec))
        loaded = document_to_game(read_artifact(first, kind="game-spec"))
        second = write_artifact(tmp_path / "b.json", game_to_document(loaded))

        assert first.read_bytes() == second.read_bytes()

    def test_strategy_round_trip_is_byte_identical(self, tmp_path):
        """Strategies survive a load and save unchanged."""
        spec = random_dag_game(91)
        first = write_artifact(tmp_path / "a.json", profile_to_document(random_profile(spec, 0), spec.name))
        profile = document_to_profile(read_artifact(first, kind="strategy"), spec)
        second = write_artifact(tmp_path / "b.json", profile_to_document(profile, spec.name))

        assert first.read_bytes() == second.read_bytes()

    def test_params_round_trip(self, tmp_path):
        """Generated params load back equal."""
        params = generate_synthetic(4, SizeProfile(num_red=1, action_counts=[2, 2], kinetic_threshold=4))
        path = write_artifact(tmp_path / "params.json", ParamsDocument(params=params))

        assert read_artifact(path).params == params

    def test_layout(self, tmp_path):
        """Keys are sorted and the header carries the format version."""
        spec = chain_game()
        text = canonical_json(profile_to_document(pure_profile(spec), spec.name))
        payload = json.loads(text)

        assert text.endswith("\n")
        assert list(payload) == sorted(payload)
        assert payload["formatVersion"] == 1
        assert payload["kind"] == "strategy"

    def test_non_finite_rejected(self):
        """NaN cannot be written."""
        document = ValuesDocument(game="g", mode="state-values", values=[[float("nan")]])
        with pytest.raises(ArtifactError, match="non-finite"):
            canonical_json(document)

    def test_kind_mismatch(self, tmp_path):
        """Asking for one kind and finding another is an error."""
        spec = chain_game()
        path = write_artifact(tmp_path / "s.json", profile_to_document(pure_profile(spec), spec.name))
        with pytest.raises(ArtifactError, match="expected a game-spec artifact"):
            read_artifact(path, kind="game-spec")

    def test_unknown_kind(self, tmp_path):
        """Files of unknown kinds are rejected."""
        path = tmp_path / "x.json"
        path.write_text('{"kind": "bogus"}')
        with pytest.raises(ArtifactError, match="unknown artifact kind"):
            read_artifact(path)

    def test_not_json(self, tmp_path):
        """Garbage is an artifact error, not a crash."""
        path = tmp_path / "x.json"
        path.write_text("not json")
        with pytest.raises(ArtifactError, match="not valid JSON"):
            read_artifact(path)

    def test_missing_file(self, tmp_path):
        """Unreadable files raise OSError."""
        with pytest.raises(OSError):
            read_artifact(tmp_path / "missing.json")


class TestStrategyRows:
    """Tests for row checks on loaded strategies."""

    def test_small_drift_renormalized(self):
        """Rows within tolerance are rescaled to sum to one."""
        spec = chain_game()
        document = StrategyDocument(
            game="chain",
            strategies=[[[[0.5, 0.5 + 5e-10]], [[1.0]]] for _ in range(spec.num_states)],
        )
        profile = document_to_profile(document, spec)

        assert profile.get(0, 0, 0).sum() == pytest.approx(1.0, abs=1e-15)
        assert profile.violations(spec) == []

    def test_large_drift_rejected(self):
        """Rows off by more than the tolerance are rejected."""
        spec = chain_game()
        document = StrategyDocument(
            game="chain",
            strategies=[[[[0.5, 0.51]], [[1.0]]] for _ in range(spec.num_states)],
        )
        with pytest.raises(ArtifactError, match="sums to"):
            document_to_profile(document, spec)

    def test_negative_rejected(self):
        """Negative probabilities are rejected."""
        with pytest.raises(ArtifactError, match="nonnegative"):
            document_to_profile(_strategy_document([[1.5, -0.5]]))

    def test_wrong_game(self):
        """A strategy with the wrong shape for the game is rejected."""
        with pytest.raises(ArtifactError, match="does not match game"):
            document_to_profile(_strategy_document([[1.0, 0.0]]), chain_game())


class TestGameRows:
    """Tests for row checks on loaded games."""

    @staticmethod
    def _drifted(tmp_path, drift):
        """A saved random game with one transition row nudged by ``drift``."""
        spec = random_dag_game(94, type_counts=(2, 2))
        payload = json.loads(canonical_json(game_to_document(spec)))
        row = payload["kernels"][0]["probs"][0][0][0]
        row[0] += drift
        path = tmp_path / "drifted.json"
        path.write_text(json.dumps(payload))
        return read_artifact(path, kind="game-spec")

    def test_small_drift_renormalized(self, tmp_path):
        """Rows within 1e-9 load summing to one."""
        spec = document_to_game(self._drifted(tmp_path, 5e-10))
        sums = spec.kernels[0].probs.sum(axis=-1)

        assert np.max(np.abs(sums - 1.0)) <= 1e-15

    def test_renormalized_game_round_trips(self, tmp_path):
        """Saving the loaded game and loading it again changes nothing."""
        first = document_to_game(self._drifted(tmp_path, 5e-10))
        path = write_artifact(tmp_path / "saved.json", game_to_document(first))
        second = document_to_game(read_artifact(path, kind="game-spec"))

        assert np.array_equal(first.kernels[0].probs, second.kernels[0].probs)
        assert path.read_bytes() == write_artifact(tmp_path / "again.json", game_to_document(second)).read_bytes()

    def test_large_drift_rejected(self, tmp_path):
        """Rows off by more than 1e-9 still fail validation."""
        with pytest.raises(InvalidGameError, match="sums to"):
            document_to_game(self._drifted(tmp_path, 1e-6))


class TestDocuments:
    """Tests for value, checkpoint and report documents."""

    def test_values(self):
        """Value tables keep their mode and entries."""
        table = ValueTable(ValueMode.TYPE_DEPENDENT, np.arange(12.0).reshape(2, 3, 2))
        loaded = document_to_values(values_to_document(table, "g"))

        assert loaded.mode is ValueMode.TYPE_DEPENDENT
        assert np.array_equal(loaded.values, table.values)

    def test_checkpoint(self):
        """Checkpoints restore iteration, settings, play and beliefs."""
        spec = random_dag_game(92)
        config = SolverConfig(fp_iterations=20, outer_iterations=2)
        checkpoints = []
        solve(spec, config, on_checkpoint=checkpoints.append)
        original = checkpoints[-1]

        restored, restored_config = document_to_checkpoint(
            checkpoint_to_document(original, config, spec.name), spec
        )

        assert restored.iteration == 2
        assert restored_config == config
        assert restored.trace == original.trace
        assert np.array_equal(restored.beliefs, original.beliefs)
        assert np.array_equal(restored.values.values, original.values.values)
        for a, b in zip(restored.profile.dist, original.profile.dist):
            for x, y in zip(a, b):
                assert np.array_equal(x, y)

    def test_report(self):
        """Reports keep per-player values and the horizon series."""
        spec = chain_game()
        report = epsilon_persistent(spec, pure_profile(spec, 1), convergence_tol=0.0, prune_threshold=0.0)
        loaded = document_to_report(report_to_document(report, spec.name))

        assert loaded.epsilon == pytest.approx(2.5)
        assert loaded.horizon == report.horizon
        assert loaded.series == report.series
        assert loaded.players == report.players


class TestCsv:
    """Tests for the CSV outputs."""

    def test_trace_round_trip(self, tmp_path):
        """Traces read back exactly, including missing epsilons."""
        trace = ConvergenceTrace(
            (
                TraceRow(1, 0.5, 2.0, None, 0.125),
                TraceRow(2, 0.1, 0.3, 1.75, 0.25),
            )
        )
        path = write_trace_csv(tmp_path / "trace.csv", trace)

        assert read_trace_csv(path) == trace
        assert path.read_text().splitlines()[0] == (
            "outer_iteration,max_strategy_delta,max_value_delta,epsilon,wall_seconds"
        )

    def test_trace_bad_columns(self, tmp_path):
        """Files with other columns are not traces."""
        path = tmp_path / "trace.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ArtifactError, match="unexpected trace columns"):
            read_trace_csv(path)

    def test_series(self, tmp_path):
        """One row per horizon, one column per player."""
        spec = chain_game()
        report = epsilon_persistent(spec, pure_profile(spec, 1), convergence_tol=0.0, prune_threshold=0.0)
        lines = write_series_csv(tmp_path / "series.csv", report).read_text().splitlines()

        assert lines[0] == "horizon,agent,nature"
        assert len(lines) == 1 + len(report.series)
        assert lines[-1].startswith("2,7.5,")


class TestRunStore:
    """Tests for RunStore."""

    def test_checkpoints_in_order(self, tmp_path):
        """Checkpoints are listed by iteration and the latest is last."""
        spec = random_dag_game(93)
        config = SolverConfig(fp_iterations=10, outer_iterations=3)
        store = RunStore(tmp_path / "run")
        store.save_game(spec)
        result = solve(spec, config, on_checkpoint=lambda c: store.save_checkpoint(c, config, spec))
        store.save_result(result, spec)

        assert [p.name for p in store.checkpoints()] == ["iter-0001.json", "iter-0002.json", "iter-0003.json"]
        assert store.latest_checkpoint() == store.checkpoint_path(3)
        assert store.strategy_path.exists() and store.values_path.exists()
        assert len(read_trace_csv(store.trace_path)) == 3

        checkpoint, loaded_config = store.load_checkpoint(store.latest_checkpoint(), spec)
        assert checkpoint.iteration == 3
        assert loaded_config == config

    def test_empty(self, tmp_path):
        """A fresh directory has no checkpoints."""
        store = RunStore(tmp_path / "nothing")
        assert store.checkpoints() == []
        assert store.latest_checkpoint() is None

    def test_load_checkpoint_of_wrong_kind(self, tmp_path):
        """Only checkpoint files load as checkpoints."""
        spec = chain_game()
        store = RunStore(tmp_path / "run")
        game = store.save_game(spec)

        with pytest.raises(ArtifactError, match="checkpoint"):
            store.load_checkpoint(game, spec)
