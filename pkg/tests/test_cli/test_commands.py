"""Tests for the equiscope command line."""

import json

import pytest

from equiscope.cli.artifacts import game_to_document, profile_to_document, read_artifact, write_artifact
from equiscope.cli.main import main
from equiscope.cli.store import RunStore

from ..toy_games import chain_game, pure_profile


@pytest.fixture
def params_file(tmp_path):
    """A small generated Hostility Game."""
    path = tmp_path / "params.json"
    code = main(["gen", "--seed", "3", "--K", "4", "--red", "1", "--actions", "2", "2", "--out", str(path)])
    assert code == 0
    return path


@pytest.fixture
def chain_files(tmp_path):
    """The chain game and a profile that always stops."""
    spec = chain_game()
    game = write_artifact(tmp_path / "chain.json", game_to_document(spec))
    strategy = write_artifact(tmp_path / "stop.json", profile_to_document(pure_profile(spec, 1), spec.name))
    return game, strategy


class TestGen:
    """Tests for ``equiscope gen``."""

    def test_deterministic(self, tmp_path, params_file):
        """The same seed writes the same file."""
        again = tmp_path / "again.json"
        main(["gen", "--seed", "3", "--K", "4", "--red", "1", "--actions", "2", "2", "--out", str(again)])
        assert again.read_bytes() == params_file.read_bytes()

    def test_out_dir_from_environment(self, tmp_path, monkeypatch):
        """Without --out the file lands under EQUISCOPE_OUT_DIR."""
        monkeypatch.setenv("EQUISCOPE_OUT_DIR", str(tmp_path / "outputs"))
        assert main(["gen", "--seed", "5", "--K", "3", "--red", "1", "--actions", "2", "2"]) == 0
        assert (tmp_path / "outputs" / "synthetic-5.json").exists()

    def test_perfect_information(self, tmp_path):
        """The flag collapses every type space."""
        path = tmp_path / "pi.json"
        main(["gen", "--seed", "3", "--K", "4", "--red", "1", "--actions", "2", "2",
              "--perfect-information", "--out", str(path)])
        assert read_artifact(path).params.type_counts == (1, 1)


class TestValidate:
    """Tests for ``equiscope validate``."""

    def test_valid(self, params_file, capsys):
        """Generated params build a valid game."""
        assert main(["validate", str(params_file)]) == 0
        assert "valid" in capsys.readouterr().out

    def test_broken_row(self, chain_files, capsys):
        """Every violation is listed and the exit code is 2."""
        game, _ = chain_files
        payload = json.loads(game.read_text())
        payload["kernels"][1]["probs"][0][0][0][0] = 0.5
        game.write_text(json.dumps(payload))

        assert main(["validate", str(game)]) == 2
        out = capsys.readouterr().out
        assert "violation(s)" in out
        assert "s1" in out

    def test_strategy_mismatch(self, tmp_path, chain_files):
        """A strategy for another game fails validation."""
        game, _ = chain_files
        other = write_artifact(
            tmp_path / "other.json",
            profile_to_document(pure_profile(chain_game()), "chain").model_copy(
                update={"strategies": [[[[1.0, 0.0]], [[1.0]]]]}
            ),
        )
        assert main(["validate", str(game), "--strategy", str(other)]) == 2

    def test_strategy_of_wrong_kind(self, chain_files):
        """A game passed as the strategy is rejected with exit code 2."""
        game, _ = chain_files
        assert main(["validate", str(game), "--strategy", str(game)]) == 2

    def test_missing_file(self, tmp_path):
        """Unreadable files exit with 4."""
        assert main(["validate", str(tmp_path / "missing.json")]) == 4


class TestSolve:
    """Tests for ``equiscope solve``."""

    def test_solve_and_resume(self, tmp_path, params_file):
        """A run checkpoints every iteration and resumes from the last."""
        run = tmp_path / "run"
        assert main(["solve", str(params_file), "--fp-iters", "20", "--outer-iters", "2",
                     "--out-dir", str(run)]) == 0
        store = RunStore(run)
        assert len(store.checkpoints()) == 2
        assert store.strategy_path.exists()
        assert store.game_path.exists()

        assert main(["solve", "--resume", str(run), "--outer-iters", "3"]) == 0
        assert store.latest_checkpoint() == store.checkpoint_path(3)

    def test_needs_a_game(self):
        """solve without a game or --resume is a usage error."""
        assert main(["solve"]) == 2

    def test_bad_settings(self, chain_files):
        """Settings rejected by the config model exit with 2."""
        game, _ = chain_files
        assert main(["solve", str(game), "--fp-iters", "0"]) == 2

    def test_resume_empty_directory(self, tmp_path, chain_files):
        """Resuming a run without checkpoints fails cleanly."""
        game, _ = chain_files
        assert main(["solve", str(game), "--resume", str(tmp_path)]) == 2

    def test_initial_values_of_wrong_kind(self, tmp_path, chain_files):
        """Warm-start files must hold values."""
        game, strategy = chain_files
        code = main(["solve", str(game), "--value-init", "custom", "--initial-values", str(strategy),
                     "--fp-iters", "10", "--outer-iters", "1", "--out-dir", str(tmp_path / "run")])
        assert code == 2


class TestEval:
    """Tests for ``equiscope eval``."""

    def test_persistent(self, tmp_path, chain_files, capsys):
        """The report shows the 2.5 gain and is written to disk."""
        game, strategy = chain_files
        out = tmp_path / "report.json"
        code = main(["eval", str(game), str(strategy), "--tol", "0", "--prune", "0", "--out", str(out)])

        assert code == 0
        assert "epsilon_i = 2.500" in capsys.readouterr().out
        assert read_artifact(out, kind="epsilon-report").epsilon == pytest.approx(2.5)
        assert out.with_suffix(".csv").exists()

    def test_not_converged(self, tmp_path, chain_files):
        """Hitting the horizon cap exits with 3."""
        game, strategy = chain_files
        code = main(["eval", str(game), str(strategy), "--tol", "0", "--prune", "0",
                     "--horizon-cap", "1", "--out", str(tmp_path / "r.json")])
        assert code == 3

    def test_expost(self, tmp_path, chain_files):
        """The ex-post check agrees on the one-type chain."""
        game, strategy = chain_files
        out = tmp_path / "expost.json"
        assert main(["eval", str(game), str(strategy), "--method", "expost", "--out", str(out)]) == 0
        assert read_artifact(out).epsilon == pytest.approx(2.5)

    def test_default_report_path(self, chain_files):
        """Reports land next to the strategy by default."""
        game, strategy = chain_files
        main(["eval", str(game), str(strategy), "--prune", "0"])
        assert strategy.with_name("epsilon-report.json").exists()


class TestInspect:
    """Tests for ``equiscope inspect``."""

    def test_game(self, chain_files, capsys):
        """Games report their size and longest path."""
        game, _ = chain_files
        assert main(["inspect", str(game)]) == 0
        out = capsys.readouterr().out
        assert "Game 'chain'" in out
        assert "longest path from root: 2" in out

    def test_strategy(self, chain_files, capsys):
        """Strategies report support sizes per player."""
        game, strategy = chain_files
        assert main(["inspect", str(strategy), "--game", str(game)]) == 0
        out = capsys.readouterr().out
        assert "Strategy for 'chain': 3 states" in out
        assert "agent: support sizes min 1" in out

    def test_params(self, params_file, capsys):
        """Params files describe the generated instance."""
        assert main(["inspect", str(params_file)]) == 0
        assert "kinetic threshold K: 4 (7 states)" in capsys.readouterr().out

    def test_run_outputs(self, tmp_path, chain_files, capsys):
        """Values, checkpoints and traces of a run can all be inspected."""
        game, _ = chain_files
        run = tmp_path / "run"
        main(["solve", str(game), "--fp-iters", "10", "--outer-iters", "2", "--out-dir", str(run)])
        store = RunStore(run)
        capsys.readouterr()

        assert main(["inspect", str(store.values_path), "--game", str(game)]) == 0
        assert "all entries within" in capsys.readouterr().out
        assert main(["inspect", str(store.checkpoint_path(2))]) == 0
        assert "after iteration 2" in capsys.readouterr().out
        assert main(["inspect", str(store.trace_path)]) == 0
        assert "Trace with 2 outer iterations" in capsys.readouterr().out


class TestCompare:
    """Tests for ``equiscope compare``."""

    def test_compare(self, tmp_path, chain_files, capsys):
        """Each algorithm is reported at each checkpoint."""
        game, _ = chain_files
        out = tmp_path / "compare.json"
        code = main(["compare", str(game), "--algorithms", "st-pifp", "parallel-pifp",
                     "--checkpoints", "1", "2", "--fp-iters", "10", "--prune", "0", "--out", str(out)])

        assert code == 0
        document = read_artifact(out, kind="comparison")
        assert [(r.algorithm, r.iteration) for r in document.rows] == [
            ("st-pifp", 1),
            ("st-pifp", 2),
            ("parallel-pifp", 1),
            ("parallel-pifp", 2),
        ]
        assert len(out.with_suffix(".csv").read_text().splitlines()) == 1 + 4 * 2
        assert "[st-pifp @ iteration 2]" in capsys.readouterr().out
