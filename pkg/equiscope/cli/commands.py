"""Implementations of the ``equiscope`` subcommands.

Every command takes the parsed arguments and returns a process exit code.
Library errors propagate to :func:`equiscope.cli.main.main`, which maps
them to exit codes.
"""

from __future__ import annotations

import argparse
import logging
import os
from pathlib import Path
from typing import Optional, Sequence, cast

import numpy as np

from ..core.game import GameSpec, validate
from ..core.summary import compute_summary, support_sizes
from ..errors import ArtifactError, InvalidGameError, ParameterError
from ..evaluation.expost import ex_post_check
from ..evaluation.persistent import EpsilonReport, epsilon_persistent
from ..experiment import EvaluationOptions, run_comparison
from ..scenarios.hostility import HostilityGameParams, build_game
from ..scenarios.synthetic import SizeProfile, generate_synthetic
from ..solvers.meta import Checkpoint, SolverConfig, SolverRegistry, solve
from .artifacts import (
    comparison_to_document,
    document_to_game,
    document_to_profile,
    document_to_report,
    document_to_values,
    read_artifact,
    read_trace_csv,
    report_to_document,
    write_artifact,
    write_comparison_csv,
    write_series_csv,
)
from .schemas import (
    CheckpointDocument,
    ComparisonDocument,
    EpsilonReportDocument,
    GameDocument,
    ParamsDocument,
    StrategyDocument,
    ValuesDocument,
)
from .store import RunStore

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "EQUISCOPE_OUT_DIR"
DEFAULT_OUT_DIR = "runs"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, DEFAULT_OUT_DIR))


# ============================================================================
# Loading helpers
# ============================================================================


def load_game(path: Path | str) -> GameSpec:
    """Load a game from a params file or a built game file."""
    document = read_artifact(path)
    if isinstance(document, ParamsDocument):
        return build_game(document.params)
    if isinstance(document, GameDocument):
        return document_to_game(document)
    raise ArtifactError(f"{path}: expected a game or params file, found {document.kind}")


def load_profile(path: Path | str, spec: GameSpec):
    document = read_artifact(path)
    if isinstance(document, StrategyDocument):
        return document_to_profile(document, spec)
    if isinstance(document, CheckpointDocument):
        return document_to_profile(
            StrategyDocument(game=document.game, strategies=document.strategies), spec
        )
    raise ArtifactError(f"{path}: expected a strategy or checkpoint, found {document.kind}")


def _format_value(value: float, per_type: Sequence[Optional[float]]) -> str:
    text = f"{value:.3f}"
    if len(per_type) > 1:
        inner = ", ".join("-" if v is None else f"{v:.3f}" for v in per_type)
        text += f" ({inner})"
    return text


def format_report(report: EpsilonReport) -> str:
    """Per-player V*, V and epsilon, with per-type values in parentheses."""
    lines = [f"{'player':<12} {'V* (profile)':<32} {'V (best response)':<32} epsilon"]
    for row in report.players:
        lines.append(
            f"{row.player:<12} "
            f"{_format_value(row.profile_value, row.profile_type_values):<32} "
            f"{_format_value(row.optimal_value, row.optimal_type_values):<32} "
            f"{row.epsilon:.3f}"
        )
    status = "converged" if report.converged else "NOT converged"
    horizon = "" if report.horizon is None else f", horizon {report.horizon}"
    lines.append(f"epsilon = max_i epsilon_i = {report.epsilon:.3f} ({report.method}, {status}{horizon})")
    return "\n".join(lines)


# ============================================================================
# gen
# ============================================================================


def cmd_gen(args: argparse.Namespace) -> int:
    """Generate a synthetic Hostility Game params file."""
    size = SizeProfile(
        num_red=args.red,
        min_actions=args.min_actions,
        max_actions=args.max_actions,
        action_counts=args.actions,
        kinetic_threshold=args.K,
        num_types=args.types,
        max_hostility=args.max_hostility,
        aggregation=args.aggregation,
    )
    params = generate_synthetic(args.seed, size)
    if args.perfect_information:
        params = params.perfect_information()
    out = Path(args.out) if args.out else default_out_dir() / f"{params.name}.json"
    write_artifact(out, ParamsDocument(params=params))
    print(f"Wrote {params.name} (K={params.kinetic_threshold}, types={params.type_counts}) to {out}")
    return EXIT_OK


# ============================================================================
# solve
# ============================================================================


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    outer = {} if args.outer_iters is None else {"outer_iterations": args.outer_iters}
    return SolverConfig(
        algorithm=args.algorithm,
        fp_iterations=args.fp_iters,
        workers=args.workers,
        value_init=args.value_init,
        value_seed=args.value_seed,
        early_stop_delta=args.early_stop,
        epsilon_every=args.epsilon_every,
        epsilon_horizon_cap=args.horizon_cap,
        epsilon_prune=args.prune,
        progress=args.progress,
        **outer,
    )


def cmd_solve(args: argparse.Namespace) -> int:
    """Run an outer-loop solver, checkpointing every iteration."""
    resume: Checkpoint | None = None
    if args.resume:
        store = RunStore(args.resume)
        spec = load_game(args.game or store.game_path)
        latest = store.latest_checkpoint()
        if latest is None:
            raise ArtifactError(f"No checkpoints to resume in {store.checkpoint_dir}")
        resume, config = store.load_checkpoint(latest, spec)
        if args.outer_iters is not None:
            config = config.model_copy(update={"outer_iterations": args.outer_iters})
        config = config.model_copy(update={"progress": args.progress})
        print(f"Resuming {config.algorithm} after iteration {resume.iteration}")
    else:
        if not args.game:
            raise ParameterError("solve needs a game file unless --resume is given")
        spec = load_game(args.game)
        config = _solver_config(args)
        out = Path(args.out_dir) if args.out_dir else default_out_dir() / f"{spec.name}-{config.algorithm}"
        store = RunStore(out)
        store.save_game(spec)

    initial_values = None
    if args.initial_values:
        document = cast(ValuesDocument, read_artifact(args.initial_values, kind="values"))
        initial_values = document_to_values(document)

    result = solve(
        spec,
        config,
        initial_values=initial_values,
        resume=resume,
        on_checkpoint=lambda checkpoint: store.save_checkpoint(checkpoint, config, spec),
    )
    store.save_result(result, spec)
    last = result.trace.last
    if last is not None:
        print(
            f"{config.algorithm}: {last.outer_iteration} outer iterations, "
            f"strategy delta {last.max_strategy_delta:.3e}"
            + (" (stopped early)" if result.stopped_early else "")
        )
    print(f"Results in {store.root}")
    return EXIT_OK


# ============================================================================
# eval
# ============================================================================


def cmd_eval(args: argparse.Namespace) -> int:
    """Measure epsilon of a strategy and write the report."""
    spec = load_game(args.game)
    profile = load_profile(args.strategy, spec)
    if args.method == "expost":
        report = ex_post_check(spec, profile)
    else:
        report = epsilon_persistent(
            spec,
            profile,
            horizon_cap=args.horizon_cap,
            convergence_tol=args.tol,
            prune_threshold=args.prune,
            belief_model=args.belief_model,
            pruned_mass=args.pruned_mass,
            progress=args.progress,
        )
    out = Path(args.out) if args.out else Path(args.strategy).with_name("epsilon-report.json")
    write_artifact(out, report_to_document(report, spec.name))
    if report.series:
        write_series_csv(out.with_suffix(".csv"), report)
    print(format_report(report))
    print(f"Report written to {out}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


# ============================================================================
# inspect
# ============================================================================


def _describe_params(params: HostilityGameParams) -> list[str]:
    return [
        f"Hostility Game params {params.name!r}",
        f"  players: {', '.join(params.players)}",
        f"  actions: {list(params.action_counts)}",
        f"  types: {list(params.type_counts)}",
        f"  kinetic threshold K: {params.kinetic_threshold} ({params.kinetic_threshold + 3} states)",
        f"  aggregation: {params.aggregation}",
    ]


def _describe_game(spec: GameSpec) -> list[str]:
    counts = np.array([spec.action_counts(s) for s in range(spec.num_states)])
    lines = [
        f"Game {spec.name!r}",
        f"  players: {', '.join(spec.players)}",
        f"  states: {spec.num_states} nonterminal + {spec.num_terminals} terminal",
        f"  type counts: {list(spec.type_counts)} ({spec.num_type_profiles} joint types)",
        f"  actions per player: min {counts.min(axis=0).tolist()}, max {counts.max(axis=0).tolist()}",
        f"  payoff range: {spec.payoff_range}",
        f"  longest path from root: {spec.graph.longest_path(spec.root)}",
    ]
    for player, name in enumerate(spec.players):
        marginal = ", ".join(f"{p:.3f}" for p in spec.prior.marginal(player))
        lines.append(f"  prior of {name}: [{marginal}]")
    return lines


def _describe_strategy(document: StrategyDocument, spec: GameSpec | None) -> list[str]:
    profile = document_to_profile(document, spec)
    lines = [f"Strategy for {document.game!r}: {profile.num_states} states"]
    num_players = len(profile.dist[0]) if profile.num_states else 0
    for player in range(num_players):
        sizes = [s for stage in profile.dist for s in support_sizes(stage[player])]
        top = max(float(stage[player].max()) for stage in profile.dist)
        name = spec.players[player] if spec is not None else str(player)
        lines.append(
            f"  {name}: support sizes min {min(sizes)}, mean {np.mean(sizes):.2f}, "
            f"max {max(sizes)}; largest action mass {top:.3f}"
        )
    if profile.num_states:
        for player, strategy in enumerate(profile.at(0)):
            lines.append(f"  root, player {player}: support sizes {support_sizes(strategy)}")
    return lines


def _describe_values(document: ValuesDocument, spec: GameSpec | None) -> list[str]:
    table = document_to_values(document)
    lines = [f"Values for {document.game!r} ({table.mode.value}), shape {list(table.values.shape)}"]
    for player in range(table.values.shape[0]):
        stats = compute_summary(table.values[player])
        name = spec.players[player] if spec is not None else str(player)
        lines.append(
            f"  {name}: min {stats.get('min', float('nan')):.3f}, "
            f"max {stats.get('max', float('nan')):.3f}, mean {stats.get('mean', float('nan')):.3f}"
        )
    if spec is not None:
        problems = table.bounds_violations(spec)
        low, high = spec.payoff_range
        if problems:
            lines.append(f"  {len(problems)} entries outside [{low}, {high}]:")
            lines.extend(f"    {p}" for p in problems)
        else:
            lines.append(f"  all entries within [{low}, {high}]")
    return lines


def _describe_checkpoint(document: CheckpointDocument) -> list[str]:
    lines = [
        f"Checkpoint of {document.algorithm} on {document.game!r} after iteration {document.iteration}",
        f"  values: {document.mode}",
    ]
    if document.trace:
        last = document.trace[-1]
        lines.append(
            f"  last strategy delta {last.max_strategy_delta:.3e}, "
            f"value delta {last.max_value_delta:.3e}"
        )
    beliefs = np.asarray(document.beliefs)
    if beliefs.size:
        stats = compute_summary(beliefs)
        lines.append(f"  beliefs: {beliefs.shape[0]} states, sparsity {stats['sparsity']:.3f}")
    return lines


def _describe_comparison(document: ComparisonDocument) -> list[str]:
    lines = [f"Comparison on {document.game!r}"]
    for row in document.rows:
        lines.append(f"[{row.algorithm} @ iteration {row.iteration}]")
        lines.append(format_report(document_to_report(row.report)))
    return lines


def cmd_inspect(args: argparse.Namespace) -> int:
    """Print a summary of an artifact file."""
    path = Path(args.path)
    spec = load_game(args.game) if args.game else None
    if path.suffix == ".csv":
        trace = read_trace_csv(path)
        lines = [f"Trace with {len(trace)} outer iterations"]
        for row in trace.rows:
            eps = "" if row.epsilon is None else f", epsilon {row.epsilon:.4f}"
            lines.append(
                f"  {row.outer_iteration:>4}: strategy delta {row.max_strategy_delta:.3e}, "
                f"value delta {row.max_value_delta:.3e}{eps}"
            )
    else:
        document = read_artifact(path)
        if isinstance(document, ParamsDocument):
            lines = _describe_params(document.params)
        elif isinstance(document, GameDocument):
            lines = _describe_game(document_to_game(document))
        elif isinstance(document, StrategyDocument):
            lines = _describe_strategy(document, spec)
        elif isinstance(document, ValuesDocument):
            lines = _describe_values(document, spec)
        elif isinstance(document, CheckpointDocument):
            lines = _describe_checkpoint(document)
        elif isinstance(document, EpsilonReportDocument):
            lines = [f"Epsilon report for {document.game!r}", format_report(document_to_report(document))]
        elif isinstance(document, ComparisonDocument):
            lines = _describe_comparison(document)
        else:
            raise ArtifactError(f"{path}: cannot inspect {document.kind}")
    print("\n".join(lines))
    return EXIT_OK


# ============================================================================
# validate
# ============================================================================


def cmd_validate(args: argparse.Namespace) -> int:
    """Check a game or params file and print every violation."""
    try:
        spec = load_game(args.path)
    except InvalidGameError as exc:
        print(f"{args.path}: {len(exc.violations)} violation(s)")
        for violation in exc.violations:
            where = f" [{violation.state}]" if violation.state else ""
            print(f"  {violation.kind}{where}: {violation.message}")
        return EXIT_VALIDATION
    except ParameterError as exc:
        print(f"{args.path}: infeasible parameters: {exc}")
        return EXIT_VALIDATION

    problems = [v.message for v in validate(spec)]
    if args.strategy:
        document = cast(StrategyDocument, read_artifact(args.strategy, kind="strategy"))
        try:
            document_to_profile(document, spec)
        except ArtifactError as exc:
            problems.append(str(exc))
    if problems:
        for problem in problems:
            print(f"  {problem}")
        return EXIT_VALIDATION
    print(f"{args.path}: valid ({spec.num_states} states, {spec.num_players} players)")
    return EXIT_OK


# ============================================================================
# compare
# ============================================================================


def cmd_compare(args: argparse.Namespace) -> int:
    """Run several algorithms and report epsilon at checkpoint iterations."""
    spec = load_game(args.game)
    algorithms = args.algorithms or [
        name
        for name in SolverRegistry.names()
        if name != "parallel-pifp" or all(t == 1 for t in spec.type_counts)
    ]
    config = _solver_config(args)
    evaluation = EvaluationOptions(
        method=args.method,
        horizon_cap=args.horizon_cap,
        convergence_tol=args.tol,
        prune_threshold=args.prune,
        belief_model=args.belief_model,
        pruned_mass=args.pruned_mass,
    )
    comparison = run_comparison(spec, algorithms, args.checkpoints, config, evaluation)
    out = Path(args.out) if args.out else default_out_dir() / f"compare-{spec.name}.json"
    write_artifact(out, comparison_to_document(comparison))
    write_comparison_csv(out.with_suffix(".csv"), comparison)
    for row in comparison.rows:
        print(f"[{row.algorithm} @ iteration {row.iteration}]")
        print(format_report(row.report))
    print(f"Comparison written to {out}")
    return EXIT_OK
