"""Command-line entry point for Equiscope."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from .. import __version__
from ..errors import (
    ArtifactError,
    EquiscopeError,
    InvalidGameError,
    ParameterError,
    UnsupportedGameError,
)
from ..scenarios.hostility import AggregationRegistry
from ..solvers.meta import ALGORITHMS
from . import commands

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(levelname)s][%(name)s][%(asctime)s] %(message)s"


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algorithm", choices=ALGORITHMS, default="st-pifp")
    parser.add_argument("--fp-iters", type=int, default=10_000, help="fictitious play iterations per stage")
    parser.add_argument("--outer-iters", type=int, default=None, help="outer iterations (default 25)")
    parser.add_argument("--workers", type=int, default=1, help="processes for parallel algorithms")
    parser.add_argument("--value-init", choices=("zero", "random", "custom"), default="zero")
    parser.add_argument("--value-seed", type=int, default=0)
    parser.add_argument("--initial-values", default=None, help="values file for --value-init custom")
    parser.add_argument("--early-stop", type=float, default=None, help="stop when the strategy delta falls below this")
    parser.add_argument("--epsilon-every", type=int, default=0, help="trace epsilon every k iterations")


def _add_evaluator_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--horizon-cap", type=int, default=None, help="largest evaluator horizon (default K)")
    parser.add_argument("--prune", type=float, default=0.01, help="transition pruning threshold")
    parser.add_argument("--tol", type=float, default=1e-3, help="horizon convergence tolerance")
    parser.add_argument("--belief-model", choices=("joint", "marginal"), default="joint")
    parser.add_argument("--pruned-mass", choices=("renormalize", "penalize"), default="renormalize")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equiscope",
        description="Equilibrium computation for DAG stochastic games with persistent private types",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="cmd", required=True)

    # gen
    p = sub.add_parser("gen", help="generate a synthetic Hostility Game params file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--K", type=int, default=150, help="kinetic threshold")
    p.add_argument("--types", type=int, default=2, help="types per player")
    p.add_argument("--red", type=int, default=3, help="number of red players")
    p.add_argument("--actions", type=int, nargs="+", default=None, help="explicit move counts, blue first")
    p.add_argument("--min-actions", type=int, default=7)
    p.add_argument("--max-actions", type=int, default=10)
    p.add_argument("--max-hostility", type=int, default=3)
    p.add_argument("--aggregation", choices=AggregationRegistry.names(), default="mean")
    p.add_argument("--perfect-information", action="store_true", help="collapse every type space to one type")
    p.add_argument("--out", default=None)
    p.set_defaults(func=commands.cmd_gen)

    # solve
    p = sub.add_parser("solve", help="compute a strategy profile")
    p.add_argument("game", nargs="?", default=None, help="params or game file")
    _add_solver_options(p)
    p.add_argument("--out-dir", default=None, help="run directory (default $EQUISCOPE_OUT_DIR/<game>-<algorithm>)")
    p.add_argument("--resume", default=None, help="continue the run in this directory")
    p.add_argument("--horizon-cap", type=int, default=None)
    p.add_argument("--prune", type=float, default=0.01)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=commands.cmd_solve)

    # eval
    p = sub.add_parser("eval", help="measure epsilon of a strategy profile")
    p.add_argument("game")
    p.add_argument("strategy", help="strategy or checkpoint file")
    p.add_argument("--method", choices=("persistent", "expost"), default="persistent")
    _add_evaluator_options(p)
    p.add_argument("--out", default=None, help="report path (default next to the strategy)")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=commands.cmd_eval)

    # inspect
    p = sub.add_parser("inspect", help="summarise an artifact file")
    p.add_argument("path")
    p.add_argument("--game", default=None, help="game file for name lookups and bounds checks")
    p.set_defaults(func=commands.cmd_inspect)

    # validate
    p = sub.add_parser("validate", help="check a game or params file")
    p.add_argument("path")
    p.add_argument("--strategy", default=None, help="also check a strategy against the game")
    p.set_defaults(func=commands.cmd_validate)

    # compare
    p = sub.add_parser("compare", help="compare algorithms at checkpoint iterations")
    p.add_argument("game")
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS, default=None)
    p.add_argument("--checkpoints", type=int, nargs="+", default=[10, 25])
    _add_solver_options(p)
    p.add_argument("--method", choices=("persistent", "expost"), default="persistent")
    _add_evaluator_options(p)
    p.add_argument("--out", default=None)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=commands.cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the exit code.

    Exit codes: 0 success, 2 invalid input, 3 evaluator did not converge,
    4 I/O failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.func(args)
    except (InvalidGameError, ParameterError, UnsupportedGameError, ArtifactError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return commands.EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: invalid settings\n{exc}", file=sys.stderr)
        return commands.EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return commands.EXIT_IO
    except EquiscopeError as exc:
        logger.debug("Unhandled library error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
