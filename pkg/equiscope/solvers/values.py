"""Exact evaluation of strategy profiles by backward passes over the DAG."""

from __future__ import annotations

import numpy as np

from ..core.game import GameSpec
from ..core.strategy import StrategyProfile
from ..core.values import ValueMode, ValueTable
from ..errors import MissingValueError, SingularSystemError

RESIDUAL_TOLERANCE = 1e-8


def evaluate_strategies(
    spec: GameSpec, profile: StrategyProfile, beliefs: np.ndarray
) -> ValueTable:
    """State values consistent with ``profile`` under the given beliefs.

    ``v_i(s) = sum_t b_s(t) sum_o P(o | s, t, profile) w_i(o, t)`` where
    ``w_i`` is ``v_i`` for nonterminal outcomes and the terminal payoff
    otherwise. States are visited in reverse topological order, which solves
    the triangular system exactly.

    Args:
        spec: The game.
        profile: Strategies at every state.
        beliefs: Array of shape (K, J), one belief per state.

    Returns:
        A state-mode ValueTable.

    Raises:
        MissingValueError: If a belief row is missing or not finite.
    """
    beliefs = np.asarray(beliefs, dtype=np.float64)
    expected = (spec.num_states, spec.num_type_profiles)
    if beliefs.shape != expected:
        raise MissingValueError(
            f"Beliefs have shape {beliefs.shape}, expected {expected}"
        )
    table = np.zeros((spec.num_players, spec.num_outcomes, spec.num_type_profiles))
    table[:, spec.num_states :, :] = np.transpose(spec.terminal_payoffs, (1, 0, 2))
    values = np.zeros((spec.num_players, spec.num_states))

    for state in reversed(spec.topological_order):
        belief = beliefs[state]
        if not np.all(np.isfinite(belief)):
            raise MissingValueError(f"No belief at state {spec.states[state]}")
        flow = spec.flow(state, profile.at(state))
        values[:, state] = np.einsum("jo,noj->nj", flow, table) @ belief
        table[:, state, :] = values[:, state, np.newaxis]

    return ValueTable(ValueMode.STATE, values)


def evaluate_strategies_tdv(spec: GameSpec, profile: StrategyProfile) -> ValueTable:
    """Values of every joint type vector under ``profile``.

    One backward pass per joint type vector, vectorized across them. Each
    pass fixes behavior to that vector's per-type strategies and conditions
    transitions on it.

    Returns:
        A type-dependent ValueTable of shape (num_players, K, J).
    """
    table = np.zeros((spec.num_players, spec.num_outcomes, spec.num_type_profiles))
    table[:, spec.num_states :, :] = np.transpose(spec.terminal_payoffs, (1, 0, 2))

    for state in reversed(spec.topological_order):
        flow = spec.flow(state, profile.at(state))
        table[:, state, :] = np.einsum("jo,noj->nj", flow, table)

    return ValueTable(ValueMode.TYPE_DEPENDENT, table[:, : spec.num_states, :])


def solve_linear_system(coefficients: np.ndarray, constants: np.ndarray) -> np.ndarray:
    """Solve ``coefficients @ x = constants``.

    Args:
        coefficients: Square matrix.
        constants: Right-hand side vector.

    Returns:
        The solution vector.

    Raises:
        ValueError: If the system is not square.
        SingularSystemError: If the matrix is singular or the residual
            exceeds ``1e-8 * (1 + ||constants||_inf)``.
    """
    a = np.asarray(coefficients, dtype=np.float64)
    b = np.asarray(constants, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
        raise ValueError(
            f"Expected a square system, got matrix {a.shape} and constants {b.shape}"
        )
    if a.size == 0:
        return np.zeros(0)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Singular {a.shape[0]}x{a.shape[0]} system") from exc
    residual = float(np.max(np.abs(a @ x - b)))
    bound = RESIDUAL_TOLERANCE * (1.0 + float(np.max(np.abs(b))))
    if not np.isfinite(residual) or residual > bound:
        raise SingularSystemError(
            f"Linear solve residual {residual:.3e} exceeds {bound:.3e}; "
            "the system is numerically singular"
        )
    return x
