"""Epsilon measurement: persistent best responses, ex-post MDPs and oracles."""

from .persistent import (
    BeliefStateKey,
    EpsilonReport,
    HorizonValue,
    NodeValue,
    PersistentEvaluator,
    PlayerEpsilon,
    bayes_update,
    epsilon_persistent,
    profile_type_values,
    profile_value,
)

from .expost import (
    MDP,
    PolicyIterationResult,
    build_player_mdp,
    evaluate_policy,
    ex_post_check,
    mdp_policy_iteration,
)

from .oracles import (
    HistoryNode,
    brute_force_best_response,
    count_policies,
    enumerate_policies,
    policy_value,
)

__all__ = [
    # persistent.py
    "BeliefStateKey",
    "EpsilonReport",
    "HorizonValue",
    "NodeValue",
    "PersistentEvaluator",
    "PlayerEpsilon",
    "bayes_update",
    "epsilon_persistent",
    "profile_type_values",
    "profile_value",
    # expost.py
    "MDP",
    "PolicyIterationResult",
    "build_player_mdp",
    "evaluate_policy",
    "ex_post_check",
    "mdp_policy_iteration",
    # oracles.py
    "HistoryNode",
    "brute_force_best_response",
    "count_policies",
    "enumerate_policies",
    "policy_value",
]
