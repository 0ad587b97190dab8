"""Exact-arithmetic equivalence, counterfactual equivalence, determinization,
and pure learning processes for finite reward-free POMDPs."""

from .core import (
    DeterministicPolicy,
    FiniteDist,
    History,
    Pomdp,
    Rat,
    StochasticPolicy,
    enumerate_det_policies,
    parse_rational,
    reachable_histories,
    validate,
)
from .corpus import corpus_path, load_corpus
from .determinize import (
    BehaviorPartition,
    behavior_partition,
    determinize,
    initial_behavior_map,
    is_deterministic,
    minimize,
)
from .envfile import load_env, parse_env, save_env, serialize_env
from .envpolicy import (
    BehaviorMap,
    EnvironmentPolicy,
    behavior_map,
    count_env_policies,
    enumerate_support,
    env_policy_posterior,
    env_policy_prob,
    history_prob_given_ep,
    rollout,
)
from .equivalence import (
    CollectionQuery,
    CollectionWitness,
    ConditionalWitness,
    Verdict,
    behavior_distribution,
    check_cf_equiv,
    check_equiv,
    collection_prob,
    ensure_similar,
)
from .errors import (
    CfpomdpError,
    DeterminismError,
    EnvFileError,
    InputError,
    SimilarityError,
    ValidationError,
)
from .learning import (
    PureLearningSpec,
    evaluate,
    load_weights,
    save_weights,
    transfer,
    verify_universality,
)
from .simulate import SimulationResult, simulate
from .trajectory import cond_history_prob, history_prob, initial_posterior

__version__ = "0.1.0"

__all__ = [
    "BehaviorMap",
    "BehaviorPartition",
    "CfpomdpError",
    "CollectionQuery",
    "CollectionWitness",
    "ConditionalWitness",
    "DeterminismError",
    "DeterministicPolicy",
    "EnvFileError",
    "EnvironmentPolicy",
    "FiniteDist",
    "History",
    "InputError",
    "Pomdp",
    "PureLearningSpec",
    "Rat",
    "SimilarityError",
    "SimulationResult",
    "StochasticPolicy",
    "ValidationError",
    "Verdict",
    "behavior_distribution",
    "behavior_map",
    "behavior_partition",
    "check_cf_equiv",
    "check_equiv",
    "collection_prob",
    "cond_history_prob",
    "corpus_path",
    "count_env_policies",
    "determinize",
    "ensure_similar",
    "enumerate_det_policies",
    "enumerate_support",
    "env_policy_posterior",
    "env_policy_prob",
    "evaluate",
    "history_prob",
    "history_prob_given_ep",
    "initial_behavior_map",
    "initial_posterior",
    "is_deterministic",
    "load_corpus",
    "load_env",
    "load_weights",
    "minimize",
    "parse_env",
    "parse_rational",
    "reachable_histories",
    "rollout",
    "save_env",
    "save_weights",
    "serialize_env",
    "simulate",
    "transfer",
    "validate",
    "verify_universality",
]
