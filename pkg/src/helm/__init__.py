"""Belief-network toolkit for interactive ship classification.

Two inference engines over a shared model compiler: subjective-Bayes
updating on proposition networks and belief maintenance on multi-valued
variable networks, plus merit-driven question selection, an interactive
session layer, and a benchmarking harness.
"""

from .bms import (
    BeliefState,
    SchedulerPolicy,
    activate,
    belief,
    beliefs,
    init_equilibrium,
    post_evidence,
    propagate_to_equilibrium,
    rank_states,
)
from .compiler import (
    FeatureModel,
    askable_ids,
    class_priors,
    compile_bms,
    compile_prospector,
    load_model,
)
from .harness import (
    compare_engines,
    random_polytree,
    scheduler_benchmark,
    scheduler_sweep,
)
from .merit import BmsAdapter, MeritRecord, ProspectorAdapter, expected_delta
from .merit import merit as question_merit
from .merit import merit_table, next_question
from .networks import (
    CLAMP,
    Evidence,
    EvidentialLink,
    NetworkIndex,
    PropositionNetwork,
    PropositionNode,
    ValidationReport,
    VariableNetwork,
    VariableNode,
    load_network,
    require_valid,
    save_network,
    validate,
)
from .oracle import ENUMERATION_CAP, exact_posterior, prior_marginals
from .prospector import (
    PropositionState,
    combine_evidence,
    init_state,
    interpolate_posterior,
    post_graded_evidence,
    propagate,
    rank_classes,
)
from .session import EngineKind, Session, start

__all__ = [
    "BeliefState",
    "BmsAdapter",
    "CLAMP",
    "ENUMERATION_CAP",
    "EngineKind",
    "Evidence",
    "EvidentialLink",
    "FeatureModel",
    "MeritRecord",
    "NetworkIndex",
    "PropositionNetwork",
    "PropositionNode",
    "PropositionState",
    "ProspectorAdapter",
    "SchedulerPolicy",
    "Session",
    "ValidationReport",
    "VariableNetwork",
    "VariableNode",
    "activate",
    "askable_ids",
    "belief",
    "beliefs",
    "class_priors",
    "combine_evidence",
    "compare_engines",
    "compile_bms",
    "compile_prospector",
    "exact_posterior",
    "expected_delta",
    "init_equilibrium",
    "init_state",
    "interpolate_posterior",
    "load_model",
    "load_network",
    "merit_table",
    "next_question",
    "post_evidence",
    "post_graded_evidence",
    "prior_marginals",
    "propagate",
    "propagate_to_equilibrium",
    "question_merit",
    "random_polytree",
    "rank_classes",
    "rank_states",
    "require_valid",
    "save_network",
    "scheduler_benchmark",
    "scheduler_sweep",
    "start",
    "validate",
]

__version__ = "0.1.0"
