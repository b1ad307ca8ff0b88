"""Norm emergence through contextual agreements between role-playing agents.

Agents on a generated social network play roles, agree pairwise on how
their period vocabularies correspond, and learn (independently or
collaboratively) which periods to schedule joint tasks in.
"""

from .config import CaseSpec, ScenarioConfig, config_from_dict, load_config
from .engine import CRL, IRL, RoundRecord, Simulation, check_convergence
from .errors import (
    AssignmentError,
    ConfigError,
    DomainError,
    NoJointTask,
    ParameterError,
    ProtocolError,
)
from .experiment import (
    RunMetrics,
    SuiteResult,
    agent_in_agreement,
    run_single,
    run_suite,
    write_outputs,
)
from .games import GameSuite, GameTable, best_joint_payoff, default_suite, game_payoff
from .learning import LearnerParams, crl_update, irl_update, max_plus
from .protocol import Feedback, detect_feedback, run_exchange_round
from .semantics import CorrespondenceMap, Decision, enumerate_coherent, utility
from .society import Society, build_society, role_pair_links

__version__ = "0.1.0"

__all__ = [
    "AssignmentError", "CRL", "CaseSpec", "ConfigError", "CorrespondenceMap", "Decision",
    "DomainError", "Feedback", "GameSuite", "GameTable", "IRL", "LearnerParams", "NoJointTask",
    "ParameterError", "ProtocolError", "RoundRecord", "RunMetrics", "ScenarioConfig", "Simulation",
    "Society", "SuiteResult", "agent_in_agreement", "best_joint_payoff", "build_society",
    "check_convergence", "config_from_dict", "crl_update", "default_suite", "detect_feedback",
    "enumerate_coherent", "game_payoff", "irl_update", "load_config", "max_plus", "role_pair_links",
    "run_exchange_round", "run_single", "run_suite", "utility", "write_outputs",
]
