"""Sequential search-and-stop: offline oracle, online semi-bandit learners and a budgeted simulator."""

from .errors import (
    CycleDetected,
    DimensionMismatch,
    InstanceTooLarge,
    InvalidVertexLabel,
    MaxRoundsExceeded,
    NotEdgeless,
    SearchStopError,
)
from .objective import ParamVector, cost_ratio_j, cost_ratio_j_plus, density, gap, weighted_completion
from .oracle import OracleResult, brute_force_oracle, j_star, oracle
from .policies import ArmStatistics, Kind, PolicyKind
from .poset import Dag, enumerate_searches, is_initial_set, is_search, validate_dag
from .scheduling import SchedulingStrategy, exhaustive_scheduling, scheduling, smith_rule
from .simulator import CostModel, ProblemInstance, run_episode, run_stationary

__version__ = "0.1.0"
