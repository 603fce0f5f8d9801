"""Label propagation community detection on dynamic planted-partition graphs."""

from .errors import DynLPAError, ExpressionError, InvariantViolation, ParameterError
from .graph_models import (
    DynamicGraphProcess,
    Markovian,
    NonHomogeneous,
    PlantedPartition,
    Snapshot,
    TwoBlock,
    new_partition,
)
from .metrics import Trajectory, is_good_labeling, label_counts
from .protocol import ProtocolConfig, RunResult, run_protocol
from .schedule import PhaseSchedule, TheoryConstants, experimental_schedule, theoretical_schedule

__version__ = "0.1.0"

__all__ = [
    "DynLPAError",
    "ExpressionError",
    "InvariantViolation",
    "ParameterError",
    "DynamicGraphProcess",
    "Markovian",
    "NonHomogeneous",
    "PlantedPartition",
    "Snapshot",
    "TwoBlock",
    "new_partition",
    "Trajectory",
    "is_good_labeling",
    "label_counts",
    "ProtocolConfig",
    "RunResult",
    "run_protocol",
    "PhaseSchedule",
    "TheoryConstants",
    "experimental_schedule",
    "theoretical_schedule",
]
