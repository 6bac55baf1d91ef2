"""Self-stabilizing leader election by travelling binary counters on anonymous graphs."""

from .analysis import (
    TrainView, extract_trains, is_legitimate, layer_table, legitimacy_problems, min_train_value,
    train_value,
)
from .campaigns import SUITES, CampaignReport, RunRow, run_campaign
from .engine import Configuration, RunResult, run, step
from .fuzz import FuzzSpec, InfeasibleSpec, generate_config
from .graphs import Graph, GraphError, generate
from .protocol import NodeState, ProtocolParams, Wagon, update_state
from .rng import RandomSource

__all__ = [
    "CampaignReport", "Configuration", "FuzzSpec", "Graph", "GraphError", "InfeasibleSpec",
    "NodeState", "ProtocolParams", "RandomSource", "RunResult", "RunRow", "SUITES", "TrainView",
    "Wagon", "extract_trains", "generate", "generate_config", "is_legitimate", "layer_table",
    "legitimacy_problems", "min_train_value", "run", "run_campaign", "step", "train_value",
    "update_state",
]
