"""Self-organizing dense mmWave network simulator.

Pipeline: Poisson deployment of base stations, distributed clustering
over a deterministic virtual-time event queue, per-cluster multi-agent
Q-learning of transmit powers, and SINR/capacity/fairness evaluation.
Everything is seeded and reproducible down to artifact bytes.
"""

from .channel import (
    ChannelParams,
    GainMatrix,
    build_gain_matrix,
    capacity,
    pathloss_friis_db,
    pathloss_nlos_db,
    sinr,
    sinr_all,
)
from .config import ConfigError, DeployParams, RunConfig, load_config
from .deployment import NetworkLayout, Point2D, generate_layout
from .floc import (
    Band,
    Cluster,
    ClusterAssignment,
    FlocParams,
    NonConvergenceError,
    ProtocolError,
    add_node,
    remove_node,
    run_clustering,
    verify_assignment,
)
from .metrics import EvaluationReport, evaluate, jain_index
from .pipeline import (
    StageError,
    report_text,
    run_pipeline,
    sweep_cluster_sizes,
    synthesize_cluster,
)
from .qlearn import (
    ActionGrid,
    LearningConfig,
    RewardSpec,
    reward_cdpq,
    reward_expq,
    train_cluster,
)

__version__ = "0.1.0"

__all__ = [
    "ActionGrid",
    "Band",
    "ChannelParams",
    "Cluster",
    "ClusterAssignment",
    "ConfigError",
    "DeployParams",
    "EvaluationReport",
    "FlocParams",
    "GainMatrix",
    "LearningConfig",
    "NetworkLayout",
    "NonConvergenceError",
    "Point2D",
    "ProtocolError",
    "RewardSpec",
    "RunConfig",
    "StageError",
    "add_node",
    "build_gain_matrix",
    "capacity",
    "evaluate",
    "generate_layout",
    "jain_index",
    "load_config",
    "pathloss_friis_db",
    "pathloss_nlos_db",
    "remove_node",
    "report_text",
    "reward_cdpq",
    "reward_expq",
    "run_clustering",
    "run_pipeline",
    "sinr",
    "sinr_all",
    "sweep_cluster_sizes",
    "synthesize_cluster",
    "train_cluster",
    "verify_assignment",
]
