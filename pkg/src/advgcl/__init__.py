"""Adversarial graph contrastive learning.

Self-supervised node embeddings trained with a two-view contrastive
objective, hardened by a budget-constrained PGD adversarial view and
stabilized by an information-regularization hinge, plus a linear-probe
evaluator and a graph-degradation stability study.
"""

__version__ = "0.1.0"

from .attack import (
    AttackDiagnostics,
    PerturbationState,
    apply_perturbation,
    bisect_dual,
    pgd_attack,
    project_features,
    project_structure,
    sample_edge_perturbation,
)
from .config import AttackConfig, TrainConfig, resolve_config
from .encoder import (
    EncoderParams,
    backward,
    encode,
    forward,
    init_params,
    load_params,
    project_head,
    save_params,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    DomainError,
    IngestionError,
    NumericError,
    TrainingCollapseError,
)
from .estimator import AdversarialContrastiveEmbedding
from .evaluation import (
    LogisticProbe,
    SplitMasks,
    StabilityRecord,
    accuracy,
    fit_probe,
    make_split,
    random_poison,
    vulnerability_study,
)
from .graph import (
    Graph,
    GraphView,
    SubgraphHandle,
    augment,
    complement_mask,
    degrade_sequence,
    generate_sbm,
    load_graph,
    normalize_adjacency,
    sample_subgraph,
    save_graph,
)
from .loss import (
    LossBreakdown,
    contrastive_loss,
    info_regularization,
    pairwise_cosine,
    total_loss,
)
from .numerics import cosine_similarity, finite_diff_gradient
from .rng import RngStream
from .trainer import (
    OptimizerState,
    TrainingLog,
    curriculum_update,
    optimizer_step,
    train,
)

__all__ = [
    "AdversarialContrastiveEmbedding",
    "AttackConfig",
    "AttackDiagnostics",
    "ConfigError",
    "ContractViolationError",
    "DomainError",
    "EncoderParams",
    "Graph",
    "GraphView",
    "IngestionError",
    "LogisticProbe",
    "LossBreakdown",
    "NumericError",
    "OptimizerState",
    "PerturbationState",
    "RngStream",
    "SplitMasks",
    "StabilityRecord",
    "SubgraphHandle",
    "TrainConfig",
    "TrainingCollapseError",
    "TrainingLog",
    "accuracy",
    "apply_perturbation",
    "augment",
    "backward",
    "bisect_dual",
    "complement_mask",
    "contrastive_loss",
    "cosine_similarity",
    "curriculum_update",
    "degrade_sequence",
    "encode",
    "finite_diff_gradient",
    "fit_probe",
    "forward",
    "generate_sbm",
    "info_regularization",
    "init_params",
    "load_graph",
    "load_params",
    "make_split",
    "normalize_adjacency",
    "optimizer_step",
    "pairwise_cosine",
    "pgd_attack",
    "project_features",
    "project_head",
    "project_structure",
    "random_poison",
    "resolve_config",
    "sample_edge_perturbation",
    "sample_subgraph",
    "save_graph",
    "save_params",
    "total_loss",
    "train",
    "vulnerability_study",
]
