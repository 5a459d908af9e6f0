"""Scikit-learn style front end for the embedding trainer.

`AdversarialContrastiveEmbedding` exposes every training knob as a flat
constructor parameter (so `get_params` / `set_params` / `clone` and
grid-search tooling compose with it), fits on a `Graph`, and transforms any
compatible graph into its node-embedding matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import AttackConfig, TrainConfig
from .encoder import encode
from .graph import Graph
from .trainer import train


class AdversarialContrastiveEmbedding(TransformerMixin, BaseEstimator):
    """Unsupervised node-embedding learner with an adversarial third view.

    Parameters mirror the config-file keys one for one; see
    :mod:`advgcl.config` for meanings and defaults. After `fit`, the learned
    weights are in `params_` and the per-epoch log in `log_`.
    """

    def __init__(
        self,
        tau: float = 0.4,
        eps1: float = 1.0,
        eps2: float = 1.0,
        gamma: float = 1.1,
        period: int = 20,
        subgraph_size: int = 500,
        p_edge_1: float = 0.2,
        p_feat_1: float = 0.3,
        p_edge_2: float = 0.4,
        p_feat_2: float = 0.4,
        learning_rate: float = 1e-3,
        weight_decay: float = 1e-5,
        epochs: int = 200,
        seed: int = 0,
        hidden_dim: int = 128,
        embed_dim: int = 128,
        proj_dim: int = 128,
        attack_steps: int = 5,
        attack_alpha: float = 0.1,
        attack_beta: float = 0.01,
        attack_delta_a_fraction: float = 0.1,
        attack_delta_x: float = 0.5,
        attack_anchor: str = "view1",
        attack_discrete_samples: int = 1,
    ):
        self.tau = tau
        self.eps1 = eps1
        self.eps2 = eps2
        self.gamma = gamma
        self.period = period
        self.subgraph_size = subgraph_size
        self.p_edge_1 = p_edge_1
        self.p_feat_1 = p_feat_1
        self.p_edge_2 = p_edge_2
        self.p_feat_2 = p_feat_2
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.seed = seed
        self.hidden_dim = hidden_dim
        self.embed_dim = embed_dim
        self.proj_dim = proj_dim
        self.attack_steps = attack_steps
        self.attack_alpha = attack_alpha
        self.attack_beta = attack_beta
        self.attack_delta_a_fraction = attack_delta_a_fraction
        self.attack_delta_x = attack_delta_x
        self.attack_anchor = attack_anchor
        self.attack_discrete_samples = attack_discrete_samples

    def _build_config(self) -> TrainConfig:
        attack = AttackConfig(
            steps=self.attack_steps,
            alpha=self.attack_alpha,
            beta=self.attack_beta,
            delta_a_fraction=self.attack_delta_a_fraction,
            delta_x=self.attack_delta_x,
            anchor=self.attack_anchor,
            discrete_samples=self.attack_discrete_samples,
        )
        return TrainConfig(
            tau=self.tau,
            eps1=self.eps1,
            eps2=self.eps2,
            gamma=self.gamma,
            period=self.period,
            subgraph_size=self.subgraph_size,
            p_edge_1=self.p_edge_1,
            p_feat_1=self.p_feat_1,
            p_edge_2=self.p_edge_2,
            p_feat_2=self.p_feat_2,
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            seed=self.seed,
            hidden_dim=self.hidden_dim,
            embed_dim=self.embed_dim,
            proj_dim=self.proj_dim,
            attack=attack,
        )

    def fit(self, graph: Graph, y=None):
        config = self._build_config()
        self.params_, self.log_ = train(graph, config)
        self.config_ = config
        return self

    def transform(self, graph: Graph) -> np.ndarray:
        """Node embeddings of `graph` under the learned encoder."""
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before transform")
        H, _ = encode(graph.adjacency, graph.features, self.params_)
        return H
