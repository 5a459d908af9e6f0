"""Training loop: subgraph sampling, two augmented views, the adversarial
view, the combined loss, an Adam step with decoupled weight decay, and the
curriculum schedule on the adversarial coefficient.

All randomness comes from named sub-streams of the config seed (init,
subgraph, augment, attack), so individual components are reproducible and
skipping one (the attack is skipped entirely while eps1 == 0) does not shift
the draws of the others. The JSON-lines serialization of the log contains
only deterministic fields; wall-clock times stay on the in-memory records.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .attack import pgd_attack
from .config import TrainConfig
from .encoder import EncoderParams, backward, forward, init_params
from .errors import ContractViolationError, TrainingCollapseError
from .graph import Graph, augment, sample_subgraph
from .loss import LossBreakdown, total_loss
from .rng import RngStream

_COLLAPSE_CEILING = 1e4


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


@dataclass
class OptimizerState:
    """Adam moment accumulators, one pair per parameter tensor."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: EncoderParams) -> "OptimizerState":
        return cls(
            m={k: np.zeros_like(a) for k, a in params.as_dict().items()},
            v={k: np.zeros_like(a) for k, a in params.as_dict().items()},
        )


def optimizer_step(
    params: EncoderParams,
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    learning_rate: float,
    weight_decay: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One Adam update with bias correction and decoupled weight decay.

    Returns (new_params, new_state); inputs are not mutated.
    """
    t = state.step + 1
    new_params = {}
    new_m = {}
    new_v = {}
    for name, p in params.as_dict().items():
        g = grads[name]
        if g.shape != p.shape:
            raise ContractViolationError(f"gradient shape mismatch for {name}")
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_params[name] = p - learning_rate * m_hat / (np.sqrt(v_hat) + eps) - learning_rate * weight_decay * p
        new_m[name] = m
        new_v[name] = v
    return EncoderParams(**new_params), OptimizerState(m=new_m, v=new_v, step=t)


def curriculum_update(eps1: float, epoch_index: int, gamma: float, period: int) -> float:
    """Multiply eps1 by gamma after every `period`-th epoch, else unchanged."""
    if (epoch_index + 1) % period == 0:
        return gamma * eps1
    return eps1


# ---------------------------------------------------------------------------
# training log
# ---------------------------------------------------------------------------


@dataclass
class EpochRecord:
    epoch: int
    breakdown: LossBreakdown
    eps1: float
    attack: dict | None
    subgraph_nodes: int
    wall_time_s: float

    def to_json_dict(self) -> dict:
        # deterministic fields only; wall time is deliberately excluded so
        # identical seeds produce byte-identical serialized logs
        out = {"epoch": self.epoch, "eps1": self.eps1, "subgraph_nodes": self.subgraph_nodes}
        out.update(self.breakdown.as_dict())
        out["attack"] = self.attack
        return out


@dataclass
class TrainingLog:
    records: list[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_json_dict(), sort_keys=True) for r in self.records]
        return "\n".join(lines) + ("\n" if lines else "")


def params_digest(params: EncoderParams) -> str:
    h = hashlib.sha256()
    for name in EncoderParams.names():
        h.update(np.ascontiguousarray(getattr(params, name)).tobytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# the loop
# ---------------------------------------------------------------------------


def _accumulate(total: dict[str, np.ndarray] | None, grads) -> dict[str, np.ndarray]:
    part = grads.param_dict()
    if total is None:
        return {k: v.copy() for k, v in part.items()}
    for k in total:
        total[k] += part[k]
    return total


def train(G: Graph, config: TrainConfig, on_epoch=None):
    """Run the full training loop on a binary graph.

    Per epoch: sample an induced subgraph, build two augmented views, build
    the adversarial view against the configured anchor (skipped while
    eps1 == 0), evaluate the combined loss on all views, backpropagate
    through every encoder pass into the shared parameters, take an Adam
    step, then apply the curriculum update. Aborts with
    TrainingCollapseError on a non-finite or exploding total loss.

    `on_epoch(epoch, params, record)` is called after each epoch when given
    (used for periodic checkpoints). Returns (params, TrainingLog).
    """
    config.validate()
    if not G.is_binary():
        raise ContractViolationError("training requires a binary graph")

    root = RngStream(config.seed)
    rng_init = root.child("init")
    rng_subgraph = root.child("subgraph")
    rng_augment = root.child("augment")
    rng_attack = root.child("attack")

    params = init_params(G.d, config.hidden_dim, config.embed_dim, config.proj_dim, rng_init)
    opt_state = OptimizerState.zeros_like(params)
    log = TrainingLog()
    eps1 = config.eps1
    last_breakdown = None

    for epoch in range(config.epochs):
        tic = time.perf_counter()
        m = min(config.subgraph_size, G.n)
        Gs = sample_subgraph(G, m, rng_subgraph).graph
        view1 = augment(Gs, config.p_edge_1, config.p_feat_1, rng_augment).graph
        view2 = augment(Gs, config.p_edge_2, config.p_feat_2, rng_augment).graph

        attack_diag = None
        G_adv = None
        if eps1 > 0.0:
            anchor = {"view1": view1, "view2": view2, "original": Gs}[config.attack.anchor]
            digest_before = params_digest(params)
            G_adv, diag = pgd_attack(Gs, anchor, params, config.attack, config.tau, rng_attack)
            if params_digest(params) != digest_before:  # pragma: no cover - attack never writes params
                raise ContractViolationError("attack mutated the encoder parameters")
            attack_diag = diag.as_dict()

        _, Z1, cache1 = forward(view1.adjacency, view1.features, params)
        _, Z2, cache2 = forward(view2.adjacency, view2.features, params)
        Z_adv = cache_adv = None
        if G_adv is not None:
            _, Z_adv, cache_adv = forward(G_adv.adjacency, G_adv.features, params)
        Z0 = cache0 = None
        if config.eps2 > 0.0:
            _, Z0, cache0 = forward(Gs.adjacency, Gs.features, params)

        breakdown, dZ1, dZ2, dZ_adv, dZ0 = total_loss(
            Z1, Z2, Z_adv, Z0, config.tau, eps1, config.eps2
        )
        if not np.isfinite(breakdown.total) or breakdown.total > _COLLAPSE_CEILING:
            raise TrainingCollapseError(epoch, last_breakdown)
        last_breakdown = breakdown

        grads = _accumulate(None, backward(cache1, params, dZ=dZ1))
        grads = _accumulate(grads, backward(cache2, params, dZ=dZ2))
        if cache_adv is not None:
            grads = _accumulate(grads, backward(cache_adv, params, dZ=dZ_adv))
        if cache0 is not None:
            grads = _accumulate(grads, backward(cache0, params, dZ=dZ0))

        params, opt_state = optimizer_step(
            params, grads, opt_state, config.learning_rate, config.weight_decay
        )

        record = EpochRecord(
            epoch=epoch,
            breakdown=breakdown,
            eps1=eps1,
            attack=attack_diag,
            subgraph_nodes=m,
            wall_time_s=time.perf_counter() - tic,
        )
        log.append(record)
        if on_epoch is not None:
            on_epoch(epoch, params, record)
        eps1 = curriculum_update(eps1, epoch, config.gamma, config.period)

    return params, log
