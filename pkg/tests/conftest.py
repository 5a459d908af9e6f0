"""Shared fixtures for the test suite.

The acceptance criteria that need trained models all run on one synthetic
community-graph fixture (a 4-block, 600-node stochastic block model with
weak feature signal), sized so the whole suite finishes on a laptop-class
CPU: strong enough community structure for embeddings to beat raw features
decisively, weak enough that the adversarial view has headroom to help.
All expensive training runs live in one session-scoped fixture and are
shared across criteria.
"""

import numpy as np
import pytest

import advgcl
from advgcl import RngStream, TrainConfig, generate_sbm

FIXTURE_PARAMS = dict(
    block_sizes=[150, 150, 150, 150],
    p_in=0.035,
    p_out=0.012,
    d=128,
    mean_scale=0.15,
)
FIXTURE_SEED = 2024
ACC_SPLIT_SEED = 900
N_SPLITS = 5

# training setup shared by the acceptance runs; attack-budget and curriculum
# values are the documented defaults, step sizes were chosen from the
# suggested grid on this fixture
ACC_TRAIN = dict(
    tau=0.4,
    subgraph_size=500,
    epochs=500,
    learning_rate=3e-3,
    weight_decay=1e-4,
    seed=11,
)
ACC_ATTACK = dict(alpha=0.5, beta=0.05)
SWEEP_EPS2 = 0.0  # the eps1 ablation holds the hinge off, mirroring the
                  # headline ablation protocol; the full model is trained
                  # separately at (eps1=1, eps2=1)


@pytest.fixture(scope="session")
def acceptance_graph():
    return generate_sbm(
        FIXTURE_PARAMS["block_sizes"],
        FIXTURE_PARAMS["p_in"],
        FIXTURE_PARAMS["p_out"],
        FIXTURE_PARAMS["d"],
        RngStream(FIXTURE_SEED),
        mean_scale=FIXTURE_PARAMS["mean_scale"],
    )


def probe_accuracy(H, labels, n_splits=N_SPLITS, seed=ACC_SPLIT_SEED):
    """Mean test accuracy over fixed splits (paired across models)."""
    accs = []
    for k in range(n_splits):
        split = advgcl.make_split(labels, RngStream(seed).child(f"split:{k}"))
        model = advgcl.fit_probe(H[split.train], labels[split.train])
        accs.append(advgcl.accuracy(model, H[split.test], labels[split.test]))
    return float(np.mean(accs)), accs


@pytest.fixture(scope="session")
def trained_runs(acceptance_graph):
    """Train the baseline and the adversarial family once for all criteria.

    Keys: 'baseline' (two-view objective alone), 'sweep_<eps1>' (adversarial
    coefficient ablation at eps2 = SWEEP_EPS2), and 'full' (eps1 = 1,
    eps2 = 1, the headline configuration).
    """
    from advgcl import AttackConfig

    runs = {}

    def do(name, **overrides):
        cfg = TrainConfig(
            attack=AttackConfig(**ACC_ATTACK), **{**ACC_TRAIN, **overrides}
        )
        params, log = advgcl.train(acceptance_graph, cfg)
        runs[name] = {"config": cfg, "params": params, "log": log}

    do("baseline", eps1=0.0, eps2=0.0)
    for eps1 in (0.5, 1.0, 1.5, 2.0):
        do(f"sweep_{eps1}", eps1=eps1, eps2=SWEEP_EPS2)
    do("full", eps1=1.0, eps2=1.0)
    return runs
