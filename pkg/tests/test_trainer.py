import json

import numpy as np
import pytest

from advgcl import (
    EncoderParams,
    RngStream,
    TrainConfig,
    TrainingCollapseError,
    curriculum_update,
    generate_sbm,
    init_params,
    optimizer_step,
    train,
)
from advgcl.trainer import OptimizerState, params_digest


@pytest.fixture(scope="module")
def small_graph():
    return generate_sbm([50, 50], 0.15, 0.02, 32, RngStream(100))


def small_config(**overrides):
    base = dict(
        epochs=20,
        subgraph_size=60,
        hidden_dim=32,
        embed_dim=32,
        proj_dim=32,
        seed=5,
    )
    base.update(overrides)
    return TrainConfig(**base)


class TestCurriculumUpdate:
    def test_fires_every_period(self):
        eps1 = 1.0
        for epoch in range(40):
            eps1 = curriculum_update(eps1, epoch, 1.1, 20)
        assert eps1 == pytest.approx(1.21, abs=1e-12)

    def test_identity_multiplier(self):
        eps1 = 0.7
        for epoch in range(100):
            eps1 = curriculum_update(eps1, epoch, 1.0, 10)
        assert eps1 == 0.7

    def test_period_longer_than_training(self):
        eps1 = 0.5
        for epoch in range(30):
            eps1 = curriculum_update(eps1, epoch, 2.0, 50)
        assert eps1 == 0.5

    def test_fires_exactly_at_boundaries(self):
        assert curriculum_update(1.0, 19, 1.1, 20) == 1.1
        assert curriculum_update(1.0, 18, 1.1, 20) == 1.0
        assert curriculum_update(1.0, 39, 1.1, 20) == 1.1


class TestOptimizerStep:
    def setup_method(self):
        self.params = init_params(4, 5, 3, 4, RngStream(1))
        self.state = OptimizerState.zeros_like(self.params)

    def zeros_grads(self):
        return {k: np.zeros_like(v) for k, v in self.params.as_dict().items()}

    def test_zero_gradient_zero_decay_is_identity(self):
        new_params, _ = optimizer_step(self.params, self.zeros_grads(), self.state, 0.01, 0.0)
        for name in EncoderParams.names():
            assert np.array_equal(getattr(new_params, name), getattr(self.params, name))

    def test_first_step_magnitude_is_learning_rate(self):
        grads = {k: np.ones_like(v) for k, v in self.params.as_dict().items()}
        new_params, state = optimizer_step(self.params, grads, self.state, 0.01, 0.0)
        delta = np.abs(new_params.W1 - self.params.W1)
        assert np.all(np.abs(delta - 0.01) < 1e-6)
        assert state.step == 1

    def test_deterministic(self):
        grads = {k: np.full_like(v, 0.3) for k, v in self.params.as_dict().items()}
        a, _ = optimizer_step(self.params, grads, self.state, 0.05, 1e-4)
        b, _ = optimizer_step(self.params, grads, self.state, 0.05, 1e-4)
        for name in EncoderParams.names():
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_decoupled_weight_decay_shrinks_params(self):
        new_params, _ = optimizer_step(self.params, self.zeros_grads(), self.state, 0.1, 0.5)
        assert np.allclose(new_params.W1, self.params.W1 * (1.0 - 0.1 * 0.5), atol=1e-15)

    def test_shape_mismatch_rejected(self):
        grads = self.zeros_grads()
        grads["W1"] = np.zeros((2, 2))
        with pytest.raises(Exception):
            optimizer_step(self.params, grads, self.state, 0.01, 0.0)


class TestTrain:
    def test_deterministic_log_and_params(self, small_graph):
        cfg = small_config()
        params1, log1 = train(small_graph, cfg)
        params2, log2 = train(small_graph, cfg)
        assert log1.to_jsonl() == log2.to_jsonl()
        assert params_digest(params1) == params_digest(params2)

    def test_baseline_reduction_skips_attack(self, small_graph):
        cfg = small_config(eps1=0.0, eps2=0.0)
        _, log = train(small_graph, cfg)
        for record in log.records:
            assert record.attack is None
            assert record.breakdown.adversarial_contrastive == 0.0
            assert record.breakdown.info_reg == 0.0
            assert record.breakdown.total == record.breakdown.contrastive

    def test_adversarial_runs_log_attack_diagnostics(self, small_graph):
        cfg = small_config(eps1=1.0, eps2=1.0, epochs=5)
        _, log = train(small_graph, cfg)
        for record in log.records:
            assert record.attack is not None
            assert record.attack["linf"] <= cfg.attack.delta_x
            for mass in record.attack["relaxed_mass"]:
                assert mass <= record.attack["budget"] + 1e-6

    def test_curriculum_trace_in_log(self, small_graph):
        cfg = small_config(eps1=0.5, eps2=0.0, epochs=25, period=10, gamma=1.5)
        _, log = train(small_graph, cfg)
        expected = 0.5
        for record in log.records:
            assert record.eps1 == expected
            expected = curriculum_update(expected, record.epoch, 1.5, 10)

    def test_breakdown_arithmetic_invariant(self, small_graph):
        cfg = small_config(eps1=1.0, eps2=1.0, epochs=5)
        _, log = train(small_graph, cfg)
        for r in log.records:
            bd = r.breakdown
            assert bd.total == bd.contrastive + bd.eps1 * bd.adversarial_contrastive + bd.eps2 * bd.info_reg

    def test_optimization_makes_progress(self, small_graph):
        cfg = small_config(eps1=0.0, eps2=0.0, epochs=200, learning_rate=2e-3)
        _, log = train(small_graph, cfg)
        assert log.records[-1].breakdown.contrastive < log.records[0].breakdown.contrastive

    def test_collapse_detection(self, small_graph):
        # a vanishing temperature blows the loss past the abort ceiling
        cfg = small_config(eps1=0.0, eps2=0.0, epochs=50, tau=1e-7)
        with pytest.raises(TrainingCollapseError) as err:
            train(small_graph, cfg)
        assert err.value.epoch >= 0

    def test_on_epoch_callback(self, small_graph):
        seen = []
        cfg = small_config(epochs=3, eps1=0.0, eps2=0.0)
        train(small_graph, cfg, on_epoch=lambda epoch, params, record: seen.append(epoch))
        assert seen == [0, 1, 2]

    def test_jsonl_is_valid_and_sorted(self, small_graph):
        cfg = small_config(epochs=3, eps1=1.0, eps2=1.0)
        _, log = train(small_graph, cfg)
        lines = log.to_jsonl().strip().split("\n")
        assert len(lines) == 3
        for line in lines:
            record = json.loads(line)
            assert list(record) == sorted(record)
            assert "wall_time_s" not in record  # timing must not break determinism

    def test_subgraph_capped_at_graph_size(self, small_graph):
        cfg = small_config(epochs=2, subgraph_size=10_000, eps1=0.0, eps2=0.0)
        _, log = train(small_graph, cfg)
        assert all(r.subgraph_nodes == small_graph.n for r in log.records)
