import json

import numpy as np
import pytest

from advgcl import Graph, RngStream, generate_sbm, load_graph, save_graph
from advgcl.cli import main


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    G = generate_sbm([20, 20, 20], 0.25, 0.03, 12, RngStream(321))
    paths = {
        "edges": str(root / "edges.txt"),
        "features": str(root / "features.txt"),
        "labels": str(root / "labels.txt"),
        "sidecar": str(root / "graph.json"),
    }
    save_graph(G, paths["edges"], paths["features"], paths["labels"], paths["sidecar"])
    return paths


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "train.cfg"
    path.write_text(
        "# quick training setup\n"
        "epochs = 6\n"
        "subgraph_size = 30\n"
        "hidden_dim = 16\n"
        "embed_dim = 16\n"
        "proj_dim = 16\n"
        "attack_steps = 2\n"
        "seed = 9\n"
    )
    return str(path)


def run_train(dataset, fast_config, out_dir, extra=()):
    return main(
        [
            "train",
            "--edges", dataset["edges"],
            "--features", dataset["features"],
            "--labels", dataset["labels"],
            "--config", fast_config,
            "--out-dir", str(out_dir),
            *extra,
        ]
    )


class TestTrainCommand:
    def test_produces_artifacts(self, dataset, fast_config, tmp_path):
        assert run_train(dataset, fast_config, tmp_path / "run") == 0
        assert (tmp_path / "run" / "checkpoint.npz").exists()
        assert (tmp_path / "run" / "log.jsonl").exists()
        manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
        assert manifest["config"]["epochs"] == 6
        assert manifest["config"]["attack_delta_x"] == 0.5  # default materialized
        assert manifest["version"]
        assert "sha256" in manifest["inputs"]["edges"]

    def test_byte_identical_reruns(self, dataset, fast_config, tmp_path):
        out = tmp_path / "a"
        run_train(dataset, fast_config, out)
        log_a = (out / "log.jsonl").read_bytes()
        manifest_a = (out / "manifest.json").read_bytes()
        ckpt_a = (out / "checkpoint.npz").read_bytes()
        run_train(dataset, fast_config, out)
        assert (out / "log.jsonl").read_bytes() == log_a
        assert (out / "manifest.json").read_bytes() == manifest_a
        assert (out / "checkpoint.npz").read_bytes() == ckpt_a

    def test_override_recorded_in_manifest(self, dataset, fast_config, tmp_path):
        run_train(dataset, fast_config, tmp_path / "o", extra=["--set", "eps1=1.5"])
        manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert manifest["config"]["eps1"] == 1.5

    def test_periodic_checkpoints(self, dataset, fast_config, tmp_path):
        run_train(dataset, fast_config, tmp_path / "p", extra=["--checkpoint-every", "2"])
        assert (tmp_path / "p" / "checkpoint_000002.npz").exists()
        assert (tmp_path / "p" / "checkpoint_000004.npz").exists()

    def test_unknown_config_key_exits_1(self, dataset, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("not_a_key = 3\n")
        code = main(
            [
                "train",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--config", str(bad),
                "--out-dir", str(tmp_path / "x"),
            ]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error[usage]:") and "not_a_key" in err

    def test_missing_data_exits_2(self, fast_config, tmp_path, capsys):
        code = main(
            [
                "train",
                "--edges", str(tmp_path / "missing.txt"),
                "--features", str(tmp_path / "missing2.txt"),
                "--config", fast_config,
                "--out-dir", str(tmp_path / "x"),
            ]
        )
        assert code == 2
        assert capsys.readouterr().err.startswith("error[data]:")

    def test_collapse_exits_3(self, dataset, fast_config, tmp_path, capsys):
        code = run_train(dataset, fast_config, tmp_path / "c", extra=["--set", "tau=1e-9"])
        assert code == 3
        assert capsys.readouterr().err.startswith("error[numeric]:")

    def test_bad_flag_exits_1(self, capsys):
        assert main(["train", "--nonsense"]) == 1
        assert capsys.readouterr().err.startswith("error[usage]:")


class TestEmbedAndProbe:
    @pytest.fixture(scope="class")
    def trained(self, dataset, fast_config, tmp_path_factory):
        out = tmp_path_factory.mktemp("trained")
        run_train(dataset, fast_config, out)
        return out

    def test_embed_writes_matrix(self, dataset, trained, tmp_path):
        out = tmp_path / "emb.txt"
        code = main(
            [
                "embed",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--checkpoint", str(trained / "checkpoint.npz"),
                "--out", str(out),
            ]
        )
        assert code == 0
        H = np.loadtxt(out)
        assert H.shape == (60, 16)
        assert (tmp_path / "emb.txt.manifest.json").exists()

    def test_embed_deterministic(self, dataset, trained, tmp_path):
        outs = []
        for name in ("e1.txt", "e2.txt"):
            main(
                [
                    "embed",
                    "--edges", dataset["edges"],
                    "--features", dataset["features"],
                    "--checkpoint", str(trained / "checkpoint.npz"),
                    "--out", str(tmp_path / name),
                ]
            )
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]

    def test_probe_reports_per_split_accuracies(self, dataset, trained, tmp_path):
        emb = tmp_path / "emb.txt"
        main(
            [
                "embed",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--checkpoint", str(trained / "checkpoint.npz"),
                "--out", str(emb),
            ]
        )
        metrics_path = tmp_path / "metrics.json"
        code = main(
            [
                "probe",
                "--embedding", str(emb),
                "--labels", dataset["labels"],
                "--splits", "20",
                "--out", str(metrics_path),
            ]
        )
        assert code == 0
        metrics = json.loads(metrics_path.read_text())
        assert metrics["splits"] == 20
        assert len(metrics["accuracies"]) == 20
        assert 0.0 <= metrics["mean_acc"] <= 1.0
        assert metrics["std_acc"] >= 0.0


class TestDegradeCommand:
    def test_row_count(self, dataset, fast_config, tmp_path):
        out_dir = tmp_path / "run"
        run_train(dataset, fast_config, out_dir)
        csv_path = tmp_path / "vuln.csv"
        code = main(
            [
                "degrade",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--checkpoint", str(out_dir / "checkpoint.npz"),
                "--p", "0.03",
                "--steps", "60",
                "--out", str(csv_path),
            ]
        )
        assert code == 0
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0] == "t,mean_sim,std_sim,surviving_edge_frac,surviving_dim_frac"
        assert len(lines) == 62  # header + t = 0..60
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 1.0


class TestPoisonCommand:
    def test_writes_standard_format(self, dataset, tmp_path):
        out_dir = tmp_path / "poisoned"
        code = main(
            [
                "poison",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--labels", dataset["labels"],
                "--edge-flip-fraction", "0.2",
                "--feat-mask-fraction", "0.2",
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        poisoned = load_graph(
            str(out_dir / "edges.txt"), str(out_dir / "features.txt"), str(out_dir / "labels.txt")
        )
        original = load_graph(dataset["edges"], dataset["features"], dataset["labels"])
        assert poisoned.n == original.n
        assert not np.array_equal(poisoned.adjacency, original.adjacency)
        sidecar = json.loads((out_dir / "graph.json").read_text())
        assert sidecar["n"] == original.n

    def test_inputs_not_mutated(self, dataset, tmp_path):
        before = open(dataset["edges"], "rb").read()
        main(
            [
                "poison",
                "--edges", dataset["edges"],
                "--features", dataset["features"],
                "--labels", dataset["labels"],
                "--out-dir", str(tmp_path / "p2"),
            ]
        )
        assert open(dataset["edges"], "rb").read() == before
