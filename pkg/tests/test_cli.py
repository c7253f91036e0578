"""Command-line pipeline: end-to-end run, rerun determinism, exit codes."""

import numpy as np
import pytest

from hapticrep.cli import main


def run_ok(argv):
    assert main(argv) == 0


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One small end-to-end run shared by the tests in this module."""
    root = tmp_path_factory.mktemp("cli")
    paths = {
        "data": str(root / "data.jsonl"),
        "model": str(root / "model.json"),
        "report": str(root / "train.csv"),
        "qnet": str(root / "qnet.json"),
        "curve": str(root / "curve.csv"),
        "pred": str(root / "pred.csv"),
        "task": str(root / "task.csv"),
        "emb": str(root / "emb.csv"),
    }
    run_ok(["gen-data", "--scenario", "stirrer", "--success", "4",
            "--fail", "4", "--seed", "3", "--out", paths["data"]])
    run_ok(["train-elbo", "--data", paths["data"], "--out", paths["model"],
            "--report", paths["report"], "--epochs", "2",
            "--latent-dim", "4", "--hidden", "8", "--seed", "1"])
    run_ok(["train-q", "--data", paths["data"], "--model", paths["model"],
            "--out", paths["qnet"], "--curve", paths["curve"],
            "--iterations", "5", "--seed", "2"])
    run_ok(["eval-pred", "--data", paths["data"], "--model", paths["model"],
            "--horizons", "1,3", "--out", paths["pred"], "--seed", "0"])
    run_ok(["eval-task", "--scenario", "stirrer", "--model", paths["model"],
            "--qnet", paths["qnet"], "--episodes", "3", "--seed", "4",
            "--out", paths["task"]])
    run_ok(["export-embeddings", "--data", paths["data"],
            "--model", paths["model"], "--out", paths["emb"]])
    return root, paths


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        _, paths = pipeline
        import os
        for p in paths.values():
            assert os.path.getsize(p) > 0

    def test_prediction_report_structure(self, pipeline):
        _, paths = pipeline
        with open(paths["pred"]) as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "predictor,horizon,mean_l2,std_l2,count"
        names = {line.split(",")[0] for line in lines[1:]}
        assert names == {"full", "chance"}

    def test_task_report_structure(self, pipeline):
        _, paths = pipeline
        with open(paths["task"]) as fh:
            lines = fh.read().splitlines()
        assert len(lines) == 5  # header + 3 episodes + summary

    def test_embeddings_columns(self, pipeline):
        _, paths = pipeline
        with open(paths["emb"]) as fh:
            header = fh.readline().strip()
        assert header == "sequence_id,t,z0,z1,z2,z3"

    def test_rerun_is_byte_identical(self, pipeline, tmp_path):
        # Same commands, same seeds, fresh directory: every artifact
        # that encodes results must match byte for byte. (The training
        # report carries wall-clock timings, so compare it without its
        # final column.)
        _, paths = pipeline
        second = {k: str(tmp_path / ("2_" + k)) for k in paths}
        run_ok(["gen-data", "--scenario", "stirrer", "--success", "4",
                "--fail", "4", "--seed", "3", "--out", second["data"]])
        run_ok(["train-elbo", "--data", second["data"], "--out",
                second["model"], "--report", second["report"],
                "--epochs", "2", "--latent-dim", "4", "--hidden", "8",
                "--seed", "1"])
        run_ok(["train-q", "--data", second["data"], "--model",
                second["model"], "--out", second["qnet"], "--curve",
                second["curve"], "--iterations", "5", "--seed", "2"])
        run_ok(["eval-pred", "--data", second["data"], "--model",
                second["model"], "--horizons", "1,3", "--out",
                second["pred"], "--seed", "0"])
        run_ok(["eval-task", "--scenario", "stirrer", "--model",
                second["model"], "--qnet", second["qnet"], "--episodes",
                "3", "--seed", "4", "--out", second["task"]])
        run_ok(["export-embeddings", "--data", second["data"], "--model",
                second["model"], "--out", second["emb"]])
        for key in ("data", "model", "qnet", "curve", "pred", "task", "emb"):
            with open(paths[key], "rb") as a, open(second[key], "rb") as b:
                assert a.read() == b.read(), key
        strip = lambda p: [",".join(line.split(",")[:-1])
                           for line in open(p).read().splitlines()]
        assert strip(paths["report"]) == strip(second["report"])


class TestBaselineModels:
    def test_window_and_rnn_paths(self, pipeline, tmp_path):
        _, paths = pipeline
        wmodel = str(tmp_path / "w.json")
        rmodel = str(tmp_path / "r.json")
        run_ok(["train-elbo", "--data", paths["data"], "--out", wmodel,
                "--model", "window", "--epochs", "1", "--latent-dim", "4",
                "--hidden", "8", "--seed", "1"])
        run_ok(["train-elbo", "--data", paths["data"], "--out", rmodel,
                "--model", "rnn", "--epochs", "1", "--hidden", "8",
                "--seed", "1"])
        run_ok(["eval-pred", "--data", paths["data"], "--model", wmodel,
                "--horizons", "1", "--out", str(tmp_path / "wp.csv"),
                "--seed", "0"])
        run_ok(["eval-pred", "--data", paths["data"], "--model", rmodel,
                "--horizons", "1", "--out", str(tmp_path / "rp.csv"),
                "--seed", "0"])
        rqnet = str(tmp_path / "rq.json")
        run_ok(["train-q", "--data", paths["data"], "--model", rmodel,
                "--out", rqnet, "--iterations", "2", "--seed", "2"])
        run_ok(["eval-task", "--scenario", "stirrer", "--model", rmodel,
                "--qnet", rqnet, "--episodes", "2", "--seed", "0",
                "--out", str(tmp_path / "rt.csv")])
        with pytest.raises(SystemExit):
            main(["export-embeddings", "--data", paths["data"],
                  "--model", rmodel, "--out", str(tmp_path / "re.csv")])

    def test_reference_policies(self, pipeline, tmp_path):
        run_ok(["eval-task", "--scenario", "stirrer", "--policy", "chance",
                "--episodes", "5", "--seed", "0",
                "--out", str(tmp_path / "c.csv")])
        run_ok(["eval-task", "--scenario", "stirrer", "--policy", "oracle",
                "--episodes", "5", "--seed", "0",
                "--out", str(tmp_path / "o.csv")])
        with open(tmp_path / "o.csv") as fh:
            assert "success_rate,1.0" in fh.read()


class TestFailureModes:
    def test_missing_data_file(self, tmp_path):
        assert main(["train-elbo", "--data", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "m.json")]) == 1

    def test_corrupt_model_file(self, pipeline, tmp_path):
        _, paths = pipeline
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["eval-pred", "--data", paths["data"], "--model",
                     str(bad), "--out", str(tmp_path / "p.csv")]) == 1

    def test_unknown_scenario_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["gen-data", "--scenario", "toaster",
                  "--out", str(tmp_path / "d.jsonl")])
        assert info.value.code == 2

    def test_missing_scenario_flag(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["gen-data", "--out", str(tmp_path / "d.jsonl")])

    def test_task_model_policy_requires_model(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["eval-task", "--scenario", "stirrer",
                  "--out", str(tmp_path / "t.csv")])
