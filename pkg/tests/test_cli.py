"""CLI surface: exit codes, determinism, artifact handling."""

import json
import os

import pytest

from scdp.evalcli.cli import main


def test_gen_data_deterministic(tmp_path):
    a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
    args = ["gen-data", "--task", "navigation", "--n", "6", "--seed", "3"]
    assert main(args + ["--out", a]) == 0
    assert main(args + ["--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_bad_subcommand_argument_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen-data", "--task", "flying", "--n", "1", "--seed", "0",
              "--out", "/tmp/x.jsonl"])
    assert exc.value.code == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense.key = 1\n")
    rc = main(["--config", str(cfg), "gen-data", "--task", "navigation",
               "--n", "1", "--seed", "0", "--out", str(tmp_path / "d.jsonl")])
    assert rc == 2


def test_missing_dataset_exits_3(tmp_path):
    rc = main(["train-base", "--data", str(tmp_path / "nope.jsonl"),
               "--epochs", "0", "--out", str(tmp_path / "bundle")])
    assert rc == 3


def test_eval_without_bundle_exits_3(tmp_path):
    rc = main(["eval", "--bundle", str(tmp_path / "empty"), "--episodes", "1",
               "--split", "clear", "--out-dir", str(tmp_path / "out")])
    assert rc == 3


def test_corrupted_artifact_exits_5(tiny_bundle, tmp_path):
    import shutil

    bundle = str(tmp_path / "tampered")
    shutil.copytree(tiny_bundle["bundle"], bundle)
    path = os.path.join(bundle, "encoder.ckpt")
    blob = bytearray(open(path, "rb").read())
    blob[-1] ^= 0xFF
    open(path, "wb").write(bytes(blob))
    rc = main(["eval", "--bundle", bundle, "--episodes", "1",
               "--split", "clear", "--out-dir", str(tmp_path / "out")])
    assert rc == 5


def test_train_style_requires_prior_stages(tmp_path):
    rc = main(["train-style", "--style", "legible", "--subset-frac", "0.2",
               "--epochs", "1", "--bundle", str(tmp_path / "void")])
    assert rc == 3


def test_divergent_training_exits_4(tmp_path):
    cfg = tmp_path / "hot.cfg"
    cfg.write_text(
        "train.lr_base = 1e18\npolicy.K = 5\npolicy.channels = 8,8,16\n"
        "policy.horizon.Tp = 8\npolicy.horizon.Ta = 4\n"
        "train.batch = 32\ntrain.windows_per_demo = 8\nworld.steps = 24\n"
    )
    data = str(tmp_path / "d.jsonl")
    assert main(["gen-data", "--task", "navigation", "--n", "4", "--seed", "2",
                 "--out", data]) == 0
    rc = main(["--config", str(cfg), "train-base", "--data", data,
               "--epochs", "5", "--out", str(tmp_path / "bundle")])
    assert rc == 4


def test_eval_and_infer_outputs(tiny_bundle, tmp_path):
    out_dir = str(tmp_path / "eval")
    rc = main(["--config", tiny_bundle["config"], "eval",
               "--bundle", tiny_bundle["bundle"], "--episodes", "2",
               "--split", "both", "--out-dir", out_dir, "--seed", "11"])
    assert rc == 0
    assert sorted(os.listdir(out_dir)) == ["episodes.csv", "summary.json"]

    traj_path = str(tmp_path / "traj.json")
    scene = json.dumps({
        "task": "block_reach", "start": [0.1, 0.1],
        "goal_star": [0.8, 0.5], "goals_neg": [[0.8, 0.62]],
    })
    rc = main(["infer", "--bundle", tiny_bundle["bundle"], "--scene", scene,
               "--out", traj_path, "--seed", "4"])
    assert rc == 0
    payload = json.load(open(traj_path))
    assert set(payload) == {
        "task", "states", "actions", "success", "steps", "style_decisions"
    }
    assert len(payload["states"]) == len(payload["actions"]) + 1


def test_infer_bad_scene_json_exits_2(tiny_bundle, tmp_path):
    rc = main(["infer", "--bundle", tiny_bundle["bundle"], "--scene",
               "{not json", "--out", str(tmp_path / "t.json")])
    assert rc == 2


def test_manifest_records_all_artifacts(tiny_bundle):
    manifest = json.load(open(os.path.join(tiny_bundle["bundle"],
                                           "manifest.json")))
    assert manifest["task"] == "block_reach"
    assert set(manifest["artifacts"]) == {
        "base", "encoder", "dataset", "style_legible", "style_predictable"
    }
    for entry in manifest["artifacts"].values():
        assert len(entry["sha256"]) == 64
    assert manifest["config"]["policy.K"] == "10"
