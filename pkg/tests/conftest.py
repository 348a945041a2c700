"""Shared fixtures: a tiny end-to-end bundle built through the CLI."""

import numpy as np
import pytest

from scdp.evalcli.cli import main

TINY_CONFIG = """
policy.K = 10
policy.channels = 8,8,16
policy.horizon.Tp = 8
policy.horizon.Ta = 4
train.batch = 64
train.windows_per_demo = 8
world.steps = 24
eval.max_steps = 60
"""


@pytest.fixture(scope="session")
def tiny_bundle(tmp_path_factory):
    """Small but complete bundle: dataset, base, encoder, both styles."""
    root = tmp_path_factory.mktemp("tiny")
    cfg = root / "config.txt"
    cfg.write_text(TINY_CONFIG)
    data = str(root / "dataset.jsonl")
    bundle = str(root / "bundle")

    def run(*args):
        rc = main(["--config", str(cfg), *args])
        assert rc == 0, args
        return rc

    run("gen-data", "--task", "block_reach", "--n", "12", "--seed", "5",
        "--out", data)
    run("train-base", "--data", data, "--epochs", "3", "--out", bundle,
        "--seed", "1")
    run("train-encoder", "--scenes", "100", "--epochs", "3", "--out", bundle,
        "--seed", "1")
    for style in ("legible", "predictable"):
        run("train-style", "--style", style, "--subset-frac", "0.4",
            "--epochs", "2", "--bundle", bundle, "--seed", "1")
    return {"root": str(root), "config": str(cfg), "data": data, "bundle": bundle}
