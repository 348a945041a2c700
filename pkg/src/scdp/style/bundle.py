"""Bundle directory: manifest with hashes tying all trained artifacts together.

A bundle is a directory holding ``manifest.json`` plus the artifact files it
references (base policy checkpoint, scene encoder, per-style predictors, and
the training dataset). Every artifact is recorded with its SHA-256; loaders
re-hash on read and refuse silently modified files.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from scdp.config import Config
from scdp.errors import DataError, IntegrityError
from scdp.policy.base import BasePolicy, file_sha256, load_policy
from scdp.style.encode import SceneEncoder, load_encoder
from scdp.style.predictor import StylePredictor, load_predictor
from scdp.world.dataset import dataset_load
from scdp.world.scenes import Demo

MANIFEST = "manifest.json"
ARTIFACT_FILES = {
    "base": "base.ckpt",
    "encoder": "encoder.ckpt",
    "dataset": "dataset.jsonl",
    "style_legible": "style_legible.ckpt",
    "style_predictable": "style_predictable.ckpt",
}


def manifest_path(root: str) -> str:
    return os.path.join(root, MANIFEST)


def read_manifest(root: str) -> dict:
    path = manifest_path(root)
    if not os.path.exists(path):
        return {"version": 1, "task": None, "artifacts": {}, "config": {}}
    with open(path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("version") != 1:
        raise DataError(f"unsupported bundle manifest version {manifest.get('version')}")
    return manifest


def write_manifest(root: str, manifest: dict) -> None:
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=root, prefix=".manifest-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, manifest_path(root))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def record_artifact(root: str, key: str, manifest: dict | None = None) -> dict:
    """Hash an artifact file into the manifest (written back to disk)."""
    if key not in ARTIFACT_FILES:
        raise DataError(f"unknown bundle artifact '{key}'")
    manifest = read_manifest(root) if manifest is None else manifest
    rel = ARTIFACT_FILES[key]
    manifest["artifacts"][key] = {
        "path": rel,
        "sha256": file_sha256(os.path.join(root, rel)),
    }
    write_manifest(root, manifest)
    return manifest


def artifact_path(root: str, key: str, manifest: dict) -> str:
    entry = manifest["artifacts"].get(key)
    if entry is None:
        raise DataError(
            f"bundle at '{root}' has no '{key}' artifact yet; "
            f"run the corresponding training command first"
        )
    path = os.path.join(root, entry["path"])
    if not os.path.exists(path):
        raise DataError(f"bundle artifact file missing: {path}")
    actual = file_sha256(path)
    if actual != entry["sha256"]:
        raise IntegrityError(
            f"hash mismatch for bundle artifact '{key}': manifest says "
            f"{entry['sha256'][:12]}..., file is {actual[:12]}..."
        )
    return path


@dataclass
class StyleBundle:
    """Loaded artifacts of a bundle directory."""

    root: str
    task: str
    config: Config
    policy: BasePolicy
    encoder: SceneEncoder | None = None
    predictors: dict[str, StylePredictor] = field(default_factory=dict)
    demos: list[Demo] = field(default_factory=list)

    @property
    def ellipse(self):
        return self.config.ellipse()


def load_bundle(
    root: str,
    need: tuple[str, ...] = ("base", "encoder", "dataset",
                             "style_legible", "style_predictable"),
) -> StyleBundle:
    """Load and hash-verify the requested artifacts of a bundle directory."""
    manifest = read_manifest(root)
    if not manifest["artifacts"]:
        raise DataError(f"'{root}' is not a bundle (empty or missing manifest)")
    config = Config(manifest.get("config") or {})
    policy = load_policy(artifact_path(root, "base", manifest))
    bundle = StyleBundle(
        root=root,
        task=manifest.get("task") or "block_reach",
        config=config,
        policy=policy,
    )
    if "encoder" in need:
        bundle.encoder = load_encoder(artifact_path(root, "encoder", manifest))
    if "dataset" in need:
        bundle.demos = dataset_load(artifact_path(root, "dataset", manifest))
    for key in ("style_legible", "style_predictable"):
        if key in need:
            predictor = load_predictor(artifact_path(root, key, manifest))
            bundle.predictors[predictor.style] = predictor
    return bundle


def params_sha256(params) -> str:
    """Order-independent hash of named parameter tensors."""
    import hashlib

    h = hashlib.sha256()
    for p in sorted(params, key=lambda p: p.name):
        h.update(p.name.encode("utf-8"))
        h.update(np.ascontiguousarray(p.data).tobytes())
    return h.hexdigest()
