"""Command-line front end.

Subcommands: gen-data, train-base, train-encoder, train-style, eval, infer.
A flat key=value config file (--config) supplies every tunable; CLI flags
override config values. Exit codes: 0 success, 2 argument error, 3 data
error, 4 training error, 5 integrity error.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys

import numpy as np

from scdp.config import Config, load_config
from scdp.errors import ArgumentError, DataError, IntegrityError, TrainingError
from scdp.rng import Rng

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_INTEGRITY = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scdp",
        description="Style-conditioned trajectory diffusion laboratory",
    )
    parser.add_argument("--config", help="flat key=value config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a Bezier demonstration dataset")
    p.add_argument("--task", required=True, choices=["block_reach", "navigation"])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-base", help="train the base diffusion policy")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", required=True, type=int)
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train-encoder", help="pre-train the scene autoencoder")
    p.add_argument("--scenes", required=True, type=int)
    p.add_argument("--epochs", required=True, type=int)
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train-style", help="post-train one style predictor")
    p.add_argument("--style", required=True, choices=["legible", "predictable"])
    p.add_argument("--subset-frac", required=True, type=float)
    p.add_argument("--epochs", required=True, type=int)
    p.add_argument("--bundle", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("eval", help="run the evaluation harness")
    p.add_argument("--bundle", required=True)
    p.add_argument("--episodes", required=True, type=int)
    p.add_argument("--split", required=True, choices=["ambiguous", "clear", "both"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("infer", help="roll out the conditioned policy on one scene")
    p.add_argument("--bundle", required=True)
    p.add_argument("--scene", required=True, help="scene as inline JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    return parser


def _cmd_gen_data(args, cfg: Config) -> int:
    from scdp.world import build_dataset, dataset_save

    demos = build_dataset(
        args.task,
        args.n,
        Rng(args.seed),
        offset_range=(0.0, cfg.get_float("world.offset_max")),
        steps=cfg.get_int("world.steps"),
        a_max=cfg.get_float("world.a_max"),
        observer_cfg=cfg.observer(),
        eff_eps=cfg.get_float("metrics.eps"),
    )
    dataset_save(demos, args.out)
    print(f"wrote {len(demos)} demos to {args.out}")
    return EXIT_OK


def _cmd_train_base(args, cfg: Config) -> int:
    from scdp.policy import BasePolicy, make_schedule, save_policy, train_base
    from scdp.style.bundle import ARTIFACT_FILES, read_manifest, record_artifact
    from scdp.world import dataset_load

    demos = dataset_load(args.data)
    if not demos:
        raise DataError(f"dataset '{args.data}' is empty")
    seed = cfg.get_int("train.seed") if args.seed is None else args.seed
    policy = BasePolicy.create(cfg.policy(), make_schedule(cfg.get_int("policy.K")),
                               Rng(seed))
    curve = train_base(
        policy, demos, args.epochs, Rng(derive(seed, 1)),
        lr=cfg.get_float("train.lr_base"),
        batch=cfg.get_int("train.batch"),
        windows_per_demo=cfg.get_int("train.windows_per_demo"),
    )
    os.makedirs(args.out, exist_ok=True)
    manifest = read_manifest(args.out)
    manifest["task"] = demos[0].trajectory.scene.task
    manifest["config"] = cfg.as_dict()
    dataset_copy = os.path.join(args.out, ARTIFACT_FILES["dataset"])
    if os.path.abspath(args.data) != os.path.abspath(dataset_copy):
        shutil.copyfile(args.data, dataset_copy)
    save_policy(policy, os.path.join(args.out, ARTIFACT_FILES["base"]))
    manifest = record_artifact(args.out, "dataset", manifest)
    record_artifact(args.out, "base", manifest)
    if curve:
        print(f"trained base: {args.epochs} epochs, "
              f"loss {curve[0]:.4f} -> {curve[-1]:.4f}")
    else:
        print("trained base: 0 epochs (unchanged)")
    return EXIT_OK


def _cmd_train_encoder(args, cfg: Config) -> int:
    from scdp.style import save_encoder, train_encoder
    from scdp.style.bundle import ARTIFACT_FILES, read_manifest, record_artifact

    os.makedirs(args.out, exist_ok=True)
    manifest = read_manifest(args.out)
    task = manifest.get("task") or "block_reach"
    seed = cfg.get_int("train.seed") if args.seed is None else args.seed
    encoder = train_encoder(
        args.scenes, args.epochs, Rng(derive(seed, 2)),
        task=task,
        n_neg=cfg.get_int("world.n_neg"),
        latent=cfg.get_int("style.latent"),
        hidden=cfg.get_int("style.encoder_hidden"),
        lr=cfg.get_float("train.lr_encoder"),
    )
    save_encoder(encoder, os.path.join(args.out, ARTIFACT_FILES["encoder"]))
    if encoder.holdout_rmse is not None:
        manifest["encoder_holdout_rmse"] = encoder.holdout_rmse
    record_artifact(args.out, "encoder", manifest)
    rmse = "skipped" if encoder.holdout_rmse is None else f"{encoder.holdout_rmse:.5f}"
    print(f"trained encoder on {args.scenes} scenes; held-out RMSE: {rmse}")
    return EXIT_OK


def _cmd_train_style(args, cfg: Config) -> int:
    from scdp.style import StylePredictor, post_train_style, save_predictor
    from scdp.style.bundle import ARTIFACT_FILES, load_bundle, record_artifact
    from scdp.world import select_style_subset

    bundle = load_bundle(args.bundle, need=("base", "encoder", "dataset"))
    cfg = Config({**bundle.config.as_dict(), **_nondefault(cfg)})
    subset_style = "legible" if args.style == "legible" else "efficient"
    subset = select_style_subset(bundle.demos, subset_style, args.subset_frac)
    seed = cfg.get_int("train.seed") if args.seed is None else args.seed
    predictor = StylePredictor(
        args.style,
        latent=cfg.get_int("style.latent"),
        width=bundle.policy.net.config.bottleneck_width,
        hidden=cfg.get_int("style.trunk_hidden"),
        rng=Rng(derive(seed, 3, 0 if args.style == "legible" else 1)),
    )
    curve = post_train_style(
        bundle.policy, bundle.encoder, predictor, subset, args.epochs,
        Rng(derive(seed, 4, 0 if args.style == "legible" else 1)),
        lr=cfg.get_float("train.lr_style"),
        batch=cfg.get_int("train.batch"),
        windows_per_demo=cfg.get_int("train.windows_per_demo"),
    )
    key = f"style_{args.style}"
    save_predictor(predictor, os.path.join(args.bundle, ARTIFACT_FILES[key]))
    record_artifact(args.bundle, key)
    span = f"loss {curve[0]:.4f} -> {curve[-1]:.4f}" if curve else "0 epochs"
    print(f"trained {args.style} predictor on {len(subset)} demos; {span}")
    return EXIT_OK


def _cmd_eval(args, cfg: Config) -> int:
    from scdp.evalcli.harness import EvalConfig, evaluate, write_report
    from scdp.style.bundle import load_bundle

    bundle = load_bundle(args.bundle)
    merged = Config({**bundle.config.as_dict(), **_nondefault(cfg)})
    bundle.config = merged
    seed = merged.get_int("eval.seed") if args.seed is None else args.seed
    splits = ("ambiguous", "clear") if args.split == "both" else (args.split,)
    report = evaluate(
        bundle,
        EvalConfig(
            episodes=args.episodes,
            seed=seed,
            splits=splits,
            max_steps=merged.get_int("eval.max_steps"),
            success_radius=merged.get_float("eval.success_radius"),
            metrics_eps=merged.get_float("metrics.eps"),
        ),
    )
    csv_path, json_path = write_report(report, args.out_dir)
    for key in sorted(report.aggregates):
        agg = report.aggregates[key]
        print(
            f"{key}: T {agg['T']['mean']:.3f}±{agg['T']['std']:.3f}  "
            f"D̂ {agg['D_hat']['mean']:.3f}  Ê {agg['E_hat']['mean']:.3f}  "
            f"success {agg['success_rate']:.2f}  (n={agg['n']})"
        )
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _cmd_infer(args, cfg: Config) -> int:
    from scdp.style import conditioned_rollout
    from scdp.style.bundle import load_bundle
    from scdp.world.scenes import TASKS, Scene

    bundle = load_bundle(args.bundle)
    merged = Config({**bundle.config.as_dict(), **_nondefault(cfg)})
    bundle.config = merged
    try:
        obj = json.loads(args.scene)
        task = obj.get("task", bundle.task)
        if task not in TASKS:
            raise DataError(f"unknown task tag '{task}'")
        scene = Scene(
            task=task,
            start=np.array(obj["start"], dtype=np.float64),
            goal_star=np.array(obj["goal_star"], dtype=np.float64),
            goals_neg=[np.array(g, dtype=np.float64) for g in obj["goals_neg"]],
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ArgumentError(f"bad --scene JSON: {exc}") from exc
    seed = merged.get_int("eval.seed") if args.seed is None else args.seed
    result = conditioned_rollout(
        bundle, scene, Rng(seed),
        max_steps=merged.get_int("eval.max_steps"),
        success_radius=merged.get_float("eval.success_radius"),
    )
    payload = {
        "task": scene.task,
        "states": result.trajectory.states.tolist(),
        "actions": result.trajectory.actions.tolist(),
        "success": result.success,
        "steps": result.steps,
        "style_decisions": result.decisions,
    }
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(payload, f)
        f.write("\n")
    print(f"rollout: success={result.success} steps={result.steps} "
          f"decisions={result.decisions or '-'}")
    return EXIT_OK


def derive(seed: int, *ixs: int) -> int:
    from scdp.rng import derive_seed

    return derive_seed(seed, *ixs)


def _nondefault(cfg: Config) -> dict[str, str]:
    from scdp.config import DEFAULTS

    return {k: v for k, v in cfg.as_dict().items() if DEFAULTS.get(k) != v}


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train-base": _cmd_train_base,
    "train-encoder": _cmd_train_encoder,
    "train-style": _cmd_train_style,
    "eval": _cmd_eval,
    "infer": _cmd_infer,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ArgumentError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
