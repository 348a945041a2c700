"""Flat key=value configuration shared by the CLI and the bundle manifest.

A config file holds one ``key = value`` pair per line ('#' starts a
comment); unknown keys are rejected so typos fail loudly. CLI flags override
file values, which override the defaults below.
"""

from __future__ import annotations

from scdp.errors import ArgumentError

DEFAULTS: dict[str, str] = {
    # observer model
    "observer.lambda": "5.0",
    "observer.tau": "0.2",
    "observer.weight_fn": "t_rev",  # one of t_rev | t | const
    "observer.burn_in": "0.5",
    # confusion ellipse
    "ellipse.kappa": "0.75",
    "ellipse.eccentricity": "0.9",
    # diffusion policy
    "policy.K": "100",
    "policy.horizon.To": "2",
    "policy.horizon.Tp": "16",
    "policy.horizon.Ta": "8",
    "policy.channels": "64,128,256",
    # demonstration generation
    "world.steps": "48",
    "world.a_max": "0.08",
    "world.offset_max": "0.35",
    "world.n_neg": "1",
    # training
    "train.seed": "0",
    "train.batch": "256",
    "train.windows_per_demo": "16",
    "train.lr_base": "1e-4",
    "train.lr_style": "3e-4",
    "train.lr_encoder": "3e-4",
    "style.latent": "16",
    "style.encoder_hidden": "64",
    "style.trunk_hidden": "256",
    "style.subset_fraction": "0.2",
    # metrics and evaluation
    "metrics.eps": "1e-6",
    "transparency.u": "2.5",
    "transparency.x0": "0.5",
    "transparency.swap_weights": "false",
    "eval.episodes": "100",
    "eval.max_steps": "150",
    "eval.success_radius": "0.05",
    "eval.seed": "424242",
}


class Config:
    """Typed access over merged default/file/CLI key-value pairs."""

    def __init__(self, overrides: dict[str, str] | None = None):
        self.values = dict(DEFAULTS)
        if overrides:
            for key, val in overrides.items():
                if key not in DEFAULTS:
                    raise ArgumentError(f"unknown config key '{key}'")
                self.values[key] = str(val)

    def get(self, key: str) -> str:
        if key not in self.values:
            raise ArgumentError(f"unknown config key '{key}'")
        return self.values[key]

    def get_float(self, key: str) -> float:
        try:
            return float(self.get(key))
        except ValueError as exc:
            raise ArgumentError(f"config key '{key}' is not a number: {exc}") from exc

    def get_int(self, key: str) -> int:
        try:
            return int(self.get(key))
        except ValueError as exc:
            raise ArgumentError(f"config key '{key}' is not an integer: {exc}") from exc

    def get_bool(self, key: str) -> bool:
        raw = self.get(key).strip().lower()
        if raw in ("true", "1", "yes"):
            return True
        if raw in ("false", "0", "no"):
            return False
        raise ArgumentError(f"config key '{key}' is not a boolean: '{raw}'")

    def get_ints(self, key: str) -> tuple[int, ...]:
        try:
            return tuple(int(v) for v in self.get(key).split(","))
        except ValueError as exc:
            raise ArgumentError(f"config key '{key}' is not an int list: {exc}") from exc

    def as_dict(self) -> dict[str, str]:
        return dict(self.values)

    # dataclass builders used across the package

    def observer(self):
        from scdp.observer.model import ObserverConfig

        return ObserverConfig(
            lam=self.get_float("observer.lambda"),
            tau=self.get_float("observer.tau"),
            weight_fn=self.get("observer.weight_fn"),
            burn_in=self.get_float("observer.burn_in"),
        )

    def ellipse(self):
        from scdp.observer.ellipse import EllipseConfig

        return EllipseConfig(
            kappa=self.get_float("ellipse.kappa"),
            eccentricity=self.get_float("ellipse.eccentricity"),
        )

    def transparency(self):
        from scdp.evalcli.metrics import TransparencyParams

        return TransparencyParams(
            u=self.get_float("transparency.u"),
            x0=self.get_float("transparency.x0"),
            swap_weights=self.get_bool("transparency.swap_weights"),
        )

    def policy(self):
        from scdp.policy.unet import Horizons, PolicyConfig

        channels = self.get_ints("policy.channels")
        return PolicyConfig(
            channels=channels,
            horizons=Horizons(
                To=self.get_int("policy.horizon.To"),
                Tp=self.get_int("policy.horizon.Tp"),
                Ta=self.get_int("policy.horizon.Ta"),
            ),
            diffusion_steps=self.get_int("policy.K"),
        )


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"config line {lineno}: expected key=value, got '{raw}'")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def load_config(path: str | None, cli_overrides: dict[str, str] | None = None) -> Config:
    """Merge defaults <- file <- CLI overrides."""
    merged: dict[str, str] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as f:
            merged.update(parse_config_text(f.read()))
    if cli_overrides:
        merged.update(cli_overrides)
    return Config(merged)
