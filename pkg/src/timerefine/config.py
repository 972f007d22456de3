"""Run configuration: one JSON document, strict about unknown keys."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Optional

from .core import NoiseSchedule
from .decode import DecodeStrategy
from .losses import LossConfig
from .seqgen import SeqGenConfig
from .simulate import PredictorModel

SEED_ENV = "TIMEREFINE_SEED"


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "seqgen": {
        "variant": "offset_prediction",
        "max_resamples": 100,
        "schedule": {"sigmas": [5.0, 3.0, 1.0, 0.0], "mode": "fixed_seconds"},
    },
    "decode": {"strategy": "last_step", "first_step_offsets": True},
    "loss": {"kind": "l1", "lambda": 10.0, "giou_weight": 1.0, "positions": "all", "normalize_by_duration": False},
    "predictor": {"step_error_stds": [5.0, 3.0, 1.0, 0.3], "offset_error_stds": [5.0, 3.0, 1.0, 0.3]},
    "paths": {"input": None, "input_format": "jsonl", "durations": None, "output": None},
}


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        path = f"{where}.{key}" if where else key
        if key not in base:
            raise ConfigError(f"unknown config key {path!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path!r} must be an object")
            out[key] = _merge(base[key], value, path)
        else:
            out[key] = value
    return out


@dataclass
class RunConfig:
    seed: int
    workers: int
    seqgen: SeqGenConfig
    strategy: DecodeStrategy
    loss: LossConfig
    positions: str
    normalize_by_duration: bool
    predictor: PredictorModel
    paths: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def build(raw: dict) -> RunConfig:
    try:
        seed = int(raw["seed"])
        sg = raw["seqgen"]
        schedule = NoiseSchedule(tuple(sg["schedule"]["sigmas"]), sg["schedule"]["mode"])
        seqgen = SeqGenConfig(schedule, sg["variant"], seed, int(sg["max_resamples"]))
        strategy = DecodeStrategy.parse(raw["decode"]["strategy"])
        if strategy.kind == "first_step" and not raw["decode"]["first_step_offsets"]:
            strategy = DecodeStrategy("first_step", apply_offsets=False)
        lc = raw["loss"]
        loss = LossConfig(lc["kind"], float(lc["lambda"]), float(lc["giou_weight"]))
        if lc["positions"] not in ("all", "last"):
            raise ValueError(f"loss.positions must be 'all' or 'last', got {lc['positions']!r}")
        pm = raw["predictor"]
        predictor = PredictorModel(tuple(pm["step_error_stds"]), tuple(pm["offset_error_stds"]), seed)
        workers = int(raw["workers"])
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(seed, workers, seqgen, strategy, loss, lc["positions"], bool(lc["normalize_by_duration"]),
                     predictor, dict(raw["paths"]), raw)


def load(path: Optional[str] = None, overrides: Optional[dict] = None, env=None) -> RunConfig:
    """Defaults, then the file, then ``TIMEREFINE_SEED``, then command-line overrides."""
    env = os.environ if env is None else env
    raw = DEFAULTS
    file_cfg: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"{path}: top level must be an object")
        raw = _merge(raw, file_cfg)
    if SEED_ENV in env and "seed" not in file_cfg:
        try:
            raw = _merge(raw, {"seed": int(env[SEED_ENV])})
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer") from exc
    if overrides:
        raw = _merge(raw, overrides)
    return build(raw)
