"""JSON run configuration -> network / training configs.

Example::

    {
      "network": {"modalities": 2, "plan": [[16, 2], [32, 2], [64, 2], [64, 1], [64, 1]], "init": "he"},
      "train": {"learning_rate": 0.1, "momentum": 0.9, "epochs": 60, "batch_size": 16, "seed": 0},
      "shift": {"k_fraction": "1/8", "i_fraction": "1/8", "sites": [1, 2, 3, 4],
                "modality_shift_enabled": true, "temporal_shift_enabled": true, "share_stages": [2, 3]},
      "data": {"dir": "data/train", "mode": "full"}
    }

Disabling a shift mechanism is the same as setting its band fraction to 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .model.config import DEFAULT_PLAN, DEFAULT_SHARED, NetworkConfig, TrainConfig, build_stages
from .shift import ShiftConfig

ABLATION_SHIFT = {
    "mt_shared": {"modality_shift_enabled": True, "temporal_shift_enabled": True, "share_stages": [2, 3]},
    "t_shared": {"modality_shift_enabled": False, "temporal_shift_enabled": True, "share_stages": [2, 3]},
    "t_nonshared": {"modality_shift_enabled": False, "temporal_shift_enabled": True, "share_stages": []},
    "nonshift": {"modality_shift_enabled": False, "temporal_shift_enabled": False, "share_stages": []},
}

# Settings that train the desk-scale network reliably (see README).
TUNED_TRAIN = {"learning_rate": 0.1, "momentum": 0.9, "epochs": 60, "batch_size": 16, "seed": 0}


@dataclass
class RunConfig:
    network: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    shift: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - {"network", "train", "shift", "data"}
        if unknown:
            raise ConfigError(f"unknown run-config sections: {sorted(unknown)}")
        return cls(dict(d.get("network", {})), dict(d.get("train", {})), dict(d.get("shift", {})), dict(d.get("data", {})))

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc

    @classmethod
    def ablation(cls, name: str, **train) -> "RunConfig":
        if name not in ABLATION_SHIFT:
            raise ConfigError(f"unknown ablation {name!r}")
        return cls({"init": "he"}, {**TUNED_TRAIN, **train}, dict(ABLATION_SHIFT[name]), {})

    def to_dict(self) -> dict:
        return {"network": self.network, "train": self.train, "shift": self.shift, "data": self.data}

    @property
    def init_scheme(self) -> str:
        return self.network.get("init", "he")

    def shift_config(self) -> ShiftConfig:
        s = self.shift
        try:
            k = Fraction(str(s.get("k_fraction", "1/8"))) if s.get("modality_shift_enabled", True) else 0
            i = Fraction(str(s.get("i_fraction", "1/8"))) if s.get("temporal_shift_enabled", True) else 0
        except ValueError as exc:
            raise ConfigError(f"bad shift fraction: {exc}") from exc
        sites = tuple(s.get("sites", (1, 2, 3, 4))) if (k or i) else ()
        return ShiftConfig(k, i, sites)

    def network_config(self, in_channels=1, num_classes=None, frames=8, height=16, width=16) -> NetworkConfig:
        n = self.network
        plan = tuple(tuple(p) for p in n.get("plan", DEFAULT_PLAN))
        shared = tuple(self.shift.get("share_stages", DEFAULT_SHARED))
        try:
            return NetworkConfig(
                modalities=int(n.get("modalities", 2)),
                num_classes=int(num_classes or n.get("num_classes", 4)),
                stages=build_stages(in_channels, plan, shared),
                shift=self.shift_config(),
                frames=frames,
                height=height,
                width=width,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def train_config(self, epochs=None, seed=None) -> TrainConfig:
        t = dict(self.train)
        if epochs is not None:
            t["epochs"] = epochs
        if seed is not None:
            t["seed"] = seed
        try:
            return TrainConfig(**t)
        except TypeError as exc:
            raise ConfigError(f"bad train section: {exc}") from exc
