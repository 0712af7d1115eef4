from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from ..errors import ConfigError
from ..shift import ShiftConfig


@dataclass(frozen=True)
class StageSpec:
    in_channels: int
    out_channels: int
    stride: int = 1
    shared: bool = False
    kernel: int = 3

    def __post_init__(self):
        if self.stride not in (1, 2):
            raise ConfigError(f"stride must be 1 or 2, got {self.stride}")
        if self.kernel != 3:
            raise ConfigError("only 3x3 kernels are supported")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ConfigError("stage channel counts must be >= 1")

    @property
    def param_count(self) -> int:
        return 9 * self.in_channels * self.out_channels + self.out_channels


# (out_channels, stride) of the five stages
DEFAULT_PLAN = ((16, 2), (32, 2), (64, 2), (64, 1), (64, 1))
DEFAULT_SHARED = (2, 3)


def build_stages(in_channels: int, plan=DEFAULT_PLAN, shared=DEFAULT_SHARED) -> tuple[StageSpec, ...]:
    stages = []
    c = in_channels
    for j, (out, stride) in enumerate(plan, start=1):
        stages.append(StageSpec(c, out, stride, j in shared))
        c = out
    return tuple(stages)


@dataclass(frozen=True)
class NetworkConfig:
    """Topology of the per-modality backbone, shift sites and classifier.

    ``frames``, ``height`` and ``width`` describe the expected input; the
    weights themselves do not depend on them.
    """

    modalities: int = 2
    num_classes: int = 4
    stages: tuple[StageSpec, ...] = field(default_factory=lambda: build_stages(1))
    shift: ShiftConfig = field(default_factory=ShiftConfig)
    frames: int = 8
    height: int = 16
    width: int = 16

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.modalities < 1:
            raise ConfigError("need at least one modality")
        if self.num_classes < 1:
            raise ConfigError("need at least one class")
        if not self.stages:
            raise ConfigError("need at least one stage")
        for a, b in zip(self.stages, self.stages[1:]):
            if a.out_channels != b.in_channels:
                raise ConfigError(f"stage widths do not chain: {a.out_channels} -> {b.in_channels}")
        if min(self.frames, self.height, self.width) < 1:
            raise ConfigError("input dims must be >= 1")
        self.shift.validate(self.site_channels())

    @property
    def in_channels(self) -> int:
        return self.stages[0].in_channels

    @property
    def num_features(self) -> int:
        return self.stages[-1].out_channels

    def site_channels(self) -> dict[int, int]:
        """Channel count entering each gap between consecutive stages."""
        return {j: st.out_channels for j, st in enumerate(self.stages[:-1], start=1)}

    def site_bands(self, site: int) -> tuple[int, int]:
        """Effective ``(k, i)`` at ``site``; ``k`` is 0 for a single modality."""
        k, i = self.shift.bands(self.stages[site - 1].out_channels)
        return (k if self.modalities > 1 else 0), i

    def spatial_dims(self) -> list[tuple[int, int]]:
        """Output (H, W) of every stage."""
        dims = []
        h, w = self.height, self.width
        for st in self.stages:
            h = (h - 1) // st.stride + 1
            w = (w - 1) // st.stride + 1
            dims.append((h, w))
        return dims

    def with_input(self, channels=None, frames=None, height=None, width=None) -> "NetworkConfig":
        stages = self.stages
        if channels is not None and channels != self.in_channels:
            stages = (replace(stages[0], in_channels=channels),) + stages[1:]
        return replace(
            self,
            stages=stages,
            frames=frames or self.frames,
            height=height or self.height,
            width=width or self.width,
        )

    def unshared(self) -> "NetworkConfig":
        return replace(self, stages=tuple(replace(s, shared=False) for s in self.stages))


ABLATIONS = ("mt_shared", "t_shared", "t_nonshared", "nonshift")


def ablation_config(name: str, **kw) -> NetworkConfig:
    """The four feature-shift settings compared in the ablation.

    ``mt_shared``: modality + temporal shift, stages 2-3 shared;
    ``t_shared``: temporal shift only, shared; ``t_nonshared``: temporal
    only, every stage per-modality; ``nonshift``: no shifts, no sharing.
    """
    in_ch = kw.pop("in_channels", 1)
    plan = kw.pop("plan", DEFAULT_PLAN)
    k_frac = kw.pop("k_fraction", Fraction(1, 8))
    i_frac = kw.pop("i_fraction", Fraction(1, 8))
    sites = kw.pop("sites", tuple(range(1, len(plan))))
    table = {
        "mt_shared": (k_frac, i_frac, DEFAULT_SHARED),
        "t_shared": (0, i_frac, DEFAULT_SHARED),
        "t_nonshared": (0, i_frac, ()),
        "nonshift": (0, 0, ()),
    }
    if name not in table:
        raise ConfigError(f"unknown ablation {name!r}; choose from {ABLATIONS}")
    k, i, shared = table[name]
    shift = ShiftConfig(k, i, sites if (k or i) else ())
    return NetworkConfig(stages=build_stages(in_ch, plan, shared), shift=shift, **kw)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    epochs: int = 10
    batch_size: int = 16
    seed: int = 0
    momentum: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
