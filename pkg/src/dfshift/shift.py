"""Modality and temporal channel shifts on clip tensors.

Modality shift swaps (N=2) or cyclically rotates (N>2) the last ``k``
channels of each frame between modalities.  Temporal shift fills channels
``[0, i)`` from the previous frame and ``[i, 2i)`` from the next one,
zero-filling at the clip edges.  Both are pure data movement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, InvalidInput, RangeError, ShapeMismatch
from .kernels import OpTrace
from .tensor import ClipTensor

__all__ = [
    "ShiftConfig",
    "modality_shift_pair",
    "modality_shift_group",
    "modality_shift_backward",
    "temporal_shift",
    "temporal_shift_backward",
    "dual_shift",
    "dual_shift_backward",
    "count_mult_ops",
]


def _as_fraction(v) -> Fraction:
    f = Fraction(str(v)) if isinstance(v, str) else Fraction(v)
    if not 0 <= f < 1:
        raise ConfigError(f"shift fraction must lie in [0, 1), got {f}")
    return f


def band_width(channels: int, fraction: Fraction) -> int:
    """``max(1, floor(C * fraction))``; a zero fraction disables the band."""
    if fraction == 0:
        return 0
    return max(1, int(channels * fraction))


@dataclass(frozen=True)
class ShiftConfig:
    k_fraction: Fraction = Fraction(1, 8)
    i_fraction: Fraction = Fraction(1, 8)
    sites: tuple[int, ...] = (1, 2, 3, 4)

    def __post_init__(self):
        object.__setattr__(self, "k_fraction", _as_fraction(self.k_fraction))
        object.__setattr__(self, "i_fraction", _as_fraction(self.i_fraction))
        object.__setattr__(self, "sites", tuple(sorted(set(int(s) for s in self.sites))))

    @classmethod
    def disabled(cls) -> "ShiftConfig":
        return cls(Fraction(0), Fraction(0), ())

    @property
    def modality_enabled(self) -> bool:
        return self.k_fraction > 0 and bool(self.sites)

    @property
    def temporal_enabled(self) -> bool:
        return self.i_fraction > 0 and bool(self.sites)

    def k_for(self, channels: int) -> int:
        return band_width(channels, self.k_fraction)

    def i_for(self, channels: int) -> int:
        return band_width(channels, self.i_fraction)

    def bands(self, channels: int) -> tuple[int, int]:
        """``(k, i)`` at a site with ``channels`` channels, checking disjointness."""
        k, i = self.k_for(channels), self.i_for(channels)
        if 2 * i + k > channels:
            raise ConfigError(
                f"temporal band [0,{2 * i}) overlaps modality band [{channels - k},{channels}) at C={channels}"
            )
        return k, i

    def validate(self, site_channels: dict[int, int]) -> None:
        """Check every site exists and its bands fit ``site_channels[site]``."""
        for s in self.sites:
            if s not in site_channels:
                raise ConfigError(f"shift site {s} is not a gap between stages {sorted(site_channels)}")
            self.bands(site_channels[s])

    @property
    def site_mask(self) -> int:
        return sum(1 << (s - 1) for s in self.sites)


def _check_group(xs: Sequence[ClipTensor], k: int) -> None:
    shape = xs[0].shape
    for x in xs[1:]:
        if x.shape != shape:
            raise ShapeMismatch(f"modality shapes differ: {x.shape} vs {shape}")
    if not 0 <= k <= shape[0]:
        raise RangeError(f"k={k} outside [0, C={shape[0]}]")


def _stack(xs: Sequence[ClipTensor]) -> np.ndarray:
    c, t, h, w = xs[0].shape
    return np.stack([x.array for x in xs]).reshape(len(xs), t, c, h * w)


def _unstack(a: np.ndarray, like: ClipTensor) -> list[ClipTensor]:
    return [ClipTensor(a[p].reshape(like.array.shape)) for p in range(a.shape[0])]


def modality_shift_group(xs: Sequence[ClipTensor], k: int) -> list[ClipTensor]:
    """Output ``p`` keeps its first ``C-k`` channels and takes the last ``k``
    channels of modality ``(p+1) mod N``, frame by frame."""
    if len(xs) < 2:
        raise InvalidInput(f"modality shift needs at least 2 modalities, got {len(xs)}")
    _check_group(xs, k)
    return _unstack(kernels.modality_rotate(_stack(xs), k, 1), xs[0])


def modality_shift_pair(xp: ClipTensor, xq: ClipTensor, k: int) -> tuple[ClipTensor, ClipTensor]:
    a, b = modality_shift_group([xp, xq], k)
    return a, b


def modality_shift_backward(gps: Sequence[ClipTensor], k: int) -> list[ClipTensor]:
    """Adjoint of :func:`modality_shift_group`: the inverse rotation."""
    if len(gps) < 2:
        raise InvalidInput(f"modality shift needs at least 2 modalities, got {len(gps)}")
    _check_group(gps, k)
    return _unstack(kernels.modality_rotate(_stack(gps), k, -1), gps[0])


def _temporal(x: ClipTensor, i: int, reverse: bool) -> ClipTensor:
    if i < 0 or 2 * i > x.channels:
        raise RangeError(f"temporal band 2i={2 * i} exceeds C={x.channels}")
    c, t, h, w = x.shape
    out = kernels.temporal_shift(x.array.reshape(1, t, c, h * w), i, reverse)
    return ClipTensor(out.reshape(t, c, h, w))


def temporal_shift(x: ClipTensor, i: int) -> ClipTensor:
    return _temporal(x, i, reverse=False)


def temporal_shift_backward(gout: ClipTensor, i: int) -> ClipTensor:
    return _temporal(gout, i, reverse=True)


def _dual(xs: Sequence[ClipTensor], cfg: ShiftConfig, site: int, reverse: bool) -> list[ClipTensor]:
    if site not in cfg.sites:
        raise ConfigError(f"site {site} not in configured sites {cfg.sites}")
    if not xs:
        raise InvalidInput("dual shift needs at least one modality")
    k, i = cfg.bands(xs[0].channels)
    if len(xs) == 1:
        k = 0
    _check_group(xs, k)
    c, t, h, w = xs[0].shape
    a = np.stack([x.array for x in xs]).reshape(len(xs), 1, t, c, h * w)
    out = kernels.dual_shift(a, k, i, reverse)
    return [ClipTensor(out[p, 0].reshape(t, c, h, w)) for p in range(len(xs))]


def dual_shift(xs: Sequence[ClipTensor], cfg: ShiftConfig, site: int) -> list[ClipTensor]:
    """Modality shift then temporal shift at ``site``.

    With a single modality only the temporal part applies.
    """
    return _dual(xs, cfg, site, reverse=False)


def dual_shift_backward(gs: Sequence[ClipTensor], cfg: ShiftConfig, site: int) -> list[ClipTensor]:
    return _dual(gs, cfg, site, reverse=True)


def count_mult_ops(op_trace: OpTrace) -> int:
    """Floating-point multiplications executed inside a :func:`kernels.trace_ops` block."""
    return op_trace.mults
