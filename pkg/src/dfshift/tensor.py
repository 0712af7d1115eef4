"""Dense clip tensors and the channel slice/concat primitives.

A clip is stored frame-major: element ``(t, c, h, w)`` lives at flat index
``t*C*H*W + c*H*W + h*W + w``.  One frame is therefore a contiguous slab,
which is what makes the shift kernels plain block copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDims, RangeError, ShapeMismatch

__all__ = [
    "ClipTensor",
    "ChannelRange",
    "make_clip",
    "slice_channels",
    "concat_channels",
]


@dataclass(frozen=True, eq=False)
class ClipTensor:
    """A ``C x T x H x W`` feature volume backed by a float64 array.

    ``array`` has shape ``(T, C, H, W)`` and is C-contiguous, so
    ``array.ravel()`` is the canonical flat layout.
    """

    array: np.ndarray

    def __post_init__(self):
        a = self.array
        if a.ndim != 4:
            raise InvalidDims(f"clip array must be 4-D (T, C, H, W), got shape {a.shape}")
        # C == 0 is tolerated so an empty slice can feed concat_channels.
        if min(a.shape[0], a.shape[2], a.shape[3]) < 1 or a.shape[1] < 0:
            raise InvalidDims(f"clip dims T, H, W must be >= 1, got {a.shape}")
        if a.dtype != np.float64 or not a.flags.c_contiguous:
            object.__setattr__(self, "array", np.ascontiguousarray(a, dtype=np.float64))

    @classmethod
    def from_flat(cls, data, channels: int, frames: int, height: int, width: int) -> "ClipTensor":
        data = np.asarray(data, dtype=np.float64)
        if min(channels, frames, height, width) < 1:
            raise InvalidDims("all clip dims must be >= 1")
        if data.size != channels * frames * height * width:
            raise InvalidDims(
                f"flat length {data.size} != C*T*H*W = {channels * frames * height * width}"
            )
        return cls(data.reshape(frames, channels, height, width).copy())

    @property
    def channels(self) -> int:
        return self.array.shape[1]

    @property
    def frames(self) -> int:
        return self.array.shape[0]

    @property
    def height(self) -> int:
        return self.array.shape[2]

    @property
    def width(self) -> int:
        return self.array.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        """Dims in ``(C, T, H, W)`` order."""
        return (self.channels, self.frames, self.height, self.width)

    @property
    def data(self) -> np.ndarray:
        """Flat read-only view in canonical layout."""
        v = self.array.reshape(-1)
        v.flags.writeable = False
        return v

    def frame(self, t: int) -> np.ndarray:
        return self.array[t]

    def at(self, t: int, c: int, h: int, w: int) -> float:
        return float(self.array[t, c, h, w])

    def reversed_frames(self) -> "ClipTensor":
        return ClipTensor(self.array[::-1].copy())

    def equals(self, other: "ClipTensor") -> bool:
        """Bit-exact equality (same shape, same values)."""
        return self.array.shape == other.array.shape and np.array_equal(self.array, other.array)

    def __repr__(self) -> str:
        c, t, h, w = self.shape
        return f"ClipTensor(C={c}, T={t}, H={h}, W={w})"


@dataclass(frozen=True)
class ChannelRange:
    start: int
    end: int

    def check(self, channels: int) -> None:
        if not (0 <= self.start <= self.end <= channels):
            raise RangeError(f"channel range [{self.start}, {self.end}) invalid for C={channels}")

    def __len__(self) -> int:
        return self.end - self.start


def make_clip(c: int, t: int, h: int, w: int, fill: float = 0.0) -> ClipTensor:
    if min(c, t, h, w) < 1:
        raise InvalidDims(f"all clip dims must be >= 1, got C={c} T={t} H={h} W={w}")
    return ClipTensor(np.full((t, c, h, w), float(fill)))


def slice_channels(x: ClipTensor, r: ChannelRange) -> ClipTensor:
    """Copy channels ``[r.start, r.end)`` of every frame.

    An empty range gives a zero-channel clip, which only makes sense as a
    concat operand.
    """
    r.check(x.channels)
    return ClipTensor(x.array[:, r.start : r.end].copy())


def concat_channels(parts: Sequence[ClipTensor]) -> ClipTensor:
    if not parts:
        raise ShapeMismatch("concat_channels needs at least one part")
    t, _, h, w = parts[0].array.shape
    for p in parts[1:]:
        if (p.frames, p.height, p.width) != (t, h, w):
            raise ShapeMismatch(
                f"cannot concat T,H,W={p.frames, p.height, p.width} onto {t, h, w}"
            )
    return ClipTensor(np.concatenate([p.array for p in parts], axis=1))
