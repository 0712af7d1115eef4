"""Synthetic two-modality "moving dot + flash" clips.

Modality A shows one bright pixel crossing the frame horizontally at one
pixel per frame, leftward or rightward.  Modality B is empty except, in the
sync modes, a 2x2 flash in the top-left corner: either at frame ``tau``,
when the dot sits on the centre column (``same``), or one frame later
(``next``).

The classes are built so that each cue needs one mechanism:

* direction: L and R clips are exact frame reversals of each other (noise
  included), so any frame-order-blind model is at chance.
* sync: both modalities' frame multisets are identical between the
  ``same``/``next`` variants; only relating B's flash to A's dot in the
  same frame separates them.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, GenError, ShapeMismatch
from .tensor import ClipTensor

CLASSES = {
    "direction": ["left", "right"],
    "sync": ["same", "next"],
    "full": ["left-same", "left-next", "right-same", "right-next"],
}
CLIP_MAGIC = b"DFSB"
CLIP_VERSION = 1
MANIFEST_VERSION = 1
_HEADER = struct.Struct("<4s7I")
FLASH_SIZE = 2


@dataclass
class MultiModalSample:
    clips: list[ClipTensor]
    label: int

    def __post_init__(self):
        if not self.clips:
            raise ShapeMismatch("a sample needs at least one modality")
        shape = self.clips[0].shape
        if any(c.shape != shape for c in self.clips):
            raise ShapeMismatch("all modality clips of a sample must share C, T, H, W")

    def reversed_frames(self) -> "MultiModalSample":
        return MultiModalSample([c.reversed_frames() for c in self.clips], self.label)

    def equals(self, other: "MultiModalSample") -> bool:
        return (
            self.label == other.label
            and len(self.clips) == len(other.clips)
            and all(a.equals(b) for a, b in zip(self.clips, other.clips))
        )


@dataclass(frozen=True)
class GenConfig:
    mode: str = "full"
    samples_per_class: int = 50
    seed: int = 0
    frames: int = 8
    hw: int = 16
    dot_intensity: float = 1.0
    flash_intensity: float = 1.0
    background: float = 0.0
    noise_std: float = 0.05
    modalities: int = 2

    def __post_init__(self):
        if self.mode not in CLASSES:
            raise GenError(f"mode must be one of {sorted(CLASSES)}, got {self.mode!r}")
        if self.frames < 4:
            raise GenError("need T >= 4 frames")
        if self.hw < 8:
            raise GenError("need H = W >= 8")
        if self.frames > self.hw:
            raise GenError(f"a {self.frames}-frame trajectory does not fit in width {self.hw}")
        if self.samples_per_class < 0 or self.noise_std < 0 or self.modalities < 2:
            raise GenError("samples_per_class and noise_std must be >= 0, modalities >= 2")

    @property
    def classes(self) -> list[str]:
        return CLASSES[self.mode]

    @property
    def center(self) -> int:
        return self.hw // 2


def label_of(mode: str, direction: str, sync: str | None) -> int:
    if mode == "direction":
        return CLASSES[mode].index({"L": "left", "R": "right"}[direction])
    if mode == "sync":
        return CLASSES[mode].index(sync)
    name = {"L": "left", "R": "right"}[direction] + "-" + sync
    return CLASSES[mode].index(name)


def _f32(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float32).astype(np.float64)


def _trajectory(direction: str, start_col: int, gc: GenConfig) -> np.ndarray:
    steps = np.arange(gc.frames)
    if direction == "L":
        return start_col - steps
    if direction == "R":
        return start_col + steps
    raise GenError(f"direction must be 'L' or 'R', got {direction!r}")


def _compose(direction, sync, row, start_col, noise, gc: GenConfig) -> MultiModalSample:
    t, hw = gc.frames, gc.hw
    cols = _trajectory(direction, start_col, gc)
    if not (0 <= row < hw) or cols.min() < 0 or cols.max() >= hw:
        raise GenError(f"trajectory row={row} cols {cols.min()}..{cols.max()} leaves the {hw}x{hw} frame")
    a = gc.background + noise[0]
    a[np.arange(t), 0, row, cols] += gc.dot_intensity
    clips = [a]
    if sync is not None:
        hits = np.flatnonzero(cols == gc.center)
        if hits.size == 0:
            raise GenError("dot never crosses the centre column, flash frame undefined")
        tau = int(hits[0])
        flash = tau + (1 if sync == "next" else 0)
        if sync not in ("same", "next") or flash >= t:
            raise GenError(f"flash frame {flash} for sync={sync!r} outside the clip")
    for m in range(1, gc.modalities):
        b = gc.background + noise[m]
        if m == 1 and sync is not None:
            b[flash, 0, :FLASH_SIZE, :FLASH_SIZE] += gc.flash_intensity
        clips.append(b)
    return MultiModalSample([ClipTensor(_f32(c)) for c in clips], label_of(gc.mode, direction, sync))


def _draw_noise(rng: np.random.Generator, gc: GenConfig) -> np.ndarray:
    shape = (gc.modalities, gc.frames, 1, gc.hw, gc.hw)
    if gc.noise_std == 0:
        return np.zeros(shape)
    return _f32(rng.normal(0.0, gc.noise_std, size=shape))


def render_clip(direction: str, sync: str | None, row: int, start_col: int, rng: np.random.Generator,
                gc: GenConfig | None = None) -> MultiModalSample:
    """One sample: dot trajectory in modality A, optional flash in B, noise everywhere."""
    gc = gc or GenConfig(mode="direction" if sync is None else "full")
    return _compose(direction, sync, row, start_col, _draw_noise(rng, gc), gc)


def _group_rng(gc: GenConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([gc.seed, index])


def generate_group(gc: GenConfig, index: int) -> list[MultiModalSample]:
    """One sample per class, all built from one draw of row, crossing frame and noise.

    Right-moving variants reuse the left-moving noise reversed in time, so
    (L, same) and (R, same) are exact frame reversals of each other.
    """
    rng = _group_rng(gc, index)
    t, c = gc.frames, gc.center
    lo_row, hi_row = gc.hw // 4, gc.hw - 1 - gc.hw // 8
    row = int(rng.integers(lo_row, hi_row + 1))
    tau = int(rng.integers(1, t - 1))  # crossing frame in [1, T-2], symmetric under reversal
    flip = int(rng.integers(2))
    noise = _draw_noise(rng, gc)
    rnoise = noise[:, ::-1].copy()
    left = lambda s: _compose("L", s, row, c + tau, noise, gc)  # noqa: E731
    right = lambda s: _compose("R", s, row, c - (t - 1 - tau), rnoise, gc)  # noqa: E731
    if gc.mode == "direction":
        return [left(None), right(None)]
    if gc.mode == "sync":
        make = right if flip else left
        return [make("same"), make("next")]
    return [left("same"), left("next"), right("same"), right("next")]


def generate_samples(gc: GenConfig) -> list[MultiModalSample]:
    """All samples, ordered by class then index."""
    groups = [generate_group(gc, g) for g in range(gc.samples_per_class)]
    return [groups[g][k] for k in range(len(gc.classes)) for g in range(gc.samples_per_class)]


def temporal_stride_sample(raw: ClipTensor, stride: int) -> ClipTensor:
    """Keep frames ``0, stride, 2*stride, ...``."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return ClipTensor(raw.array[::stride].copy())


def encode_clip_file(sample: MultiModalSample) -> bytes:
    c, t, h, w = sample.clips[0].shape
    parts = [_HEADER.pack(CLIP_MAGIC, CLIP_VERSION, len(sample.clips), c, t, h, w, int(sample.label))]
    for clip in sample.clips:
        f32 = clip.array.astype("<f4")
        if not np.array_equal(f32.astype(np.float64), clip.array):
            raise FormatError("clip values are not exactly representable in float32")
        parts.append(f32.tobytes())
    return b"".join(parts)


def decode_clip_file(buf: bytes) -> MultiModalSample:
    if len(buf) < _HEADER.size:
        raise FormatError(f"clip file shorter than its {_HEADER.size}-byte header")
    magic, version, n, c, t, h, w, label = _HEADER.unpack_from(buf)
    if magic != CLIP_MAGIC:
        raise FormatError("bad magic; not a DFSB clip file")
    if version != CLIP_VERSION:
        raise FormatError(f"unsupported clip version {version}")
    if min(n, c, t, h, w) < 1:
        raise FormatError(f"invalid dims N={n} C={c} T={t} H={h} W={w}")
    per = c * t * h * w
    if len(buf) - _HEADER.size != 4 * n * per:
        raise FormatError(f"payload is {len(buf) - _HEADER.size} bytes, header declares {4 * n * per}")
    data = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    clips = [ClipTensor(data[p * per : (p + 1) * per].reshape(t, c, h, w).copy()) for p in range(n)]
    return MultiModalSample(clips, label)


def write_clip_file(sample: MultiModalSample, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_clip_file(sample))


def read_clip_file(path) -> MultiModalSample:
    with open(path, "rb") as fh:
        return decode_clip_file(fh.read())


@dataclass
class DatasetManifest:
    mode: str
    classes: list[str]
    seed: int
    files: list[dict] = field(default_factory=list)
    version: int = MANIFEST_VERSION

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({k: d[k] for k in ("version", "mode", "seed", "classes", "files")}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        try:
            d = json.loads(text)
            m = cls(d["mode"], list(d["classes"]), int(d["seed"]), list(d["files"]), int(d["version"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad manifest: {exc}") from exc
        if m.version != MANIFEST_VERSION:
            raise FormatError(f"unsupported manifest version {m.version}")
        if any(not 0 <= f["label"] < len(m.classes) for f in m.files):
            raise FormatError("manifest label out of range")
        return m


MANIFEST_NAME = "manifest.json"


def generate_dataset(gc: GenConfig, out_dir) -> DatasetManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = gc.classes
    counters = [0] * len(names)
    files = []
    for s in generate_samples(gc):
        rel = f"{names[s.label]}_{counters[s.label]:05d}.dfsb"
        counters[s.label] += 1
        write_clip_file(s, out / rel)
        files.append({"path": rel, "label": s.label})
    manifest = DatasetManifest(gc.mode, list(names), gc.seed, files)
    (out / MANIFEST_NAME).write_text(manifest.to_json() + "\n")
    return manifest


def load_dataset(data_dir) -> tuple[DatasetManifest, list[MultiModalSample]]:
    root = Path(data_dir)
    path = root / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {root}")
    manifest = DatasetManifest.from_json(path.read_text())
    samples = []
    for f in manifest.files:
        s = read_clip_file(root / f["path"])
        if s.label != f["label"]:
            raise FormatError(f"{f['path']}: file label {s.label} != manifest label {f['label']}")
        samples.append(s)
    return manifest, samples
