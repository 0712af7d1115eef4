"""Binary model file: little-endian header, then f64 parameter blobs.

Layout::

    b"DFSM" u32 version=1 u32 N u32 num_classes u32 n_stages
    n_stages x (u32 in_ch, u32 out_ch, u32 stride, u32 shared)
    u32 k_num u32 k_den u32 i_num u32 i_den u32 site_bitmask
    per parameter block (ParamStore.layout order): u64 length, length x f64

Input frame count and resolution are not stored; the weights do not depend
on them.
"""

from __future__ import annotations

import os
import struct
from fractions import Fraction

import numpy as np

from ..errors import FormatError
from ..shift import ShiftConfig
from .config import NetworkConfig, StageSpec
from .network import ParamStore

MAGIC = b"DFSM"
VERSION = 1


def dump_model(params: ParamStore, cfg: NetworkConfig) -> bytes:
    if not params.matches(cfg):
        raise FormatError("parameters do not match the config being saved")
    sh = cfg.shift
    parts = [MAGIC, struct.pack("<4I", VERSION, cfg.modalities, cfg.num_classes, len(cfg.stages))]
    for st in cfg.stages:
        parts.append(struct.pack("<4I", st.in_channels, st.out_channels, st.stride, int(st.shared)))
    parts.append(
        struct.pack(
            "<5I",
            sh.k_fraction.numerator, sh.k_fraction.denominator,
            sh.i_fraction.numerator, sh.i_fraction.denominator,
            sh.site_mask,
        )
    )
    for _, arr in params.items():
        flat = np.ascontiguousarray(arr, dtype="<f8").reshape(-1)
        parts.append(struct.pack("<Q", flat.size))
        parts.append(flat.tobytes())
    return b"".join(parts)


def save_model(params: ParamStore, cfg: NetworkConfig, path) -> None:
    blob = dump_model(params, cfg)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"model file truncated at byte {self.pos} (wanted {n} more)")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def parse_model(buf: bytes) -> tuple[ParamStore, NetworkConfig]:
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic; not a DFSM model file")
    version, n_mod, n_cls, n_stages = r.unpack("<4I")
    if version != VERSION:
        raise FormatError(f"unsupported model version {version}")
    try:
        stages = []
        for _ in range(n_stages):
            cin, cout, stride, shared = r.unpack("<4I")
            stages.append(StageSpec(cin, cout, stride, bool(shared)))
        kn, kd, inum, iden, mask = r.unpack("<5I")
        sites = tuple(s + 1 for s in range(32) if mask >> s & 1)
        shift = ShiftConfig(Fraction(kn, kd), Fraction(inum, iden), sites)
        cfg = NetworkConfig(n_mod, n_cls, tuple(stages), shift)
    except FormatError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"invalid model header: {exc}") from exc
    arrays = {}
    for name, shape in ParamStore.layout(cfg):
        (n,) = r.unpack("<Q")
        if n != int(np.prod(shape)):
            raise FormatError(f"block {name}: declared length {n} != expected {int(np.prod(shape))}")
        arrays[name] = np.frombuffer(r.take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)
    if r.pos != len(buf):
        raise FormatError(f"{len(buf) - r.pos} trailing bytes after last parameter block")
    return ParamStore(arrays), cfg


def load_model(path) -> tuple[ParamStore, NetworkConfig]:
    with open(path, "rb") as fh:
        return parse_model(fh.read())
