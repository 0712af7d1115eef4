"""Kernel dispatch with multiplication/byte accounting.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy twins in ``_pykernels`` run.  ``DFS_KERNELS=python`` forces the
fallback.  Every public kernel reports to the active :func:`trace_ops`
contexts how many floating-point multiplications it executed and how many
bytes it read plus wrote.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _pykernels

_BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels  # type: ignore[attr-defined]

    _BACKENDS["cython"] = _ckernels
except ImportError:  # pragma: no cover - depends on the build
    pass

BACKEND = os.environ.get("DFS_KERNELS", "cython" if "cython" in _BACKENDS else "python")
if BACKEND not in _BACKENDS:
    BACKEND = "python"

_ITEM = 8  # bytes per float64


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    BACKEND = name


def _impl(backend):
    return _BACKENDS[backend or BACKEND]


@dataclass
class OpEvent:
    kernel: str
    mults: int
    bytes_moved: int


@dataclass
class OpTrace:
    events: list[OpEvent] = field(default_factory=list)

    @property
    def mults(self) -> int:
        return sum(e.mults for e in self.events)

    @property
    def bytes_moved(self) -> int:
        return sum(e.bytes_moved for e in self.events)

    def by_kernel(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.events:
            out[e.kernel] = out.get(e.kernel, 0) + e.mults
        return out


_active: contextvars.ContextVar[tuple[OpTrace, ...]] = contextvars.ContextVar("dfs_traces", default=())


@contextlib.contextmanager
def trace_ops() -> Iterator[OpTrace]:
    """Record every kernel call made inside the block."""
    tr = OpTrace()
    token = _active.set(_active.get() + (tr,))
    try:
        yield tr
    finally:
        _active.reset(token)


def _record(kernel: str, mults: int, nbytes: int) -> None:
    traces = _active.get()
    if traces:
        ev = OpEvent(kernel, int(mults), int(nbytes))
        for tr in traces:
            tr.events.append(ev)


def _shift_bytes(shape, moved_elems) -> int:
    # every output element is written; only non-zero-filled ones are read
    return (int(np.prod(shape)) + moved_elems) * _ITEM


def temporal_shift(x: np.ndarray, i: int, reverse: bool = False, backend=None) -> np.ndarray:
    """(G, T, C, P) band shift along frames; see ``_pykernels.temporal_shift``."""
    g, t, c, p = x.shape
    out = _impl(backend).temporal_shift(x, i, reverse)
    _record("temporal_shift", 0, _shift_bytes(x.shape, x.size - 2 * g * i * p))
    return out


def modality_rotate(x: np.ndarray, k: int, step: int = 1, backend=None) -> np.ndarray:
    out = _impl(backend).modality_rotate(x, k, step)
    _record("modality_shift", 0, _shift_bytes(x.shape, x.size))
    return out


def dual_shift(x: np.ndarray, k: int, i: int, reverse: bool = False, backend=None) -> np.ndarray:
    n, g, t, c, p = x.shape
    out = _impl(backend).dual_shift(x, k, i, reverse)
    _record("dual_shift", 0, _shift_bytes(x.shape, x.size - 2 * n * g * i * p))
    return out


def im2col(x: np.ndarray, stride: int, backend=None) -> np.ndarray:
    cols = _impl(backend).im2col(x, stride)
    _record("im2col", 0, (x.size + cols.size) * _ITEM)
    return cols


def col2im(cols: np.ndarray, c: int, h: int, w: int, stride: int, backend=None) -> np.ndarray:
    out = _impl(backend).col2im(cols, c, h, w, stride)
    _record("col2im", 0, (cols.size + out.size) * _ITEM)
    return out


def matmul(a: np.ndarray, b: np.ndarray, kernel: str = "matmul") -> np.ndarray:
    """``a @ b`` with broadcasting; counts one multiplication per inner-product term."""
    out = np.matmul(a, b)
    inner = a.shape[-1]
    _record(kernel, out.size * inner, (a.size + b.size + out.size) * _ITEM)
    return out

