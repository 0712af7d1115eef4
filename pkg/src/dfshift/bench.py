"""Latency, bytes-moved and op-count benchmark for the shift kernels and
the network, run on every available kernel backend."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .model.config import NetworkConfig, ablation_config
from .model.network import forward_batch, init_params, mac_count, param_count


@dataclass
class KernelTiming:
    kernel: str
    backend: str
    mean_ms: float
    min_ms: float
    bytes_moved: int
    mult_ops: int


def time_call(fn, iters: int, warmup: int) -> tuple[float, float]:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return 1e3 * float(np.mean(samples)), 1e3 * float(np.min(samples))


def _measure(name, backend, fn, iters, warmup) -> KernelTiming:
    with kernels.trace_ops() as tr:
        fn()
    mean_ms, min_ms = time_call(fn, iters, warmup)
    return KernelTiming(name, backend, mean_ms, min_ms, tr.bytes_moved, tr.mults)


def network_accounting(in_shape) -> dict:
    """param/MAC counts for single-modality, dual-shared and dual-nonshared nets."""
    _, t, h, w = in_shape
    kw = dict(frames=t, height=h, width=w, in_channels=in_shape[0])
    cfgs = {
        "single": ablation_config("mt_shared", modalities=1, **kw),
        "dual_shared": ablation_config("mt_shared", **kw),
        "dual_nonshared": ablation_config("t_nonshared", **kw),
    }
    return {name: {"param_count": param_count(c), "mac_count": mac_count(c)} for name, c in cfgs.items()}


def run_bench(shape=(64, 8, 16, 16), iters: int = 50, warmup: int = 5, seed: int = 0,
              backends=None, network_shape=None) -> dict:
    """``shape`` is the (C, T, H, W) of one modality's feature clip at a shift site."""
    c, t, h, w = shape
    rng = np.random.default_rng(seed)
    feats = rng.normal(size=(2, 1, t, c, h * w))
    k = i = max(1, c // 8)
    backends = backends or kernels.available_backends()

    net_shape = network_shape or (1, t, h, w)
    cfg = ablation_config("mt_shared", in_channels=net_shape[0], frames=net_shape[1],
                          height=net_shape[2], width=net_shape[3])
    params = init_params(cfg, seed)
    clip = rng.normal(size=(2, 1) + (net_shape[1], net_shape[0], net_shape[2], net_shape[3]))

    timings = []
    for b in backends:
        cases = {
            "modality_shift": lambda: kernels.modality_rotate(feats.reshape(2, t, c, h * w), k, 1, backend=b),
            "temporal_shift": lambda: kernels.temporal_shift(feats[0], i, backend=b),
            "dual_shift": lambda: kernels.dual_shift(feats, k, i, backend=b),
            "im2col": lambda: kernels.im2col(feats[0, 0].reshape(t, c, h, w), 1, backend=b),
        }
        for name, fn in cases.items():
            timings.append(_measure(name, b, fn, iters, warmup))
        prev = kernels.BACKEND
        kernels.set_backend(b)
        try:
            timings.append(
                _measure("forward_full", b, lambda: forward_batch(clip, cfg, params, keep_tape=False), iters, warmup)
            )
        finally:
            kernels.set_backend(prev)
    return {
        "shape": list(shape),
        "network_input": list(net_shape),
        "iters": iters,
        "warmup": warmup,
        "band_k": k,
        "band_i": i,
        "protocol": "single process, batch 1, float64, wall-clock per call after warmup",
        "timings": [asdict(x) for x in timings],
        "networks": network_accounting(net_shape),
    }
