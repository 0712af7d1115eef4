"""Analytic gradients versus central finite differences on a micro network."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model.config import NetworkConfig, build_stages
from .model.network import ParamStore, backward_batch, cross_entropy_loss, forward_batch
from .shift import ShiftConfig


@dataclass
class BlockResult:
    name: str
    max_rel_err: float
    max_abs_err: float
    passed: bool


def micro_config(
    width: int = 3,
    shared=(2, 3),
    k_fraction=Fraction(1, 8),
    i_fraction=Fraction(1, 8),
    sites=(1, 2, 3, 4),
    modalities: int = 2,
    num_classes: int = 3,
) -> NetworkConfig:
    """N=2, C=1, T=3, 4x4 input; five stages of ``width`` channels.

    Width 3 is the smallest that holds both bands (2i + k = 3) at every site.
    """
    plan = ((width, 2), (width, 1), (width, 2), (width, 1), (width, 1))
    shift = ShiftConfig(k_fraction, i_fraction, sites if (k_fraction or i_fraction) else ())
    return NetworkConfig(
        modalities=modalities,
        num_classes=num_classes,
        stages=build_stages(1, plan, shared),
        shift=shift,
        frames=3,
        height=4,
        width=4,
    )


MICRO_CONFIGS = {
    "dual-shift+shared": lambda: micro_config(),
    "temporal-only+shared": lambda: micro_config(width=2, k_fraction=0),
    "modality-only+nonshared": lambda: micro_config(width=2, i_fraction=0, shared=()),
    "nonshift+nonshared": lambda: micro_config(width=2, k_fraction=0, i_fraction=0, shared=()),
}


def random_problem(cfg: NetworkConfig, seed: int, batch: int = 2):
    """Random parameters (biases included), inputs and labels."""
    rng = np.random.default_rng(seed)
    params = ParamStore({name: rng.normal(0.0, 0.6, size=shape) for name, shape in ParamStore.layout(cfg)})
    x = rng.normal(size=(cfg.modalities, batch, cfg.frames, cfg.in_channels, cfg.height, cfg.width))
    y = rng.integers(0, cfg.num_classes, size=batch)
    return params, x, y


def loss_at(cfg, params, x, y) -> float:
    logits, _ = forward_batch(x, cfg, params, keep_tape=False)
    return cross_entropy_loss(logits, y)


def numeric_grads(cfg, params: ParamStore, x, y, eps: float = 1e-5) -> ParamStore:
    out = {}
    for name, arr in params.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            fp = loss_at(cfg, params, x, y)
            flat[j] = orig - eps
            fm = loss_at(cfg, params, x, y)
            flat[j] = orig
            g.reshape(-1)[j] = (fp - fm) / (2 * eps)
        out[name] = g
    return ParamStore(out)


def compare(analytic: ParamStore, numeric: ParamStore, tol: float, floor: float = 1e-6) -> list[BlockResult]:
    """Per-element ``|a - n| / max(|a|, |n|, floor)``, worst element per block."""
    results = []
    for name, a in analytic.items():
        n = numeric[name]
        diff = np.abs(a - n)
        rel = diff / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = float(rel.max()) if rel.size else 0.0
        results.append(BlockResult(name, worst, float(diff.max()), worst <= tol))
    return results


def run_gradcheck(cfg: NetworkConfig, seed: int, eps: float = 1e-5, tol: float = 1e-4, batch: int = 2,
                  skip_shift_adjoint: bool = False) -> list[BlockResult]:
    params, x, y = random_problem(cfg, seed, batch)
    logits, tape = forward_batch(x, cfg, params)
    analytic = backward_batch(tape, y, cfg, params, skip_shift_adjoint=skip_shift_adjoint)
    numeric = numeric_grads(cfg, params.copy(), x, y, eps)
    return compare(analytic, numeric, tol)
