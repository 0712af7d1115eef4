from __future__ import annotations

import numpy as np

from ..errors import NumericsError, ShapeMismatch
from .config import TrainConfig
from .network import ParamStore


class SGD:
    """Plain SGD with an optional heavy-ball buffer ``v <- m*v + g``."""

    def __init__(self, tc: TrainConfig):
        self.lr = tc.learning_rate
        self.momentum = tc.momentum
        self.velocity: dict[str, np.ndarray] = {}

    def step(self, params: ParamStore, grads: ParamStore) -> ParamStore:
        if params.signature() != grads.signature():
            raise ShapeMismatch("gradient blocks do not match parameter blocks")
        bad = [name for name, g in grads.items() if not np.isfinite(g).all()]
        if bad:
            raise NumericsError(f"non-finite gradient in {', '.join(bad)}; step aborted")
        out = {}
        for name, w in params.items():
            g = grads[name]
            if self.momentum > 0:
                v = self.velocity.get(name)
                v = g.copy() if v is None else self.momentum * v + g
                self.velocity[name] = v
                g = v
            out[name] = w - self.lr * g
        return ParamStore(out)


def sgd_step(params: ParamStore, grads: ParamStore, tc: TrainConfig, state: SGD | None = None) -> ParamStore:
    """One update; pass the same ``state`` across calls to carry momentum."""
    return (state or SGD(tc)).step(params, grads)
