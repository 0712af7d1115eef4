from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..metrics import ConfusionMatrix
from .config import NetworkConfig, TrainConfig
from .network import ParamStore, backward_batch, cross_entropy_loss, forward_batch, init_params
from .optim import SGD

log = logging.getLogger(__name__)


@dataclass
class EpochLog:
    epoch: int
    loss: float
    train_top1: float

    def as_dict(self) -> dict:
        return {"epoch": self.epoch, "loss": self.loss, "train_top1": self.train_top1}


def predict_logits(cfg: NetworkConfig, params: ParamStore, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Logits for a stacked ``(N, S, T, C, H, W)`` set, in sample order."""
    out = [
        forward_batch(x[:, s : s + batch_size], cfg, params, keep_tape=False)[0]
        for s in range(0, x.shape[1], batch_size)
    ]
    return np.concatenate(out) if out else np.zeros((0, cfg.num_classes))


def evaluate(cfg: NetworkConfig, params: ParamStore, x: np.ndarray, y: np.ndarray) -> ConfusionMatrix:
    preds = predict_logits(cfg, params, x).argmax(axis=1)
    return ConfusionMatrix.from_predictions(cfg.num_classes, y, preds)


def train(
    cfg: NetworkConfig,
    tc: TrainConfig,
    x: np.ndarray,
    y: np.ndarray,
    params: ParamStore | None = None,
    on_epoch: Callable[[EpochLog], None] | None = None,
) -> tuple[ParamStore, list[EpochLog]]:
    """Minibatch SGD on batch-mean cross-entropy.

    Deterministic given ``tc.seed``: it seeds both the initial weights and
    the per-epoch shuffle (separate streams).  After each epoch the whole
    training set is re-scored with the updated weights.
    """
    y = np.asarray(y)
    params = params if params is not None else init_params(cfg, tc.seed)
    shuffle = np.random.default_rng([tc.seed, 1])
    opt = SGD(tc)
    history = []
    n = x.shape[1]
    for epoch in range(1, tc.epochs + 1):
        order = shuffle.permutation(n)
        total = 0.0
        for s in range(0, n, tc.batch_size):
            idx = np.sort(order[s : s + tc.batch_size])
            logits, tape = forward_batch(x[:, idx], cfg, params)
            total += cross_entropy_loss(logits, y[idx]) * len(idx)
            params = opt.step(params, backward_batch(tape, y[idx], cfg, params))
        preds = predict_logits(cfg, params, x).argmax(axis=1)
        rec = EpochLog(epoch, total / n, float(np.mean(preds == y)))
        log.debug("epoch %d loss %.4f top1 %.3f", rec.epoch, rec.loss, rec.train_top1)
        history.append(rec)
        if on_epoch:
            on_epoch(rec)
    return params, history
