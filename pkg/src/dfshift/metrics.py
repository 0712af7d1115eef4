"""Top-1 and balanced accuracy over a confusion matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyEval, InvalidLabel


class ConfusionMatrix:
    """``counts[true, predicted]``."""

    def __init__(self, num_classes: int, counts=None):
        self.num_classes = num_classes
        if counts is None:
            self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        else:
            self.counts = np.array(counts, dtype=np.int64)
            if self.counts.shape != (num_classes, num_classes) or (self.counts < 0).any():
                raise ValueError("counts must be a non-negative K x K matrix")

    @classmethod
    def from_counts(cls, counts) -> "ConfusionMatrix":
        counts = np.asarray(counts)
        return cls(counts.shape[0], counts)

    @classmethod
    def from_predictions(cls, num_classes: int, y_true, y_pred) -> "ConfusionMatrix":
        cm = cls(num_classes)
        for t, p in zip(y_true, y_pred):
            cm.update(int(t), int(p))
        return cm

    def update(self, true_label: int, predicted_label: int) -> "ConfusionMatrix":
        k = self.num_classes
        if not (0 <= true_label < k and 0 <= predicted_label < k):
            raise InvalidLabel(f"labels ({true_label}, {predicted_label}) outside [0, {k})")
        self.counts[true_label, predicted_label] += 1
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ValueError("cannot merge confusion matrices of different size")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tolist(self) -> list[list[int]]:
        return self.counts.tolist()


def confusion_update(cm: ConfusionMatrix, true_label: int, predicted_label: int) -> ConfusionMatrix:
    return cm.update(true_label, predicted_label)


def top1_accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise EmptyEval("no evaluated samples")
    return float(np.trace(cm.counts)) / total


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean per-class recall over classes that have at least one true sample."""
    rows = cm.counts.sum(axis=1)
    present = rows > 0
    if not present.any():
        raise EmptyEval("no evaluated samples")
    recall = np.diag(cm.counts)[present] / rows[present]
    return float(recall.mean())


@dataclass
class EvalReport:
    top1: float
    balanced: float
    confusion: list[list[int]]
    num_samples: int
    model_path: str
    dataset_manifest: str
    seed: int

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix, model_path="", dataset_manifest="", seed=0) -> "EvalReport":
        return cls(top1_accuracy(cm), balanced_accuracy(cm), cm.tolist(), cm.total,
                   str(model_path), str(dataset_manifest), int(seed))

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=1, sort_keys=False)
