import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfshift.errors import EmptyEval, InvalidLabel
from dfshift.metrics import (
    ConfusionMatrix,
    EvalReport,
    balanced_accuracy,
    confusion_update,
    top1_accuracy,
)

# (counts, top1, balanced), each checked by hand
HAND_BUILT = [
    ([[5, 0], [0, 5]], 1.0, 1.0),
    ([[1, 1], [1, 1]], 0.5, 0.5),
    ([[10, 0], [5, 5]], 15 / 20, 0.75),
    ([[90, 0], [9, 1]], 91 / 100, (1.0 + 0.1) / 2),
    ([[3, 1, 0], [0, 2, 2], [1, 0, 0]], 5 / 9, (3 / 4 + 2 / 4 + 0) / 3),
    ([[2, 0, 0], [0, 0, 0], [0, 1, 1]], 3 / 4, (1.0 + 0.5) / 2),  # class 1 absent
    ([[0, 4], [4, 0]], 0.0, 0.0),
]


@pytest.mark.parametrize("counts,top1,bal", HAND_BUILT)
def test_hand_built_matrices(counts, top1, bal):
    cm = ConfusionMatrix.from_counts(counts)
    assert top1_accuracy(cm) == pytest.approx(top1, abs=1e-15)
    assert balanced_accuracy(cm) == pytest.approx(bal, abs=1e-15)


def test_update_examples():
    cm = ConfusionMatrix(3)
    confusion_update(cm, 0, 0)
    assert cm.counts[0, 0] == 1 and cm.total == 1
    confusion_update(cm, 0, 0)
    assert cm.counts[0, 0] == 2
    cm = ConfusionMatrix(2)
    cm.update(1, 0).update(0, 1)
    assert cm.tolist() == [[0, 1], [1, 0]]


@pytest.mark.parametrize("t,p", [(2, 0), (0, 2), (-1, 0)])
def test_update_out_of_range(t, p):
    with pytest.raises(InvalidLabel):
        ConfusionMatrix(2).update(t, p)


def test_empty_matrix():
    with pytest.raises(EmptyEval):
        top1_accuracy(ConfusionMatrix(3))
    with pytest.raises(EmptyEval):
        balanced_accuracy(ConfusionMatrix(3))


def test_merge_is_cellwise_sum():
    a = ConfusionMatrix.from_counts([[1, 2], [3, 4]])
    b = ConfusionMatrix.from_counts([[0, 1], [1, 0]])
    assert a.merge(b).tolist() == [[1, 3], [4, 4]]


def test_from_predictions():
    cm = ConfusionMatrix.from_predictions(3, [0, 1, 2, 2], [0, 2, 2, 1])
    assert cm.tolist() == [[1, 0, 0], [0, 0, 1], [0, 1, 1]]


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ConfusionMatrix.from_counts([[1, -1], [0, 0]])


matrices = st.integers(2, 5).flatmap(
    lambda k: st.lists(st.lists(st.integers(0, 20), min_size=k, max_size=k), min_size=k, max_size=k)
).filter(lambda m: sum(map(sum, m)) > 0)


@settings(max_examples=100, deadline=None)
@given(matrices, st.randoms())
def test_metric_properties(m, rnd):
    cm = ConfusionMatrix.from_counts(m)
    a, b = top1_accuracy(cm), balanced_accuracy(cm)
    assert 0 <= a <= 1 and 0 <= b <= 1
    off_diag = cm.counts.sum() - np.trace(cm.counts)
    assert (a == 1.0) == (off_diag == 0)
    # consistent relabelling
    perm = list(range(len(m)))
    rnd.shuffle(perm)
    p = ConfusionMatrix.from_counts(cm.counts[np.ix_(perm, perm)])
    assert top1_accuracy(p) == pytest.approx(a, abs=1e-12)
    assert balanced_accuracy(p) == pytest.approx(b, abs=1e-12)
    # duplicating one class's samples leaves per-class recall alone
    dup = cm.counts.copy()
    dup[0] *= 2
    assert balanced_accuracy(ConfusionMatrix.from_counts(dup)) == pytest.approx(b, abs=1e-12)


def test_duplication_asymmetry():
    cm = ConfusionMatrix.from_counts([[10, 0], [5, 5]])
    dup = ConfusionMatrix.from_counts([[20, 0], [5, 5]])
    assert balanced_accuracy(dup) == balanced_accuracy(cm)
    assert top1_accuracy(dup) != top1_accuracy(cm)


def test_balanced_set_metrics_agree():
    cm = ConfusionMatrix.from_counts([[7, 2, 1], [3, 4, 3], [0, 0, 10]])
    assert top1_accuracy(cm) == pytest.approx(balanced_accuracy(cm), abs=1e-15)


def test_eval_report_json_fields():
    cm = ConfusionMatrix.from_counts([[10, 0], [5, 5]])
    d = json.loads(EvalReport.from_confusion(cm, "m.bin", "d/manifest.json", 7).to_json())
    assert list(d) == ["top1", "balanced", "confusion", "num_samples", "model_path", "dataset_manifest", "seed"]
    assert d["balanced"] == 0.75 and d["num_samples"] == 20 and d["confusion"] == [[10, 0], [5, 5]]
