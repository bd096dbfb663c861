"""Dataset splitting and binary classification metrics.

Metrics with a zero denominator are reported as None rather than
silently coerced to zero, so degenerate confusion matrices stay
visible in downstream reports (JSON null).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train / validation / test id sets plus the seed used."""

    train_ids: frozenset[str]
    validation_ids: frozenset[str]
    test_ids: frozenset[str]
    seed: int

    def __len__(self) -> int:
        return len(self.train_ids) + len(self.validation_ids) + len(self.test_ids)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricSuite:
    """Five standard metrics; None marks an undefined (0/0) value."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    specificity: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "specificity": self.specificity,
            "f1": self.f1,
        }


def split_dataset(
    ids: Iterable[str],
    seed: int,
    test_fraction: float = 0.2,
    validation_fraction: float = 0.2,
    time_order: Mapping[str, object] | None = None,
) -> DatasetSplit:
    """Partition ids into train / validation / test sets.

    The test set takes ``test_fraction`` of all ids, then the
    validation set takes ``validation_fraction`` of the remainder; with
    the defaults that yields a 64/16/20 split. Set sizes use the floor,
    with every leftover id going to train. The shuffle is a seeded
    Fisher-Yates over the sorted ids, so the split depends only on the
    id set and the seed.

    When ``time_order`` maps each id to a sortable key, no shuffling
    happens: the latest ids become the test set and the ones just
    before them the validation set, which avoids look-ahead leakage.
    """
    if not 0 < test_fraction < 1 or not 0 <= validation_fraction < 1:
        raise ValueError("fractions must lie in (0, 1)")
    pool = sorted(set(ids))
    if len(pool) < 5:
        raise ValueError(f"need at least 5 ids to split, got {len(pool)}")
    if time_order is not None:
        pool.sort(key=lambda i: (time_order[i], i))
    else:
        random.Random(seed).shuffle(pool)
    n_test = int(len(pool) * test_fraction)
    n_val = int((len(pool) - n_test) * validation_fraction)
    # Ordered pool is consumed from the end: test takes the tail so the
    # time-ordered mode evaluates on the most recent data.
    test = pool[len(pool) - n_test :]
    validation = pool[len(pool) - n_test - n_val : len(pool) - n_test]
    train = pool[: len(pool) - n_test - n_val]
    return DatasetSplit(
        train_ids=frozenset(train),
        validation_ids=frozenset(validation),
        test_ids=frozenset(test),
        seed=seed,
    )


def classify_score(score: float, threshold: float = 0.5) -> int:
    """Predict 1 when ``score`` strictly exceeds ``threshold``."""
    return 1 if score > threshold else 0


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    """Count the four confusion cells for paired prediction/label lists."""
    if len(predictions) != len(labels):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels"
        )
    tp = fp = tn = fn = 0
    for pred, label in zip(predictions, labels):
        if pred not in (0, 1) or label not in (0, 1):
            raise ValueError(f"predictions and labels must be 0 or 1, got ({pred}, {label})")
        if pred == 1 and label == 1:
            tp += 1
        elif pred == 1 and label == 0:
            fp += 1
        elif pred == 0 and label == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metric_suite(cm: ConfusionMatrix) -> MetricSuite:
    """Accuracy, precision, recall, specificity, and F1 from counts.

    Each metric is None when its denominator is zero. F1 is the
    harmonic mean of precision and recall, so it is undefined whenever
    either of them is, and also when both are zero.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else None
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    specificity = cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricSuite(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        specificity=specificity,
        f1=f1,
    )


def evaluate_model(
    scores: Mapping[str, float],
    labels: Mapping[str, int],
    eval_ids: Iterable[str],
    threshold: float = 0.5,
) -> tuple[ConfusionMatrix, MetricSuite, int]:
    """Evaluate one model's scores against labels on ``eval_ids``.

    Only ids that have both a score and a label enter the confusion
    matrix; the returned int is that evaluated count.
    """
    usable = sorted(i for i in eval_ids if i in scores and i in labels)
    predictions = [classify_score(scores[i], threshold) for i in usable]
    actual = [labels[i] for i in usable]
    cm = confusion(predictions, actual)
    return cm, metric_suite(cm), len(usable)
