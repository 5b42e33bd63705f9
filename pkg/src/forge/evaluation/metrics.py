"""Competition metrics over joined prediction/label maps.

Values are arbitrary JSON values; equality is value equality. For macro F1,
classes are the distinct values present in the labels, and a class whose
precision and recall are both zero contributes an F1 of zero.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from forge.errors import IdSetMismatch, NonNumeric, UnknownMetric

SUPPORTED_METRICS = ("accuracy", "macro_f1", "rmse")


def _check_ids(predictions: Mapping[str, Any], labels: Mapping[str, Any]) -> None:
    if set(predictions) != set(labels):
        missing = sorted(set(labels) - set(predictions))[:5]
        extra = sorted(set(predictions) - set(labels))[:5]
        raise IdSetMismatch(f"id sets differ (missing={missing}, extra={extra})")
    if not labels:
        raise IdSetMismatch("empty id set")


def _class_key(value: Any) -> str:
    # hashable, deterministic identity for arbitrary JSON values
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _as_number(value: Any, record_id: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NonNumeric(f"value for id {record_id!r} is not numeric: {value!r}")
    return float(value)


def accuracy(predictions: Mapping[str, Any], labels: Mapping[str, Any]) -> float:
    hits = sum(1 for rid in labels if predictions[rid] == labels[rid])
    return hits / len(labels)


def macro_f1(predictions: Mapping[str, Any], labels: Mapping[str, Any]) -> float:
    classes = sorted({_class_key(v) for v in labels.values()})
    f1_total = 0.0
    for cls in classes:
        tp = fp = fn = 0
        for rid in labels:
            actual = _class_key(labels[rid]) == cls
            predicted = _class_key(predictions[rid]) == cls
            if predicted and actual:
                tp += 1
            elif predicted and not actual:
                fp += 1
            elif actual and not predicted:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        f1_total += f1
    return f1_total / len(classes)


def rmse(predictions: Mapping[str, Any], labels: Mapping[str, Any]) -> float:
    total = 0.0
    for rid in labels:
        diff = _as_number(predictions[rid], rid) - _as_number(labels[rid], rid)
        total += diff * diff
    return math.sqrt(total / len(labels))


_METRIC_FNS = {"accuracy": accuracy, "macro_f1": macro_f1, "rmse": rmse}


def score(
    predictions: Mapping[str, Any],
    labels: Mapping[str, Any],
    metric_id: str,
) -> float:
    if metric_id not in _METRIC_FNS:
        raise UnknownMetric(f"unsupported metric {metric_id!r}")
    _check_ids(predictions, labels)
    return _METRIC_FNS[metric_id](predictions, labels)
