from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from forge.errors import DatasetInvalid


class EvalStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class ErrorClass(str, Enum):
    NONE = "none"
    STARTUP_TIMEOUT = "startup_timeout"
    RECORD_TIMEOUT = "record_timeout"
    PROTOCOL_VIOLATION = "protocol_violation"
    INCOMPLETE_PREDICTIONS = "incomplete_predictions"
    NONZERO_EXIT = "nonzero_exit"
    RESOURCE_LIMIT = "resource_limit"


class DatasetVisibility(str, Enum):
    PUBLIC_TRAIN = "public_train"
    HIDDEN_EVAL = "hidden_eval"
    PROPRIETARY = "proprietary"


@dataclass
class EvaluationRecord:
    eval_id: str
    bundle_id: str
    dataset_id: str
    status: EvalStatus = EvalStatus.QUEUED
    error_class: ErrorClass = ErrorClass.NONE
    metrics: dict[str, float] = field(default_factory=dict)
    wall_time_s: float = 0.0
    log_ref: str | None = None
    started_at: str | None = None
    finished_at: str | None = None
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "eval_id": self.eval_id,
            "bundle_id": self.bundle_id,
            "dataset_id": self.dataset_id,
            "status": self.status.value,
            "error_class": self.error_class.value,
            "metrics": self.metrics,
            "wall_time_s": self.wall_time_s,
            "log_ref": self.log_ref,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "created_at": self.created_at,
        }


@dataclass
class SandboxPolicy:
    startup_timeout_s: float = 60.0
    per_record_timeout_s: float = 10.0
    total_timeout_s: float = 600.0
    max_memory_bytes: int = 2 * 1024 * 1024 * 1024
    max_stderr_bytes: int = 1024 * 1024
    network_allowed: bool = False

    def __post_init__(self):
        if min(self.startup_timeout_s, self.per_record_timeout_s, self.total_timeout_s) <= 0:
            raise ValueError("all timeouts must be positive")
        if self.per_record_timeout_s > self.total_timeout_s:
            raise ValueError("per_record_timeout_s must not exceed total_timeout_s")


@dataclass
class DatasetRef:
    dataset_id: str
    inputs_path: str
    labels_path: str
    visibility: DatasetVisibility = DatasetVisibility.HIDDEN_EVAL
    record_count: int = 0

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "inputs_path": self.inputs_path,
            "labels_path": self.labels_path,
            "visibility": self.visibility.value,
            "record_count": self.record_count,
        }


@dataclass
class Dataset:
    """Loaded dataset: inputs in file order, labels joined by id."""

    dataset_id: str
    input_order: list[str]
    inputs: dict[str, Any]
    labels: dict[str, Any]


def _read_ndjson(path: Path, value_key: str) -> tuple[list[str], dict[str, Any]]:
    order: list[str] = []
    values: dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetInvalid(f"{path.name}:{lineno}: not valid JSON: {exc}")
            if (
                not isinstance(obj, dict)
                or set(obj) != {"id", value_key}
                or not isinstance(obj["id"], str)
                or not obj["id"]
            ):
                raise DatasetInvalid(
                    f'{path.name}:{lineno}: each line must be '
                    f'{{"id": string, "{value_key}": value}}'
                )
            rid = obj["id"]
            if rid in values:
                raise DatasetInvalid(f"{path.name}:{lineno}: duplicate id {rid!r}")
            order.append(rid)
            values[rid] = obj[value_key]
    if not values:
        raise DatasetInvalid(f"{path.name}: no records")
    return order, values


def load_dataset(ref: DatasetRef) -> Dataset:
    """Read and cross-validate the NDJSON input/label pair."""
    input_order, inputs = _read_ndjson(Path(ref.inputs_path), "input")
    _, labels = _read_ndjson(Path(ref.labels_path), "label")
    if set(inputs) != set(labels):
        raise DatasetInvalid(
            f"dataset {ref.dataset_id}: input and label id sets differ"
        )
    return Dataset(ref.dataset_id, input_order, inputs, labels)
