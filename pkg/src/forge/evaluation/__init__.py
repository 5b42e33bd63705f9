"""Sandboxed evaluation of submission bundles against hidden datasets."""

from forge.evaluation.types import (
    Dataset,
    DatasetRef,
    ErrorClass,
    EvalStatus,
    EvaluationRecord,
    SandboxPolicy,
    load_dataset,
)
from forge.evaluation.metrics import SUPPORTED_METRICS, score
from forge.evaluation.runner import EvalOutcome, execute_bundle, default_sandbox_uid
from forge.evaluation.worker import EvalWorker

__all__ = [
    "Dataset",
    "DatasetRef",
    "ErrorClass",
    "EvalOutcome",
    "EvalStatus",
    "EvalWorker",
    "EvaluationRecord",
    "SUPPORTED_METRICS",
    "SandboxPolicy",
    "default_sandbox_uid",
    "execute_bundle",
    "load_dataset",
    "score",
]
