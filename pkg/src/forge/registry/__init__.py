"""Versioned model catalog with a content-addressed blob store."""

from forge.registry.blobstore import BlobStore
from forge.registry.model_types import (
    LEGAL_TRANSITIONS,
    ModelVersion,
    Stage,
    StageTransition,
)
from forge.registry.registry import ModelRegistry

__all__ = [
    "BlobStore",
    "LEGAL_TRANSITIONS",
    "ModelRegistry",
    "ModelVersion",
    "Stage",
    "StageTransition",
]
