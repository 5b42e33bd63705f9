from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Stage(str, Enum):
    HARVESTED = "harvested"
    VALIDATED = "validated"
    SERVING = "serving"
    ARCHIVED = "archived"


# promotion must pass through validated; archiving is allowed from anywhere
# except archived itself
LEGAL_TRANSITIONS: set[tuple[str, str]] = {
    (Stage.HARVESTED.value, Stage.VALIDATED.value),
    (Stage.VALIDATED.value, Stage.SERVING.value),
    (Stage.SERVING.value, Stage.ARCHIVED.value),
    (Stage.HARVESTED.value, Stage.ARCHIVED.value),
    (Stage.VALIDATED.value, Stage.ARCHIVED.value),
}


@dataclass
class ModelVersion:
    model_name: str
    version: int
    source_bundle_id: str
    binary_ref: str
    stage: Stage
    hyper_parameters: dict[str, str] = field(default_factory=dict)
    metrics: dict[str, dict[str, float]] = field(default_factory=dict)
    gate_report_ref: str | None = None
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "version": self.version,
            "source_bundle_id": self.source_bundle_id,
            "binary_ref": self.binary_ref,
            "stage": self.stage.value,
            "hyper_parameters": self.hyper_parameters,
            "metrics": self.metrics,
            "gate_report_ref": self.gate_report_ref,
            "created_at": self.created_at,
        }

    @classmethod
    def from_row(cls, row: dict) -> "ModelVersion":
        return cls(
            model_name=row["model_name"],
            version=row["version"],
            source_bundle_id=row["source_bundle_id"],
            binary_ref=row["binary_ref"],
            stage=Stage(row["stage"]),
            hyper_parameters=row["hyper_parameters"],
            metrics=row["metrics"],
            gate_report_ref=row["gate_report_ref"],
            created_at=row["created_at"],
        )


@dataclass
class StageTransition:
    model_name: str
    version: int
    from_stage: Stage
    to_stage: Stage
    actor: str
    at: str

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "version": self.version,
            "from_stage": self.from_stage.value,
            "to_stage": self.to_stage.value,
            "actor": self.actor,
            "at": self.at,
        }
