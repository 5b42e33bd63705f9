"""Model registry: harvest submissions into versioned, staged entries.

A model's identity defaults to ``<competition_id>/<team_id>`` so versions
accumulate per team over time. Versions are dense (1..N, no gaps) even under
concurrent harvests; harvesting the same bundle twice returns the existing
version. Promotion to serving demands an attached passing gate report.
"""

from __future__ import annotations

import json
import math

from forge.errors import (
    GateNotPassed,
    IllegalTransition,
    NonFiniteMetric,
    NoSucceededEvaluation,
    UnknownBundle,
    UnknownVersion,
)
from forge.gate.engine import GateReport
from forge.registry.blobstore import BlobStore
from forge.registry.model_types import (
    LEGAL_TRANSITIONS,
    ModelVersion,
    Stage,
    StageTransition,
)
from forge.store import MetadataStore


class ModelRegistry:
    def __init__(self, store: MetadataStore, blob_store: BlobStore):
        self.store = store
        self.blobs = blob_store

    def harvest(self, bundle_id: str) -> ModelVersion:
        """Pull an evaluated submission into the catalog.

        Requires at least one succeeded evaluation on the competition's
        hidden dataset; its metrics seed the version's metrics map.
        """
        bundle = self.store.get_bundle(bundle_id)
        if bundle is None:
            raise UnknownBundle(bundle_id)
        spec = self.store.get_competition(bundle["competition_id"])
        hidden = spec["hidden_dataset"] if spec else None
        succeeded = self.store.list_evaluations(
            bundle_id=bundle_id, dataset_id=hidden, status="succeeded"
        )
        if not succeeded:
            raise NoSucceededEvaluation(
                f"bundle {bundle_id} has no succeeded evaluation on the "
                f"hidden dataset"
            )
        if not self.blobs.exists(bundle["blob_digest"]):
            raise UnknownBundle(f"bundle blob {bundle['blob_digest']} missing")

        model_name = f"{bundle['competition_id']}/{bundle['team_id']}"
        row = self.store.insert_model_version(
            model_name=model_name,
            source_bundle_id=bundle_id,
            hyper_parameters=bundle["manifest"].get("hyper_parameters", {}),
            metrics={hidden: succeeded[0]["metrics"]},
            binary_ref=bundle["blob_digest"],
            stage=Stage.HARVESTED.value,
        )
        return ModelVersion.from_row(row)

    def get(self, model_name: str, version: int) -> ModelVersion:
        row = self.store.get_model(model_name, version)
        if row is None:
            raise UnknownVersion(f"{model_name} v{version}")
        return ModelVersion.from_row(row)

    def list_models(
        self, stage: Stage | str | None = None, prefix: str | None = None
    ) -> list[ModelVersion]:
        stage_value = stage.value if isinstance(stage, Stage) else stage
        return [
            ModelVersion.from_row(r)
            for r in self.store.list_models(stage=stage_value, prefix=prefix)
        ]

    def attach_gate_report(
        self, model_name: str, version: int, report: GateReport
    ) -> str:
        """Persist the report in the blob store, reference it on the version."""
        digest = self.blobs.put(report.to_json().encode("utf-8"))
        self.store.set_gate_report_ref(model_name, version, digest.hex)
        return digest.hex

    def load_gate_report(self, model_name: str, version: int) -> GateReport | None:
        model = self.get(model_name, version)
        if not model.gate_report_ref:
            return None
        return GateReport.from_dict(
            json.loads(self.blobs.get(model.gate_report_ref))
        )

    def transition_stage(
        self, model_name: str, version: int, to_stage: Stage | str, actor: str
    ) -> StageTransition:
        to_value = to_stage.value if isinstance(to_stage, Stage) else to_stage
        if to_value not in {s.value for s in Stage}:
            raise IllegalTransition("?", to_value)
        model = self.get(model_name, version)
        if (model.stage.value, to_value) not in LEGAL_TRANSITIONS:
            raise IllegalTransition(model.stage.value, to_value)
        if to_value == Stage.SERVING.value:
            report = self.load_gate_report(model_name, version)
            if report is None or report.verdict != "pass":
                raise GateNotPassed(
                    "serving requires a passing gate report on the version"
                )
        row = self.store.apply_stage_transition(
            model_name,
            version,
            to_value,
            actor,
            LEGAL_TRANSITIONS,
            Stage.SERVING.value,
        )
        return StageTransition(
            model_name=row["model_name"],
            version=row["version"],
            from_stage=Stage(row["from_stage"]),
            to_stage=Stage(row["to_stage"]),
            actor=row["actor"],
            at=row["at"],
        )

    def log_metrics(
        self, model_name: str, version: int, dataset_id: str, metrics: dict
    ) -> ModelVersion:
        """Merge metrics under the dataset key; history goes to the audit trail."""
        for key, value in metrics.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise NonFiniteMetric(f"metric {key!r} has non-finite value {value!r}")
        row = self.store.append_model_metrics(
            model_name, version, dataset_id, metrics
        )
        return ModelVersion.from_row(row)

    def metrics_history(
        self, model_name: str, version: int, dataset_id: str | None = None
    ) -> list[dict]:
        self.get(model_name, version)
        return self.store.metric_audit_trail(model_name, version, dataset_id)

    def blob_put(self, data: bytes):
        return self.blobs.put(data)

    def blob_get(self, digest):
        return self.blobs.get(digest)

    def export_ndjson(self) -> str:
        lines = [
            json.dumps(m.to_dict(), sort_keys=True) for m in self.list_models()
        ]
        return "\n".join(lines) + ("\n" if lines else "")
