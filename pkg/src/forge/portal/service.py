"""PortalService: one facade over every module, shared by HTTP and CLI.

Cross-module composition lives here so the core modules stay independent:
role checks, the submit pipeline (phase -> bundle validation -> atomic
quota/enqueue), the promote flow that runs the gate scan, and metric
write-back after re-evaluations.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

from forge.bundle.archive import BundleLimits, validate_bundle
from forge.clock import Clock, utc_now
from forge.errors import (
    Forbidden,
    PhaseClosed,
    SpecInvalid,
    UnknownBundle,
    UnknownCompetition,
    UnknownDataset,
    UnknownService,
    UnknownSubmission,
)
from forge.evaluation.types import (
    DatasetRef,
    DatasetVisibility,
    EvalStatus,
    EvaluationRecord,
    ErrorClass,
    SandboxPolicy,
    load_dataset,
)
from forge.evaluation.runner import default_sandbox_uid
from forge.evaluation.worker import EvalWorker
from forge.gate.engine import scan_bundle
from forge.gate.rules import GateRule, default_ruleset
from forge.leaderboard import (
    CompetitionSpec,
    compute_leaderboard,
    phase_at,
    submissions_remaining,
)
from forge.portal.auth import Principal, Role, require_role
from forge.portal.starter import build_starter_bundle
from forge.registry.blobstore import BlobStore
from forge.registry.model_types import ModelVersion, Stage
from forge.registry.registry import ModelRegistry
from forge.serving.host import ServiceHost
from forge.store import MetadataStore

LOG_TAIL_BYTES = 4096

_MUTATOR_ROLES = (Role.ORGANIZER, Role.PRODUCT_TEAM)


@dataclass
class PortalConfig:
    data_dir: str | Path
    policy: SandboxPolicy = field(default_factory=SandboxPolicy)
    limits: BundleLimits = field(default_factory=BundleLimits)
    workers: int = 2
    scratch_root: str | None = None
    sandbox_uid: int | None | str = "auto"
    max_services: int = 64
    probe_interval_s: float | None = 30.0
    gate_rules: list[GateRule] | None = None


class PortalService:
    def __init__(self, config: PortalConfig, *, clock: Clock = utc_now):
        self.config = config
        self.clock = clock
        data_dir = Path(config.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        data_dir.chmod(0o700)  # sandboxed model processes must not read it
        self.store = MetadataStore(data_dir / "forge.sqlite3", clock=clock)
        self.blobs = BlobStore(data_dir)
        self.registry = ModelRegistry(self.store, self.blobs)
        self.sandbox_uid = (
            default_sandbox_uid()
            if config.sandbox_uid == "auto"
            else config.sandbox_uid
        )
        self.host = ServiceHost(
            self.registry,
            policy=config.policy,
            scratch_root=config.scratch_root,
            sandbox_uid=self.sandbox_uid,
            max_services=config.max_services,
            clock=clock,
            probe_interval_s=config.probe_interval_s,
        )
        self.gate_rules = (
            config.gate_rules if config.gate_rules is not None else default_ruleset()
        )
        self._stop = threading.Event()
        self._worker_threads: list[threading.Thread] = []

    # -- worker lifecycle -------------------------------------------------------

    def make_worker(self) -> EvalWorker:
        return EvalWorker(
            self.store,
            self.blobs,
            policy=self.config.policy,
            scratch_root=self.config.scratch_root,
            sandbox_uid=self.sandbox_uid,
            clock=self.clock,
            on_finished=self._on_eval_finished,
        )

    def start_workers(self) -> None:
        for _ in range(self.config.workers):
            worker = self.make_worker()
            thread = threading.Thread(
                target=worker.run_forever, args=(self._stop,), daemon=True
            )
            thread.start()
            self._worker_threads.append(thread)

    def shutdown(self) -> None:
        self._stop.set()
        for thread in self._worker_threads:
            thread.join(timeout=5)
        self.host.shutdown()

    def _on_eval_finished(self, record: dict) -> None:
        if record["status"] != EvalStatus.SUCCEEDED.value:
            return
        target = self.store.reevaluation_target(record["eval_id"])
        if target:
            model_name, version = target
            self.registry.log_metrics(
                model_name, version, record["dataset_id"], record["metrics"]
            )

    # -- competitions -------------------------------------------------------------

    def create_competition(self, raw_spec: dict, actor: Principal) -> str:
        require_role(actor, Role.ORGANIZER)
        spec = CompetitionSpec.from_dict(raw_spec)
        if self.store.get_dataset(spec.hidden_dataset) is None:
            raise SpecInvalid(
                f"hidden_dataset {spec.hidden_dataset!r} is not registered"
            )
        if spec.public_dataset and self.store.get_dataset(spec.public_dataset) is None:
            raise SpecInvalid(
                f"public_dataset {spec.public_dataset!r} is not registered"
            )
        self.store.put_competition(spec.competition_id, spec.to_dict())
        return spec.competition_id

    def get_spec(self, competition_id: str) -> CompetitionSpec:
        raw = self.store.get_competition(competition_id)
        if raw is None:
            raise UnknownCompetition(competition_id)
        return CompetitionSpec.from_dict(raw)

    def competition_view(self, competition_id: str, actor: Principal | None) -> dict:
        spec = self.get_spec(competition_id)
        view = spec.to_dict()
        view["current_phase"] = phase_at(spec, self.clock()) or "closed"
        view["remaining_submissions"] = None
        if actor is not None:
            team = self.store.team_of(competition_id, actor.principal_id)
            if team:
                view["remaining_submissions"] = submissions_remaining(
                    self.store, team, competition_id, self.clock()
                )
        return view

    def list_competitions(self) -> list[dict]:
        return self.store.list_competitions()

    def starter_bundle(self, competition_id: str) -> bytes:
        self.get_spec(competition_id)
        return build_starter_bundle(competition_id)

    # -- datasets -------------------------------------------------------------

    def register_dataset(
        self,
        dataset_id: str,
        inputs_path: str | Path,
        labels_path: str | Path,
        visibility: DatasetVisibility | str,
    ) -> DatasetRef:
        """Validate the NDJSON pair and record it by reference (no copies)."""
        ref = DatasetRef(
            dataset_id=dataset_id,
            inputs_path=str(Path(inputs_path).resolve()),
            labels_path=str(Path(labels_path).resolve()),
            visibility=DatasetVisibility(visibility),
        )
        dataset = load_dataset(ref)
        ref.record_count = len(dataset.inputs)
        self.store.put_dataset(ref.to_dict())
        return ref

    # -- submissions -------------------------------------------------------------

    def submit(
        self,
        competition_id: str,
        blob: bytes,
        actor: Principal,
        team_id: str | None = None,
    ) -> dict:
        require_role(actor, Role.PARTICIPANT)
        spec = self.get_spec(competition_id)
        now = self.clock()
        if phase_at(spec, now) is None:
            raise PhaseClosed(f"competition {competition_id} has no open phase")
        bundle = validate_bundle(blob, competition_id, self.config.limits, now)
        if team_id is not None and team_id != bundle.team_id:
            raise SpecInvalid(
                f"team_id {team_id!r} does not match manifest team "
                f"{bundle.team_id!r}"
            )
        self.blobs.put(blob)
        return self.store.submit_atomic(
            competition_id=competition_id,
            team_id=bundle.team_id,
            principal_id=actor.principal_id,
            bundle=bundle.to_dict(),
            dataset_id=spec.hidden_dataset,
            daily_quota=spec.daily_quota,
        )

    def get_submission(self, submission_id: str, actor: Principal) -> dict:
        record = self.store.get_evaluation(submission_id)
        if record is None:
            raise UnknownSubmission(submission_id)
        view = dict(record)
        view.pop("claim_token", None)
        view.pop("lease_expires_at", None)
        view.pop("completions", None)
        view["log_tail"] = None
        if record["log_ref"] and self._may_see_logs(record, actor):
            tail = self.blobs.get(record["log_ref"])[-LOG_TAIL_BYTES:]
            view["log_tail"] = tail.decode("utf-8", errors="replace")
        return view

    def _may_see_logs(self, record: dict, actor: Principal) -> bool:
        if actor.role in _MUTATOR_ROLES:
            return True
        bundle = self.store.get_bundle(record["bundle_id"])
        if bundle is None:
            return False
        team = self.store.team_of(bundle["competition_id"], actor.principal_id)
        return team == bundle["team_id"]

    # -- leaderboard -------------------------------------------------------------

    def _terminal_records(
        self, dataset_id: str
    ) -> tuple[list[EvaluationRecord], dict[str, str]]:
        records = []
        team_ids: dict[str, str] = {}
        for row in self.store.list_evaluations(dataset_id=dataset_id):
            if row["status"] not in (
                EvalStatus.SUCCEEDED.value,
                EvalStatus.FAILED.value,
            ):
                continue
            records.append(
                EvaluationRecord(
                    eval_id=row["eval_id"],
                    bundle_id=row["bundle_id"],
                    dataset_id=row["dataset_id"],
                    status=EvalStatus(row["status"]),
                    error_class=ErrorClass(row["error_class"]),
                    metrics=row["metrics"],
                    wall_time_s=row["wall_time_s"],
                    log_ref=row["log_ref"],
                    started_at=row["started_at"],
                    finished_at=row["finished_at"],
                    created_at=row["created_at"],
                )
            )
            if row["bundle_id"] not in team_ids:
                bundle = self.store.get_bundle(row["bundle_id"])
                team_ids[row["bundle_id"]] = bundle["team_id"] if bundle else "?"
        return records, team_ids

    def leaderboard(self, competition_id: str) -> list[dict]:
        spec = self.get_spec(competition_id)
        records, team_ids = self._terminal_records(spec.hidden_dataset)
        entries = compute_leaderboard(records, spec, team_ids)
        return [
            {
                "rank": e.rank,
                "team_id": e.team_id,
                "best_score": e.best_score,
                "submission_count": e.submission_count,
                "best_at": e.best_at,
            }
            for e in entries
        ]

    # -- harvest / promote / serve ------------------------------------------------

    def harvest(self, bundle_id: str, actor: Principal) -> ModelVersion:
        require_role(actor, *_MUTATOR_ROLES)
        return self.registry.harvest(bundle_id)

    def promote(
        self, model_name: str, version: int, to_stage: str, actor: Principal
    ) -> ModelVersion:
        """Stage promotion; the gate scan runs when a version first leaves
        harvested. Re-promoting to the current stage is a no-op.
        """
        require_role(actor, *_MUTATOR_ROLES)
        model = self.registry.get(model_name, version)
        target = Stage(to_stage)
        if model.stage is target:
            return model
        if target is Stage.VALIDATED and model.gate_report_ref is None:
            bundle = self.store.get_bundle(model.source_bundle_id)
            if bundle is None:
                raise UnknownBundle(model.source_bundle_id)
            blob = self.blobs.get(bundle["blob_digest"])
            report = scan_bundle(
                model.source_bundle_id, blob, self.gate_rules, now=self.clock()
            )
            self.registry.attach_gate_report(model_name, version, report)
        self.registry.transition_stage(model_name, version, target, actor.principal_id)
        return self.registry.get(model_name, version)

    def serve_model(self, model_name: str, version: int, actor: Principal):
        require_role(actor, *_MUTATOR_ROLES)
        return self.host.materialize(model_name, version)

    def reevaluate(
        self, model_name: str, version: int, dataset_id: str, actor: Principal
    ) -> dict:
        require_role(actor, *_MUTATOR_ROLES)
        model = self.registry.get(model_name, version)
        dataset = self.store.get_dataset(dataset_id)
        if dataset is None:
            raise UnknownDataset(dataset_id)
        if dataset["visibility"] not in (
            DatasetVisibility.PROPRIETARY.value,
            DatasetVisibility.HIDDEN_EVAL.value,
        ):
            raise Forbidden(
                "re-evaluation is restricted to hidden or proprietary datasets"
            )
        record = self.store.create_evaluation(model.source_bundle_id, dataset_id)
        self.store.mark_reevaluation(record["eval_id"], model_name, version)
        return record

    # -- models / misc -------------------------------------------------------------

    def model_detail(self, model_name: str, version: int, actor: Principal) -> dict:
        require_role(actor, *_MUTATOR_ROLES)
        model = self.registry.get(model_name, version)
        report = self.registry.load_gate_report(model_name, version)
        detail = model.to_dict()
        detail["gate_report"] = report.to_dict() if report else None
        detail["metrics_history"] = self.registry.metrics_history(model_name, version)
        detail["transitions"] = self.store.list_transitions(model_name, version)
        try:
            detail["service"] = self.host.descriptor(model_name, version).to_dict()
        except UnknownService:
            detail["service"] = None
        return detail

    def bundle_blob(self, bundle_id: str, actor: Principal) -> bytes:
        require_role(actor, *_MUTATOR_ROLES)
        bundle = self.store.get_bundle(bundle_id)
        if bundle is None:
            raise UnknownBundle(bundle_id)
        return self.blobs.get(bundle["blob_digest"])
