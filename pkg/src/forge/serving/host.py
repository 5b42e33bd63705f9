"""Service host: resident model processes behind stable routes.

A materialized version runs as one long-lived child speaking the same wire
protocol used during evaluation, so a bundle that evaluated cleanly serves
identically. Invocations are serialized per process (the protocol is
strictly sequential); distinct services run fully in parallel. Health is
actively probed with the reserved ``__health__`` record and any timeout,
exit or protocol breach flips the service to unhealthy rather than risking
a wrong answer.
"""

from __future__ import annotations

import hashlib
import json
import shutil
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from forge.bundle.archive import extract_bundle
from forge.clock import Clock, fmt_ts, utc_now
from forge.errors import (
    EmptyPipeline,
    InvokeTimeout,
    NotInServingStage,
    PortExhausted,
    ProtocolViolation,
    ServiceUnhealthy,
    StageNotServing,
    StartupFailed,
    UnknownPipeline,
    UnknownService,
)
from forge.evaluation.protocol import (
    HEALTH_RECORD_ID,
    ModelProcess,
    ProcessExited,
    ReadyTimeout,
    RecordTimeout,
    WireViolation,
)
from forge.evaluation.runner import open_scratch_permissions
from forge.evaluation.types import SandboxPolicy
from forge.registry.model_types import Stage
from forge.registry.registry import ModelRegistry
from forge.serving.openapi import canonical_json, generate_api_doc, model_route

STARTUP_LOG_EXCERPT = 500


class ServiceStatus(str, Enum):
    STARTING = "starting"
    HEALTHY = "healthy"
    STOPPED = "stopped"
    UNHEALTHY = "unhealthy"


@dataclass
class ServiceDescriptor:
    model_name: str
    version: int
    route: str
    api_doc_ref: str
    status: ServiceStatus
    started_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "version": self.version,
            "route": self.route,
            "api_doc_ref": self.api_doc_ref,
            "status": self.status.value,
            "started_at": self.started_at,
        }


@dataclass
class PipelineDescriptor:
    pipeline_id: str
    stages: list[tuple[str, int]]
    route: str

    def to_dict(self) -> dict:
        return {
            "pipeline_id": self.pipeline_id,
            "stages": [list(s) for s in self.stages],
            "route": self.route,
        }


@dataclass
class _Service:
    descriptor: ServiceDescriptor
    process: ModelProcess | None
    workdir: Path | None
    lock: threading.Lock = field(default_factory=threading.Lock)


class ServiceHost:
    def __init__(
        self,
        registry: ModelRegistry,
        *,
        policy: SandboxPolicy | None = None,
        scratch_root: str | None = None,
        sandbox_uid: int | None = None,
        max_services: int = 64,
        clock: Clock = utc_now,
        probe_interval_s: float | None = None,
    ):
        self.registry = registry
        self.policy = policy or SandboxPolicy()
        self.scratch_root = scratch_root
        self.sandbox_uid = sandbox_uid
        self.max_services = max_services
        self.clock = clock
        self._services: dict[tuple[str, int], _Service] = {}
        self._pipelines: dict[str, PipelineDescriptor] = {}
        self._table_lock = threading.RLock()
        self._stop_probing = threading.Event()
        if probe_interval_s:
            threading.Thread(
                target=self._probe_loop, args=(probe_interval_s,), daemon=True
            ).start()

    # -- lifecycle ----------------------------------------------------------------

    def materialize(self, model_name: str, version: int) -> ServiceDescriptor:
        """Start (or return the already-healthy) service for a serving version."""
        model = self.registry.get(model_name, version)
        if model.stage is not Stage.SERVING:
            raise NotInServingStage(
                f"{model_name} v{version} is in stage {model.stage.value}"
            )
        key = (model_name, version)
        with self._table_lock:
            existing = self._services.get(key)
            if existing and existing.descriptor.status is ServiceStatus.HEALTHY:
                return existing.descriptor
            active = sum(
                1
                for s in self._services.values()
                if s.descriptor.status
                in (ServiceStatus.HEALTHY, ServiceStatus.STARTING)
            )
            if active >= self.max_services:
                raise PortExhausted(
                    f"service table full ({self.max_services} active services)"
                )
            if existing:
                self._teardown(existing)

        workdir = Path(
            tempfile.mkdtemp(prefix="forge-serve-", dir=self.scratch_root)
        )
        bundle_root = extract_bundle(self.registry.blob_get(model.binary_ref), workdir / "bundle")
        if self.sandbox_uid is not None:
            open_scratch_permissions(workdir)

        bundle = self.registry.store.get_bundle(model.source_bundle_id)
        proc = ModelProcess(
            bundle["manifest"]["entrypoints"]["predict"],
            cwd=bundle_root,
            env={
                "PATH": "/usr/local/bin:/usr/bin:/bin",
                "HOME": str(workdir),
                "TMPDIR": str(workdir),
                "LANG": "C.UTF-8",
            },
            max_memory_bytes=self.policy.max_memory_bytes,
            sandbox_uid=self.sandbox_uid,
            stderr_cap=self.policy.max_stderr_bytes,
        )
        descriptor = ServiceDescriptor(
            model_name=model_name,
            version=version,
            route=model_route(model_name, version),
            api_doc_ref="",
            status=ServiceStatus.STARTING,
            started_at=fmt_ts(self.clock()),
        )
        try:
            proc.start()
            proc.wait_ready(self.policy.startup_timeout_s)
        except (ReadyTimeout, ProcessExited, WireViolation, OSError) as exc:
            proc.kill()
            proc.drain(0.5)
            excerpt = proc.stderr_bytes()[-STARTUP_LOG_EXCERPT:].decode(
                "utf-8", errors="replace"
            )
            shutil.rmtree(workdir, ignore_errors=True)
            raise StartupFailed(f"{exc} | stderr: {excerpt}") from exc

        doc = generate_api_doc(model_name, version)
        descriptor.api_doc_ref = self.registry.blob_put(
            canonical_json(doc).encode("utf-8")
        ).hex
        descriptor.status = ServiceStatus.HEALTHY
        with self._table_lock:
            self._services[key] = _Service(descriptor, proc, workdir)
        return descriptor

    def _teardown(self, service: _Service) -> None:
        if service.process is not None:
            service.process.kill()
            service.process = None
        if service.workdir is not None:
            shutil.rmtree(service.workdir, ignore_errors=True)
            service.workdir = None

    def stop(self, model_name: str, version: int) -> ServiceDescriptor:
        with self._table_lock:
            service = self._services.get((model_name, version))
            if service is None:
                raise UnknownService(f"{model_name} v{version} not materialized")
            self._teardown(service)
            service.descriptor.status = ServiceStatus.STOPPED
            return service.descriptor

    def shutdown(self) -> None:
        self._stop_probing.set()
        with self._table_lock:
            for service in self._services.values():
                self._teardown(service)
                service.descriptor.status = ServiceStatus.STOPPED

    # -- invocation ----------------------------------------------------------------

    def _service_for(self, model_name: str, version: int) -> _Service:
        with self._table_lock:
            service = self._services.get((model_name, version))
        if service is None:
            raise UnknownService(f"{model_name} v{version} not materialized")
        return service

    def _mark_unhealthy(self, service: _Service) -> None:
        service.descriptor.status = ServiceStatus.UNHEALTHY

    def invoke(self, model_name: str, version: int, value: Any) -> Any:
        """One protocol round-trip with a fresh request id."""
        service = self._service_for(model_name, version)
        if service.descriptor.status is not ServiceStatus.HEALTHY:
            raise ServiceUnhealthy(
                f"service is {service.descriptor.status.value}"
            )
        with service.lock:
            try:
                return service.process.request(
                    uuid.uuid4().hex,
                    value,
                    self.policy.per_record_timeout_s,
                )
            except RecordTimeout as exc:
                self._mark_unhealthy(service)
                raise InvokeTimeout(str(exc)) from exc
            except ProcessExited as exc:
                self._mark_unhealthy(service)
                raise ServiceUnhealthy(str(exc)) from exc
            except WireViolation as exc:
                self._mark_unhealthy(service)
                raise ProtocolViolation(str(exc)) from exc

    def probe(self, model_name: str, version: int) -> ServiceStatus:
        """Health check with the reserved record; flips status on failure."""
        service = self._service_for(model_name, version)
        if service.descriptor.status in (ServiceStatus.STOPPED,):
            return service.descriptor.status
        with service.lock:
            if service.process is None or not service.process.alive():
                self._mark_unhealthy(service)
                return service.descriptor.status
            try:
                service.process.request(
                    HEALTH_RECORD_ID, None, self.policy.per_record_timeout_s
                )
                service.descriptor.status = ServiceStatus.HEALTHY
            except (RecordTimeout, ProcessExited, WireViolation):
                self._mark_unhealthy(service)
        return service.descriptor.status

    def _probe_loop(self, interval_s: float) -> None:
        while not self._stop_probing.wait(interval_s):
            with self._table_lock:
                keys = [
                    k
                    for k, s in self._services.items()
                    if s.descriptor.status is ServiceStatus.HEALTHY
                ]
            for model_name, version in keys:
                try:
                    self.probe(model_name, version)
                except UnknownService:
                    pass

    # -- descriptors / dashboard ---------------------------------------------------

    def descriptor(self, model_name: str, version: int) -> ServiceDescriptor:
        return self._service_for(model_name, version).descriptor

    def api_document(self, model_name: str, version: int) -> dict:
        service = self._service_for(model_name, version)
        raw = self.registry.blob_get(service.descriptor.api_doc_ref)
        return json.loads(raw)

    def dashboard_snapshot(self) -> list[dict]:
        """Live service table joined with registry metrics, stable order."""
        with self._table_lock:
            items = sorted(self._services.items())
        rows = []
        for (model_name, version), service in items:
            model = self.registry.get(model_name, version)
            rows.append(
                {
                    "service": service.descriptor.to_dict(),
                    "metrics": model.metrics,
                }
            )
        return rows

    # -- pipelines -------------------------------------------------------------------

    def compose_pipeline(
        self, stages: list[tuple[str, int]]
    ) -> PipelineDescriptor:
        """Register a sequential pipeline over serving, healthy stages."""
        if not stages:
            raise EmptyPipeline("a pipeline needs at least one stage")
        normalized: list[tuple[str, int]] = []
        for index, (model_name, version) in enumerate(stages):
            model = self.registry.get(model_name, version)
            if model.stage is not Stage.SERVING:
                raise StageNotServing(
                    index, f"stage {index}: {model_name} v{version} is {model.stage.value}"
                )
            with self._table_lock:
                service = self._services.get((model_name, version))
            if (
                service is None
                or service.descriptor.status is not ServiceStatus.HEALTHY
            ):
                raise StageNotServing(
                    index, f"stage {index}: {model_name} v{version} is not healthy"
                )
            normalized.append((model_name, int(version)))

        seed = json.dumps(normalized, sort_keys=True, separators=(",", ":"))
        pipeline_id = "p" + hashlib.sha256(seed.encode()).hexdigest()[:12]
        descriptor = PipelineDescriptor(
            pipeline_id=pipeline_id,
            stages=normalized,
            route=f"/pipelines/{pipeline_id}/predict",
        )
        with self._table_lock:
            self._pipelines[pipeline_id] = descriptor
        return descriptor

    def get_pipeline(self, pipeline_id: str) -> PipelineDescriptor:
        with self._table_lock:
            descriptor = self._pipelines.get(pipeline_id)
        if descriptor is None:
            raise UnknownPipeline(pipeline_id)
        return descriptor

    def list_pipelines(self) -> list[PipelineDescriptor]:
        with self._table_lock:
            return sorted(self._pipelines.values(), key=lambda p: p.pipeline_id)

    def invoke_pipeline(self, pipeline_id: str, value: Any) -> Any:
        """Feed each stage's output to the next stage, in order."""
        descriptor = self.get_pipeline(pipeline_id)
        current = value
        for model_name, version in descriptor.stages:
            current = self.invoke(model_name, version, current)
        return current
