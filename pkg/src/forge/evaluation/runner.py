"""Run one bundle's predict entrypoint over a dataset, classify the outcome.

Every failure mode maps to an error class on the record; the runner itself
never raises for model misbehavior. The child runs with a minimal
environment, rlimit caps from the sandbox policy, and (when the platform
runs as root) an unprivileged uid, so stray writes outside its scratch
directory are denied by file permissions.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from forge.evaluation.metrics import score
from forge.evaluation.protocol import (
    ModelProcess,
    ProcessExited,
    ReadyTimeout,
    RecordTimeout,
    WireViolation,
)
from forge.evaluation.types import Dataset, ErrorClass, EvalStatus, SandboxPolicy

_SANDBOX_UID_FALLBACK = 65534  # nobody


def default_sandbox_uid() -> int | None:
    """Unprivileged uid for model processes, or None when not running as root."""
    if os.geteuid() != 0:
        return None
    try:
        import pwd

        return pwd.getpwnam("nobody").pw_uid
    except (ImportError, KeyError):
        return _SANDBOX_UID_FALLBACK


def open_scratch_permissions(root: Path) -> None:
    """Let the sandboxed uid traverse, read and write the scratch tree."""
    for path in [root, *root.rglob("*")]:
        path.chmod(0o777 if path.is_dir() else 0o666)


@dataclass
class EvalOutcome:
    status: EvalStatus
    error_class: ErrorClass
    metrics: dict[str, float] = field(default_factory=dict)
    predictions: dict[str, Any] = field(default_factory=dict)
    stderr: bytes = b""
    wall_time_s: float = 0.0


def _child_env(scratch: Path) -> dict[str, str]:
    # deliberately not inherited from the platform process
    return {
        "PATH": "/usr/local/bin:/usr/bin:/bin",
        "HOME": str(scratch),
        "TMPDIR": str(scratch),
        "LANG": "C.UTF-8",
    }


def execute_bundle(
    bundle_root: Path,
    predict_argv: list[str],
    dataset: Dataset,
    metric_ids: list[str],
    policy: SandboxPolicy,
    *,
    sandbox_uid: int | None = None,
) -> EvalOutcome:
    """Drive the predict protocol end to end and score the answers.

    ``bundle_root`` is the extracted bundle and doubles as the child's
    working directory and scratch space.
    """
    start = time.monotonic()
    deadline = start + policy.total_timeout_s

    def remaining() -> float:
        return deadline - time.monotonic()

    def fail(error_class: ErrorClass, proc: ModelProcess | None) -> EvalOutcome:
        stderr = b""
        if proc:
            proc.kill()
            proc.drain(0.5)
            stderr = proc.stderr_bytes()
        return EvalOutcome(
            status=EvalStatus.FAILED,
            error_class=error_class,
            stderr=stderr[: policy.max_stderr_bytes],
            wall_time_s=time.monotonic() - start,
        )

    if sandbox_uid is not None:
        open_scratch_permissions(bundle_root)

    proc = ModelProcess(
        predict_argv,
        cwd=bundle_root,
        env=_child_env(bundle_root),
        max_memory_bytes=policy.max_memory_bytes,
        cpu_seconds=math.ceil(policy.total_timeout_s),
        sandbox_uid=sandbox_uid,
        stderr_cap=policy.max_stderr_bytes,
    )
    try:
        proc.start()
    except OSError as exc:
        out = EvalOutcome(
            status=EvalStatus.FAILED,
            error_class=ErrorClass.NONZERO_EXIT,
            stderr=f"failed to launch predict entrypoint: {exc}".encode(),
            wall_time_s=time.monotonic() - start,
        )
        return out

    def classify_exit(exited: ProcessExited, eof_class: ErrorClass) -> ErrorClass:
        if proc.killed_by_resource_signal():
            return ErrorClass.RESOURCE_LIMIT
        if exited.returncode not in (0, None):
            return ErrorClass.NONZERO_EXIT
        return eof_class

    try:
        proc.wait_ready(min(policy.startup_timeout_s, max(remaining(), 0.001)))
    except ReadyTimeout:
        cls = (
            ErrorClass.RESOURCE_LIMIT
            if remaining() <= 0
            else ErrorClass.STARTUP_TIMEOUT
        )
        return fail(cls, proc)
    except ProcessExited as exc:
        return fail(classify_exit(exc, ErrorClass.PROTOCOL_VIOLATION), proc)
    except WireViolation:
        return fail(ErrorClass.PROTOCOL_VIOLATION, proc)

    predictions: dict[str, Any] = {}
    for record_id in dataset.input_order:
        if remaining() <= 0:
            return fail(ErrorClass.RESOURCE_LIMIT, proc)
        try:
            predictions[record_id] = proc.request(
                record_id,
                dataset.inputs[record_id],
                min(policy.per_record_timeout_s, remaining()),
            )
        except RecordTimeout:
            cls = (
                ErrorClass.RESOURCE_LIMIT
                if remaining() <= 0
                else ErrorClass.RECORD_TIMEOUT
            )
            return fail(cls, proc)
        except ProcessExited as exc:
            return fail(classify_exit(exc, ErrorClass.INCOMPLETE_PREDICTIONS), proc)
        except WireViolation:
            return fail(ErrorClass.PROTOCOL_VIOLATION, proc)

    returncode = proc.finish(timeout=min(10.0, max(remaining(), 1.0)))
    if returncode != 0:
        cls = (
            ErrorClass.RESOURCE_LIMIT
            if proc.killed_by_resource_signal()
            else ErrorClass.NONZERO_EXIT
        )
        return fail(cls, proc)
    proc.drain()

    metrics = {m: score(predictions, dataset.labels, m) for m in metric_ids}
    return EvalOutcome(
        status=EvalStatus.SUCCEEDED,
        error_class=ErrorClass.NONE,
        metrics=metrics,
        predictions=predictions,
        stderr=proc.stderr_bytes()[: policy.max_stderr_bytes],
        wall_time_s=time.monotonic() - start,
    )
