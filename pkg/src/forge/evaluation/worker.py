"""Queue worker: claim, run, persist — repeatedly, and crash-safe.

Claims are leases (2x the total evaluation timeout); a record held by a
crashed worker becomes claimable again once its lease expires, and a late
terminal write from the original claimant is rejected by its stale claim
token, so every record reaches exactly one terminal state.
"""

from __future__ import annotations

import logging
import shutil
import tempfile
import threading
import time
import traceback
from pathlib import Path
from typing import Callable

from forge.bundle.archive import extract_bundle
from forge.clock import Clock, utc_now
from forge.evaluation.runner import default_sandbox_uid, execute_bundle
from forge.evaluation.types import (
    DatasetRef,
    DatasetVisibility,
    ErrorClass,
    EvalStatus,
    SandboxPolicy,
    load_dataset,
)

log = logging.getLogger(__name__)

BACKOFF_BASE_S = 1.0
BACKOFF_CAP_S = 60.0

OnFinished = Callable[[dict], None]


class EvalWorker:
    """Runs queued evaluations from the store, one at a time."""

    def __init__(
        self,
        store,
        blob_store,
        *,
        policy: SandboxPolicy | None = None,
        scratch_root: str | None = None,
        sandbox_uid: int | None | str = "auto",
        clock: Clock = utc_now,
        on_finished: OnFinished | None = None,
    ):
        self.store = store
        self.blob_store = blob_store
        self.policy = policy or SandboxPolicy()
        self.scratch_root = scratch_root
        self.sandbox_uid = (
            default_sandbox_uid() if sandbox_uid == "auto" else sandbox_uid
        )
        self.clock = clock
        self.on_finished = on_finished

    # -- single evaluation ------------------------------------------------------

    def _competition_metrics(self, bundle: dict) -> list[str]:
        spec = self.store.get_competition(bundle["competition_id"])
        if spec is None:
            return ["accuracy"]
        metrics = [spec["primary_metric"]]
        for m in spec.get("secondary_metrics", []):
            if m not in metrics:
                metrics.append(m)
        return metrics

    def _run_claimed(self, record: dict, claim_token: str) -> None:
        scratch = Path(
            tempfile.mkdtemp(prefix="forge-eval-", dir=self.scratch_root)
        )
        if self.sandbox_uid is not None:
            scratch.chmod(0o777)  # sandboxed uid must traverse into the bundle
        try:
            bundle = self.store.get_bundle(record["bundle_id"])
            dataset_row = self.store.get_dataset(record["dataset_id"])
            blob = self.blob_store.get(bundle["blob_digest"])
            bundle_root = extract_bundle(blob, scratch / "bundle")
            dataset = load_dataset(
                DatasetRef(
                    dataset_id=dataset_row["dataset_id"],
                    inputs_path=dataset_row["inputs_path"],
                    labels_path=dataset_row["labels_path"],
                    visibility=DatasetVisibility(dataset_row["visibility"]),
                )
            )
            outcome = execute_bundle(
                bundle_root,
                bundle["manifest"]["entrypoints"]["predict"],
                dataset,
                self._competition_metrics(bundle),
                self.policy,
                sandbox_uid=self.sandbox_uid,
            )
            status = outcome.status
            error_class = outcome.error_class
            metrics = outcome.metrics
            stderr = outcome.stderr
            wall_time_s = outcome.wall_time_s
        except Exception:
            # infrastructure fault, not the model's protocol behavior; the
            # record still terminates so the queue cannot wedge
            log.exception("evaluation %s failed outside the sandbox", record["eval_id"])
            status = EvalStatus.FAILED
            error_class = ErrorClass.NONZERO_EXIT
            metrics = {}
            stderr = traceback.format_exc().encode()[: self.policy.max_stderr_bytes]
            wall_time_s = 0.0
        finally:
            shutil.rmtree(scratch, ignore_errors=True)

        log_ref = self.blob_store.put(stderr).hex if stderr else None
        finished = self.store.finish_evaluation(
            record["eval_id"],
            claim_token,
            status=status.value,
            error_class=error_class.value,
            metrics=metrics,
            wall_time_s=wall_time_s,
            log_ref=log_ref,
        )
        if finished and self.on_finished:
            self.on_finished(self.store.get_evaluation(record["eval_id"]))

    # -- loop -------------------------------------------------------------------

    def run_once(self) -> bool:
        """Claim and run at most one record; False when the queue is empty."""
        claimed = self.store.claim_next_evaluation(2 * self.policy.total_timeout_s)
        if claimed is None:
            return False
        record, claim_token = claimed
        self._run_claimed(record, claim_token)
        return True

    def run_forever(
        self, stop: threading.Event, poll_interval_s: float = 0.2
    ) -> None:
        """Service loop: store errors back off exponentially, base 1 s, cap 60 s."""
        failures = 0
        while not stop.is_set():
            try:
                busy = self.run_once()
                failures = 0
            except Exception:
                log.exception("worker iteration failed; backing off")
                failures += 1
                delay = min(BACKOFF_BASE_S * 2 ** (failures - 1), BACKOFF_CAP_S)
                stop.wait(delay)
                continue
            if not busy:
                stop.wait(poll_interval_s)

    def drain(self, timeout_s: float = 60.0) -> None:
        """Run until the queue is empty (test and CLI convenience)."""
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if not self.run_once():
                return
        raise TimeoutError("queue did not drain in time")
