import threading
import time
from pathlib import Path

import pytest

from forge.errors import DuplicateEvaluation, UnknownBundle, UnknownDataset
from forge.evaluation.types import SandboxPolicy
from forge.evaluation.worker import EvalWorker
from forge.portal.service import PortalConfig, PortalService

from conftest import (
    PREDICT_CONSTANT_1,
    PREDICT_PARITY,
    make_bundle,
    participant,
    setup_toy_competition,
)


@pytest.fixture
def seeded(portal, tmp_path):
    """Portal with a toy competition and one queued submission."""
    setup_toy_competition(portal, tmp_path)
    record = portal.submit(
        "compA", make_bundle(predict_source=PREDICT_CONSTANT_1), participant()
    )
    return portal, record


def test_enqueue_creates_queued_record(seeded):
    portal, record = seeded
    assert record["status"] == "queued"
    assert record["metrics"] == {}
    assert record["error_class"] == "none"


def test_duplicate_live_evaluation_rejected(seeded):
    portal, record = seeded
    with pytest.raises(DuplicateEvaluation):
        portal.store.create_evaluation(record["bundle_id"], record["dataset_id"])


def test_unknown_ids_on_direct_enqueue(portal, tmp_path):
    setup_toy_competition(portal, tmp_path)
    with pytest.raises(UnknownBundle):
        portal.store.create_evaluation("no-such-bundle", "compA-hidden")
    record = portal.submit("compA", make_bundle(), participant())
    with pytest.raises(UnknownDataset):
        portal.store.create_evaluation(record["bundle_id"], "no-such-dataset")
    with pytest.raises(UnknownBundle):
        portal.registry.harvest("no-such-bundle")


def test_worker_runs_queued_record_to_success(seeded):
    portal, record = seeded
    worker = portal.make_worker()
    assert worker.run_once() is True
    done = portal.store.get_evaluation(record["eval_id"])
    assert done["status"] == "succeeded"
    assert done["metrics"] == {"accuracy": 0.75}
    assert done["finished_at"] is not None
    assert done["completions"] == 1
    # empty queue now
    assert worker.run_once() is False


def test_retry_allowed_after_failure(portal, tmp_path):
    setup_toy_competition(portal, tmp_path)
    blob = make_bundle(predict_source="import sys; sys.exit(4)")
    record = portal.submit("compA", blob, participant())
    portal.make_worker().run_once()
    done = portal.store.get_evaluation(record["eval_id"])
    assert done["status"] == "failed"
    # failed records do not block a fresh evaluation of the same pair
    again = portal.store.create_evaluation(record["bundle_id"], record["dataset_id"])
    assert again["eval_id"] != record["eval_id"]


def test_three_records_two_workers_exactly_once(portal, tmp_path):
    setup_toy_competition(portal, tmp_path)
    records = []
    for team in ("t1", "t2", "t3"):
        blob = make_bundle(team_id=team, predict_source=PREDICT_PARITY)
        records.append(portal.submit("compA", blob, participant(int(team[1]))))

    workers = [portal.make_worker() for _ in range(2)]
    threads = [
        threading.Thread(target=lambda w=w: [w.run_once() for _ in range(3)])
        for w in workers
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=60)

    for record in records:
        done = portal.store.get_evaluation(record["eval_id"])
        assert done["status"] == "succeeded"
        assert done["completions"] == 1


def test_lease_expiry_allows_reclaim(tmp_path):
    policy = SandboxPolicy(
        startup_timeout_s=5, per_record_timeout_s=0.4, total_timeout_s=0.5
    )
    portal = PortalService(
        PortalConfig(
            data_dir=tmp_path / "data", policy=policy, workers=0, probe_interval_s=None
        )
    )
    try:
        setup_toy_competition(portal, tmp_path)
        record = portal.submit(
            "compA", make_bundle(predict_source=PREDICT_CONSTANT_1), participant()
        )
        # simulate a crashed worker: claim without ever finishing
        claimed = portal.store.claim_next_evaluation(2 * policy.total_timeout_s)
        assert claimed is not None
        assert portal.store.claim_next_evaluation(1.0) is None  # still leased

        time.sleep(2 * policy.total_timeout_s + 0.2)
        worker = portal.make_worker()
        assert worker.run_once() is True  # reclaimed after lease expiry
        done = portal.store.get_evaluation(record["eval_id"])
        assert done["status"] in ("succeeded", "failed")
        assert done["completions"] == 1

        # the original claimant's late finish is discarded
        _, stale_token = claimed
        accepted = portal.store.finish_evaluation(
            record["eval_id"],
            stale_token,
            status="failed",
            error_class="nonzero_exit",
            metrics={},
            wall_time_s=0.0,
            log_ref=None,
        )
        assert accepted is False
        assert portal.store.get_evaluation(record["eval_id"])["completions"] == 1
    finally:
        portal.shutdown()


def test_run_forever_survives_store_faults_with_backoff(seeded, monkeypatch):
    portal, record = seeded
    worker = portal.make_worker()
    monkeypatch.setattr("forge.evaluation.worker.BACKOFF_BASE_S", 0.01)

    real_claim = portal.store.claim_next_evaluation
    failures = {"left": 3}

    def flaky(lease_seconds):
        if failures["left"] > 0:
            failures["left"] -= 1
            raise RuntimeError("injected store fault")
        return real_claim(lease_seconds)

    monkeypatch.setattr(portal.store, "claim_next_evaluation", flaky)
    stop = threading.Event()
    thread = threading.Thread(target=worker.run_forever, args=(stop, 0.02))
    thread.start()
    deadline = time.monotonic() + 30
    while time.monotonic() < deadline:
        if portal.store.get_evaluation(record["eval_id"])["status"] == "succeeded":
            break
        time.sleep(0.05)
    stop.set()
    thread.join(timeout=5)
    assert failures["left"] == 0
    assert portal.store.get_evaluation(record["eval_id"])["status"] == "succeeded"


def test_run_forever_stops_on_event(seeded):
    portal, record = seeded
    stop = threading.Event()
    worker = portal.make_worker()
    thread = threading.Thread(target=worker.run_forever, args=(stop, 0.05))
    thread.start()
    deadline = time.monotonic() + 30
    while time.monotonic() < deadline:
        if portal.store.get_evaluation(record["eval_id"])["status"] == "succeeded":
            break
        time.sleep(0.05)
    stop.set()
    thread.join(timeout=5)
    assert not thread.is_alive()
    assert portal.store.get_evaluation(record["eval_id"])["status"] == "succeeded"
