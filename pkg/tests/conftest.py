from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from forge.bundle.archive import BundleLimits, pack_tree
from forge.evaluation.types import SandboxPolicy
from forge.portal.auth import Principal, Role
from forge.portal.service import PortalConfig, PortalService

# -- predict entrypoint fixtures -------------------------------------------------
# Each speaks protocol v1; they differ only in behavior under test.

READY = 'print(__import__("json").dumps({"ready": True, "protocol": 1}), flush=True)'

PREDICT_CONSTANT_1 = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({{"id": r["id"], "output": 1}}), flush=True)
"""

PREDICT_IDENTITY = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({{"id": r["id"], "output": r["input"]}}), flush=True)
"""

PREDICT_PARITY = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    value = r["input"]
    out = value % 2 if isinstance(value, int) else None
    print(json.dumps({{"id": r["id"], "output": out}}), flush=True)
"""

PREDICT_ADD_ONE = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    out = r["input"] + 1 if isinstance(r["input"], (int, float)) else r["input"]
    print(json.dumps({{"id": r["id"], "output": out}}), flush=True)
"""

PREDICT_DOUBLE = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    out = r["input"] * 2 if isinstance(r["input"], (int, float)) else r["input"]
    print(json.dumps({{"id": r["id"], "output": out}}), flush=True)
"""

PREDICT_WRONG_ID = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({{"id": "bogus", "output": 0}}), flush=True)
"""

PREDICT_NO_READY = """\
import time
time.sleep(300)
"""

PREDICT_EXIT_BEFORE_READY = """\
import sys
sys.exit(7)
"""

PREDICT_HALF_THEN_EXIT = f"""\
import json, sys
{READY}
answered = 0
for line in sys.stdin:
    r = json.loads(line)
    answered += 1
    if answered > 2:
        sys.exit(0)
    print(json.dumps({{"id": r["id"], "output": 0}}), flush=True)
"""

PREDICT_SLOW_RECORD = f"""\
import json, sys, time
{READY}
for line in sys.stdin:
    time.sleep(120)
"""

PREDICT_NONZERO_AFTER = f"""\
import json, sys
{READY}
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({{"id": r["id"], "output": 0}}), flush=True)
sys.exit(3)
"""


def escape_writer_source(target: str) -> str:
    """Predict script that first tries to write outside its scratch dir."""
    return f"""\
import json, sys
try:
    with open({target!r}, "w") as fh:
        fh.write("escaped")
except OSError:
    sys.exit(9)
{READY}
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({{"id": r["id"], "output": 0}}), flush=True)
"""


def make_manifest(
    competition_id: str = "compA",
    team_id: str = "teamX",
    *,
    model_files: list[str] | None = None,
    deps: list[str] | None = None,
    hyper: dict[str, str] | None = None,
    train: bool = False,
) -> dict:
    manifest = {
        "schema_version": 1,
        "competition_id": competition_id,
        "team_id": team_id,
        "entrypoints": {"predict": ["python3", "predict.py"]},
    }
    if train:
        manifest["entrypoints"]["train"] = ["python3", "train.py"]
    if model_files is not None:
        manifest["model_files"] = model_files
    if deps is not None:
        manifest["declared_dependencies"] = deps
    if hyper is not None:
        manifest["hyper_parameters"] = hyper
    return manifest


def make_bundle(
    competition_id: str = "compA",
    team_id: str = "teamX",
    predict_source: str = PREDICT_IDENTITY,
    *,
    extra_files: dict[str, bytes] | None = None,
    **manifest_kwargs,
) -> bytes:
    files = {
        "manifest.json": json.dumps(
            make_manifest(competition_id, team_id, **manifest_kwargs)
        ).encode(),
        "predict.py": predict_source.encode(),
    }
    if extra_files:
        files.update(extra_files)
    return pack_tree(files)


# -- datasets ---------------------------------------------------------------------


def write_dataset(
    directory: Path, rows: list[tuple[str, object, object]], name: str = "ds"
) -> tuple[Path, Path]:
    inputs = directory / f"{name}-inputs.ndjson"
    labels = directory / f"{name}-labels.ndjson"
    inputs.write_text(
        "".join(json.dumps({"id": rid, "input": x}) + "\n" for rid, x, _ in rows)
    )
    labels.write_text(
        "".join(json.dumps({"id": rid, "label": y}) + "\n" for rid, _, y in rows)
    )
    return inputs, labels


TOY_ROWS = [("r1", 3, 1), ("r2", 4, 0), ("r3", 7, 1), ("r4", 9, 1)]


# -- portal / policy fixtures -------------------------------------------------------

FAST_POLICY = dict(
    startup_timeout_s=10.0,
    per_record_timeout_s=5.0,
    total_timeout_s=30.0,
)


@pytest.fixture
def fast_policy() -> SandboxPolicy:
    return SandboxPolicy(**FAST_POLICY)


@pytest.fixture
def portal(tmp_path: Path, fast_policy: SandboxPolicy) -> PortalService:
    service = PortalService(
        PortalConfig(
            data_dir=tmp_path / "data",
            policy=fast_policy,
            workers=0,
            probe_interval_s=None,
        )
    )
    yield service
    service.shutdown()


def organizer() -> Principal:
    return Principal("org-1", "Organizer", Role.ORGANIZER)


def participant(n: int = 1) -> Principal:
    return Principal(f"part-{n}", f"Participant {n}", Role.PARTICIPANT)


def product_team() -> Principal:
    return Principal("pm-1", "Product Team", Role.PRODUCT_TEAM)


def open_phase_spec(
    competition_id: str = "compA",
    *,
    hidden_dataset: str = "hidden",
    primary_metric: str = "accuracy",
    direction: str = "maximize",
    daily_quota: int = 5,
    secondary_metrics: list[str] | None = None,
) -> dict:
    now = datetime.now(timezone.utc)
    return {
        "competition_id": competition_id,
        "title": f"{competition_id} challenge",
        "description": "test competition",
        "primary_metric": primary_metric,
        "direction": direction,
        "secondary_metrics": secondary_metrics or [],
        "phases": [
            {
                "phase_id": "main",
                "opens_at": (now - timedelta(days=1)).isoformat(),
                "closes_at": (now + timedelta(days=365)).isoformat(),
            }
        ],
        "daily_quota": daily_quota,
        "hidden_dataset": hidden_dataset,
        "reward_text": "eternal glory",
    }


def setup_toy_competition(
    portal: PortalService,
    tmp_path: Path,
    competition_id: str = "compA",
    rows=TOY_ROWS,
    **spec_kwargs,
) -> dict:
    inputs, labels = write_dataset(tmp_path, rows, name=f"{competition_id}-hidden")
    dataset_id = f"{competition_id}-hidden"
    portal.register_dataset(dataset_id, inputs, labels, "hidden_eval")
    spec = open_phase_spec(
        competition_id, hidden_dataset=dataset_id, **spec_kwargs
    )
    portal.create_competition(spec, organizer())
    return spec


# -- report hook so acceptance tests can print one line per criterion --------------


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)
