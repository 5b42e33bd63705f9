"""Embedded transactional metadata store (SQLite).

One database file under the data directory holds all platform metadata;
bundle bytes live in the content-addressed blob store next to it. The store
owns every multi-row invariant that must be atomic: quota-checked submission
intake, evaluation claims with leases, gapless model version assignment and
stage transitions. Callers get plain dicts; domain modules wrap them.

Connections are per-thread; write transactions run under BEGIN IMMEDIATE so
concurrent workers serialize on the database write lock.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import uuid
from contextlib import contextmanager
from datetime import timedelta
from pathlib import Path

from forge.clock import Clock, fmt_ts, utc_day_bounds, utc_now
from forge.errors import (
    DuplicateEvaluation,
    DuplicateId,
    Forbidden,
    GateNotPassed,
    IllegalTransition,
    QuotaExhausted,
    UnknownBundle,
    UnknownDataset,
    UnknownVersion,
)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS principals(
    principal_id TEXT PRIMARY KEY,
    display_name TEXT NOT NULL,
    role TEXT NOT NULL,
    token_hash TEXT NOT NULL UNIQUE,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS teams(
    competition_id TEXT NOT NULL,
    principal_id TEXT NOT NULL,
    team_id TEXT NOT NULL,
    joined_at TEXT NOT NULL,
    PRIMARY KEY (competition_id, principal_id)
);
CREATE TABLE IF NOT EXISTS competitions(
    competition_id TEXT PRIMARY KEY,
    spec_json TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS datasets(
    dataset_id TEXT PRIMARY KEY,
    inputs_path TEXT NOT NULL,
    labels_path TEXT NOT NULL,
    visibility TEXT NOT NULL,
    record_count INTEGER NOT NULL DEFAULT 0,
    registered_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS bundles(
    bundle_id TEXT PRIMARY KEY,
    blob_digest TEXT NOT NULL,
    byte_size INTEGER NOT NULL,
    manifest_json TEXT NOT NULL,
    competition_id TEXT NOT NULL,
    team_id TEXT NOT NULL,
    submitted_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS submissions(
    submission_id TEXT PRIMARY KEY,
    competition_id TEXT NOT NULL,
    team_id TEXT NOT NULL,
    principal_id TEXT NOT NULL,
    bundle_id TEXT NOT NULL,
    eval_id TEXT NOT NULL,
    submitted_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_submissions_quota
    ON submissions(competition_id, team_id, submitted_at);
CREATE TABLE IF NOT EXISTS evaluations(
    eval_id TEXT PRIMARY KEY,
    bundle_id TEXT NOT NULL,
    dataset_id TEXT NOT NULL,
    status TEXT NOT NULL,
    error_class TEXT NOT NULL DEFAULT 'none',
    metrics_json TEXT NOT NULL DEFAULT '{}',
    wall_time_s REAL NOT NULL DEFAULT 0,
    log_ref TEXT,
    started_at TEXT,
    finished_at TEXT,
    created_at TEXT NOT NULL,
    lease_expires_at TEXT,
    claim_token TEXT,
    completions INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS idx_eval_queue ON evaluations(status, created_at);
CREATE INDEX IF NOT EXISTS idx_eval_pair ON evaluations(bundle_id, dataset_id);
CREATE TABLE IF NOT EXISTS models(
    model_name TEXT NOT NULL,
    version INTEGER NOT NULL,
    source_bundle_id TEXT NOT NULL UNIQUE,
    hyper_parameters_json TEXT NOT NULL DEFAULT '{}',
    metrics_json TEXT NOT NULL DEFAULT '{}',
    binary_ref TEXT NOT NULL,
    stage TEXT NOT NULL,
    gate_report_ref TEXT,
    created_at TEXT NOT NULL,
    PRIMARY KEY (model_name, version)
);
CREATE TABLE IF NOT EXISTS stage_transitions(
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    model_name TEXT NOT NULL,
    version INTEGER NOT NULL,
    from_stage TEXT NOT NULL,
    to_stage TEXT NOT NULL,
    actor TEXT NOT NULL,
    at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS metric_audit(
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    model_name TEXT NOT NULL,
    version INTEGER NOT NULL,
    dataset_id TEXT NOT NULL,
    metrics_json TEXT NOT NULL,
    at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS reevaluations(
    eval_id TEXT PRIMARY KEY,
    model_name TEXT NOT NULL,
    version INTEGER NOT NULL
);
"""

_NON_FAILED = ("queued", "running", "succeeded")


def _row_to_dict(row: sqlite3.Row) -> dict:
    return {k: row[k] for k in row.keys()}


class MetadataStore:
    def __init__(self, path: str | Path, *, clock: Clock = utc_now):
        self.path = str(path)
        self._clock = clock
        self._local = threading.local()
        with self.transaction():
            pass  # force schema creation up front

    # -- connection plumbing --------------------------------------------------

    def _connection(self) -> sqlite3.Connection:
        cx = getattr(self._local, "cx", None)
        if cx is None:
            cx = sqlite3.connect(self.path, isolation_level=None, timeout=30.0)
            cx.row_factory = sqlite3.Row
            cx.execute("PRAGMA journal_mode=WAL")
            cx.execute("PRAGMA synchronous=NORMAL")
            cx.execute("PRAGMA busy_timeout=30000")
            cx.execute("PRAGMA foreign_keys=ON")
            cx.executescript(_SCHEMA)
            self._local.cx = cx
        return cx

    @contextmanager
    def transaction(self):
        cx = self._connection()
        cx.execute("BEGIN IMMEDIATE")
        try:
            yield cx
        except BaseException:
            cx.execute("ROLLBACK")
            raise
        else:
            cx.execute("COMMIT")

    def _read(self) -> sqlite3.Connection:
        return self._connection()

    def now_ts(self) -> str:
        return fmt_ts(self._clock())

    def close(self) -> None:
        cx = getattr(self._local, "cx", None)
        if cx is not None:
            cx.close()
            self._local.cx = None

    # -- principals -------------------------------------------------------------

    def put_principal(
        self, principal_id: str, display_name: str, role: str, token_hash: str
    ) -> None:
        with self.transaction() as cx:
            try:
                cx.execute(
                    "INSERT INTO principals VALUES (?,?,?,?,?)",
                    (principal_id, display_name, role, token_hash, self.now_ts()),
                )
            except sqlite3.IntegrityError as exc:
                raise DuplicateId(f"principal {principal_id!r} exists") from exc

    def get_principal(self, principal_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT * FROM principals WHERE principal_id=?", (principal_id,)
        ).fetchone()
        return _row_to_dict(row) if row else None

    def find_principal_by_token_hash(self, token_hash: str) -> dict | None:
        row = self._read().execute(
            "SELECT * FROM principals WHERE token_hash=?", (token_hash,)
        ).fetchone()
        return _row_to_dict(row) if row else None

    # -- competitions -------------------------------------------------------------

    def put_competition(self, competition_id: str, spec: dict) -> None:
        with self.transaction() as cx:
            try:
                cx.execute(
                    "INSERT INTO competitions VALUES (?,?,?)",
                    (competition_id, json.dumps(spec, sort_keys=True), self.now_ts()),
                )
            except sqlite3.IntegrityError as exc:
                raise DuplicateId(f"competition {competition_id!r} exists") from exc

    def get_competition(self, competition_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT spec_json FROM competitions WHERE competition_id=?",
            (competition_id,),
        ).fetchone()
        return json.loads(row["spec_json"]) if row else None

    def list_competitions(self) -> list[dict]:
        rows = self._read().execute(
            "SELECT spec_json FROM competitions ORDER BY competition_id"
        ).fetchall()
        return [json.loads(r["spec_json"]) for r in rows]

    # -- datasets -------------------------------------------------------------

    def put_dataset(self, ref: dict) -> None:
        with self.transaction() as cx:
            try:
                cx.execute(
                    "INSERT INTO datasets VALUES (?,?,?,?,?,?)",
                    (
                        ref["dataset_id"],
                        ref["inputs_path"],
                        ref["labels_path"],
                        ref["visibility"],
                        ref.get("record_count", 0),
                        self.now_ts(),
                    ),
                )
            except sqlite3.IntegrityError as exc:
                raise DuplicateId(f"dataset {ref['dataset_id']!r} exists") from exc

    def get_dataset(self, dataset_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT * FROM datasets WHERE dataset_id=?", (dataset_id,)
        ).fetchone()
        return _row_to_dict(row) if row else None

    def list_datasets(self) -> list[dict]:
        rows = self._read().execute(
            "SELECT * FROM datasets ORDER BY dataset_id"
        ).fetchall()
        return [_row_to_dict(r) for r in rows]

    # -- bundles -------------------------------------------------------------

    def put_bundle(self, bundle: dict) -> None:
        """Idempotent: bundle ids are content-derived, re-insert is a no-op."""
        with self.transaction() as cx:
            cx.execute(
                "INSERT OR IGNORE INTO bundles VALUES (?,?,?,?,?,?,?)",
                (
                    bundle["bundle_id"],
                    bundle["blob_digest"],
                    bundle["byte_size"],
                    json.dumps(bundle["manifest"], sort_keys=True),
                    bundle["competition_id"],
                    bundle["team_id"],
                    bundle["submitted_at"],
                ),
            )

    def get_bundle(self, bundle_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT * FROM bundles WHERE bundle_id=?", (bundle_id,)
        ).fetchone()
        if not row:
            return None
        d = _row_to_dict(row)
        d["manifest"] = json.loads(d.pop("manifest_json"))
        return d

    # -- teams -------------------------------------------------------------

    def team_of(self, competition_id: str, principal_id: str) -> str | None:
        row = self._read().execute(
            "SELECT team_id FROM teams WHERE competition_id=? AND principal_id=?",
            (competition_id, principal_id),
        ).fetchone()
        return row["team_id"] if row else None

    # -- submissions (atomic quota + intake) ----------------------------------

    def count_submissions_on_day(
        self, competition_id: str, team_id: str, now
    ) -> int:
        start, end = utc_day_bounds(now)
        row = self._read().execute(
            "SELECT COUNT(*) AS n FROM submissions "
            "WHERE competition_id=? AND team_id=? AND submitted_at>=? AND submitted_at<?",
            (competition_id, team_id, fmt_ts(start), fmt_ts(end)),
        ).fetchone()
        return row["n"]

    def get_submission(self, submission_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT * FROM submissions WHERE submission_id=?", (submission_id,)
        ).fetchone()
        return _row_to_dict(row) if row else None

    def submit_atomic(
        self,
        *,
        competition_id: str,
        team_id: str,
        principal_id: str,
        bundle: dict,
        dataset_id: str,
        daily_quota: int,
    ) -> dict:
        """Team enrollment + quota check + bundle row + queued evaluation,
        all in one transaction. Raises Forbidden on a team conflict,
        QuotaExhausted past the daily cap, DuplicateEvaluation when the
        identical bundle already has a live evaluation on the dataset.
        """
        now = self._clock()
        now_ts = fmt_ts(now)
        start, end = utc_day_bounds(now)
        with self.transaction() as cx:
            row = cx.execute(
                "SELECT team_id FROM teams WHERE competition_id=? AND principal_id=?",
                (competition_id, principal_id),
            ).fetchone()
            if row is None:
                cx.execute(
                    "INSERT INTO teams VALUES (?,?,?,?)",
                    (competition_id, principal_id, team_id, now_ts),
                )
            elif row["team_id"] != team_id:
                raise Forbidden(
                    f"principal already belongs to team {row['team_id']!r} "
                    f"in this competition"
                )

            used = cx.execute(
                "SELECT COUNT(*) AS n FROM submissions "
                "WHERE competition_id=? AND team_id=? AND submitted_at>=? AND submitted_at<?",
                (competition_id, team_id, fmt_ts(start), fmt_ts(end)),
            ).fetchone()["n"]
            if used >= daily_quota:
                raise QuotaExhausted(
                    f"daily quota of {daily_quota} submissions reached"
                )

            cx.execute(
                "INSERT OR IGNORE INTO bundles VALUES (?,?,?,?,?,?,?)",
                (
                    bundle["bundle_id"],
                    bundle["blob_digest"],
                    bundle["byte_size"],
                    json.dumps(bundle["manifest"], sort_keys=True),
                    bundle["competition_id"],
                    bundle["team_id"],
                    now_ts,
                ),
            )
            record = self._create_evaluation_in(cx, bundle["bundle_id"], dataset_id)
            cx.execute(
                "INSERT INTO submissions VALUES (?,?,?,?,?,?,?)",
                (
                    record["eval_id"],
                    competition_id,
                    team_id,
                    principal_id,
                    bundle["bundle_id"],
                    record["eval_id"],
                    now_ts,
                ),
            )
        return record

    # -- evaluations -------------------------------------------------------------

    def _create_evaluation_in(
        self, cx: sqlite3.Connection, bundle_id: str, dataset_id: str
    ) -> dict:
        if not cx.execute(
            "SELECT 1 FROM bundles WHERE bundle_id=?", (bundle_id,)
        ).fetchone():
            raise UnknownBundle(bundle_id)
        if not cx.execute(
            "SELECT 1 FROM datasets WHERE dataset_id=?", (dataset_id,)
        ).fetchone():
            raise UnknownDataset(dataset_id)
        live = cx.execute(
            "SELECT COUNT(*) AS n FROM evaluations "
            "WHERE bundle_id=? AND dataset_id=? AND status IN (?,?,?)",
            (bundle_id, dataset_id, *_NON_FAILED),
        ).fetchone()["n"]
        if live:
            raise DuplicateEvaluation(
                f"bundle {bundle_id} already has a live evaluation on {dataset_id}"
            )
        attempt = cx.execute(
            "SELECT COUNT(*) AS n FROM evaluations WHERE bundle_id=? AND dataset_id=?",
            (bundle_id, dataset_id),
        ).fetchone()["n"]
        seed = f"{bundle_id}|{dataset_id}|{attempt}".encode()
        eval_id = "e" + hashlib.sha256(seed).hexdigest()[:16]
        cx.execute(
            "INSERT INTO evaluations (eval_id, bundle_id, dataset_id, status, created_at) "
            "VALUES (?,?,?,'queued',?)",
            (eval_id, bundle_id, dataset_id, self.now_ts()),
        )
        return self._eval_row(cx, eval_id)

    def create_evaluation(self, bundle_id: str, dataset_id: str) -> dict:
        with self.transaction() as cx:
            return self._create_evaluation_in(cx, bundle_id, dataset_id)

    def _eval_row(self, cx: sqlite3.Connection, eval_id: str) -> dict:
        row = cx.execute(
            "SELECT * FROM evaluations WHERE eval_id=?", (eval_id,)
        ).fetchone()
        if row is None:
            return None
        d = _row_to_dict(row)
        d["metrics"] = json.loads(d.pop("metrics_json"))
        return d

    def get_evaluation(self, eval_id: str) -> dict | None:
        return self._eval_row(self._read(), eval_id)

    def list_evaluations(
        self,
        *,
        dataset_id: str | None = None,
        bundle_id: str | None = None,
        status: str | None = None,
    ) -> list[dict]:
        clauses, args = [], []
        for col, val in (
            ("dataset_id", dataset_id),
            ("bundle_id", bundle_id),
            ("status", status),
        ):
            if val is not None:
                clauses.append(f"{col}=?")
                args.append(val)
        where = ("WHERE " + " AND ".join(clauses)) if clauses else ""
        rows = self._read().execute(
            f"SELECT eval_id FROM evaluations {where} ORDER BY created_at, eval_id",
            args,
        ).fetchall()
        return [self.get_evaluation(r["eval_id"]) for r in rows]

    def claim_next_evaluation(self, lease_seconds: float) -> tuple[dict, str] | None:
        """Atomically claim the oldest queued (or lease-expired) record."""
        now = self._clock()
        now_ts = fmt_ts(now)
        lease_ts = fmt_ts(now + timedelta(seconds=lease_seconds))
        claim_token = uuid.uuid4().hex[:16]
        with self.transaction() as cx:
            row = cx.execute(
                "SELECT eval_id FROM evaluations "
                "WHERE status='queued' OR (status='running' AND lease_expires_at<=?) "
                "ORDER BY created_at, eval_id LIMIT 1",
                (now_ts,),
            ).fetchone()
            if row is None:
                return None
            eval_id = row["eval_id"]
            cx.execute(
                "UPDATE evaluations SET status='running', started_at=?, "
                "lease_expires_at=?, claim_token=? WHERE eval_id=?",
                (now_ts, lease_ts, claim_token, eval_id),
            )
            return self._eval_row(cx, eval_id), claim_token

    def finish_evaluation(
        self,
        eval_id: str,
        claim_token: str,
        *,
        status: str,
        error_class: str,
        metrics: dict,
        wall_time_s: float,
        log_ref: str | None,
    ) -> bool:
        """Terminal write; returns False when the claim was lost to another
        worker (late finish after lease expiry) and the result is discarded.
        """
        with self.transaction() as cx:
            cur = cx.execute(
                "UPDATE evaluations SET status=?, error_class=?, metrics_json=?, "
                "wall_time_s=?, log_ref=?, finished_at=?, claim_token=NULL, "
                "completions=completions+1 "
                "WHERE eval_id=? AND status='running' AND claim_token=?",
                (
                    status,
                    error_class,
                    json.dumps(metrics, sort_keys=True),
                    wall_time_s,
                    log_ref,
                    self.now_ts(),
                    eval_id,
                    claim_token,
                ),
            )
            return cur.rowcount == 1

    # -- models -------------------------------------------------------------

    def _model_row(self, cx, model_name: str, version: int) -> dict | None:
        row = cx.execute(
            "SELECT * FROM models WHERE model_name=? AND version=?",
            (model_name, version),
        ).fetchone()
        if row is None:
            return None
        d = _row_to_dict(row)
        d["hyper_parameters"] = json.loads(d.pop("hyper_parameters_json"))
        d["metrics"] = json.loads(d.pop("metrics_json"))
        return d

    def get_model(self, model_name: str, version: int) -> dict | None:
        return self._model_row(self._read(), model_name, version)

    def get_model_by_bundle(self, source_bundle_id: str) -> dict | None:
        row = self._read().execute(
            "SELECT model_name, version FROM models WHERE source_bundle_id=?",
            (source_bundle_id,),
        ).fetchone()
        if row is None:
            return None
        return self.get_model(row["model_name"], row["version"])

    def insert_model_version(
        self,
        *,
        model_name: str,
        source_bundle_id: str,
        hyper_parameters: dict,
        metrics: dict,
        binary_ref: str,
        stage: str,
    ) -> dict:
        """Assign the next dense version number; idempotent per source bundle."""
        with self.transaction() as cx:
            existing = cx.execute(
                "SELECT model_name, version FROM models WHERE source_bundle_id=?",
                (source_bundle_id,),
            ).fetchone()
            if existing:
                return self._model_row(cx, existing["model_name"], existing["version"])
            version = cx.execute(
                "SELECT COALESCE(MAX(version),0)+1 AS v FROM models WHERE model_name=?",
                (model_name,),
            ).fetchone()["v"]
            cx.execute(
                "INSERT INTO models VALUES (?,?,?,?,?,?,?,NULL,?)",
                (
                    model_name,
                    version,
                    source_bundle_id,
                    json.dumps(hyper_parameters, sort_keys=True),
                    json.dumps(metrics, sort_keys=True),
                    binary_ref,
                    stage,
                    self.now_ts(),
                ),
            )
            return self._model_row(cx, model_name, version)

    def list_models(
        self, *, stage: str | None = None, prefix: str | None = None
    ) -> list[dict]:
        clauses, args = [], []
        if stage is not None:
            clauses.append("stage=?")
            args.append(stage)
        if prefix is not None:
            clauses.append("model_name LIKE ? ESCAPE '\\'")
            args.append(prefix.replace("\\", "\\\\").replace("%", "\\%").replace("_", "\\_") + "%")
        where = ("WHERE " + " AND ".join(clauses)) if clauses else ""
        rows = self._read().execute(
            f"SELECT model_name, version FROM models {where} "
            "ORDER BY model_name, version",
            args,
        ).fetchall()
        return [self.get_model(r["model_name"], r["version"]) for r in rows]

    def set_gate_report_ref(
        self, model_name: str, version: int, report_digest: str
    ) -> None:
        with self.transaction() as cx:
            cur = cx.execute(
                "UPDATE models SET gate_report_ref=? WHERE model_name=? AND version=?",
                (report_digest, model_name, version),
            )
            if cur.rowcount != 1:
                raise UnknownVersion(f"{model_name} v{version}")

    def apply_stage_transition(
        self,
        model_name: str,
        version: int,
        to_stage: str,
        actor: str,
        legal_pairs: set[tuple[str, str]],
        gate_required_stage: str,
    ) -> dict:
        with self.transaction() as cx:
            model = self._model_row(cx, model_name, version)
            if model is None:
                raise UnknownVersion(f"{model_name} v{version}")
            from_stage = model["stage"]
            if (from_stage, to_stage) not in legal_pairs:
                raise IllegalTransition(from_stage, to_stage)
            if to_stage == gate_required_stage and not model["gate_report_ref"]:
                raise GateNotPassed("no gate report attached")
            at = self.now_ts()
            cx.execute(
                "UPDATE models SET stage=? WHERE model_name=? AND version=?",
                (to_stage, model_name, version),
            )
            cx.execute(
                "INSERT INTO stage_transitions "
                "(model_name, version, from_stage, to_stage, actor, at) "
                "VALUES (?,?,?,?,?,?)",
                (model_name, version, from_stage, to_stage, actor, at),
            )
            return {
                "model_name": model_name,
                "version": version,
                "from_stage": from_stage,
                "to_stage": to_stage,
                "actor": actor,
                "at": at,
            }

    def list_transitions(
        self, model_name: str | None = None, version: int | None = None
    ) -> list[dict]:
        clauses, args = [], []
        if model_name is not None:
            clauses.append("model_name=?")
            args.append(model_name)
        if version is not None:
            clauses.append("version=?")
            args.append(version)
        where = ("WHERE " + " AND ".join(clauses)) if clauses else ""
        rows = self._read().execute(
            f"SELECT * FROM stage_transitions {where} ORDER BY seq", args
        ).fetchall()
        return [_row_to_dict(r) for r in rows]

    def append_model_metrics(
        self, model_name: str, version: int, dataset_id: str, metrics: dict
    ) -> dict:
        """Latest-wins merge under the dataset key, plus one audit row per call."""
        with self.transaction() as cx:
            model = self._model_row(cx, model_name, version)
            if model is None:
                raise UnknownVersion(f"{model_name} v{version}")
            merged = dict(model["metrics"])
            merged[dataset_id] = dict(metrics)
            cx.execute(
                "UPDATE models SET metrics_json=? WHERE model_name=? AND version=?",
                (json.dumps(merged, sort_keys=True), model_name, version),
            )
            cx.execute(
                "INSERT INTO metric_audit (model_name, version, dataset_id, metrics_json, at) "
                "VALUES (?,?,?,?,?)",
                (
                    model_name,
                    version,
                    dataset_id,
                    json.dumps(dict(metrics), sort_keys=True),
                    self.now_ts(),
                ),
            )
            return self._model_row(cx, model_name, version)

    def metric_audit_trail(
        self, model_name: str, version: int, dataset_id: str | None = None
    ) -> list[dict]:
        clauses = ["model_name=?", "version=?"]
        args: list = [model_name, version]
        if dataset_id is not None:
            clauses.append("dataset_id=?")
            args.append(dataset_id)
        rows = self._read().execute(
            f"SELECT * FROM metric_audit WHERE {' AND '.join(clauses)} ORDER BY seq",
            args,
        ).fetchall()
        out = []
        for r in rows:
            d = _row_to_dict(r)
            d["metrics"] = json.loads(d.pop("metrics_json"))
            out.append(d)
        return out

    # -- re-evaluation bookkeeping ---------------------------------------------

    def mark_reevaluation(self, eval_id: str, model_name: str, version: int) -> None:
        with self.transaction() as cx:
            cx.execute(
                "INSERT OR REPLACE INTO reevaluations VALUES (?,?,?)",
                (eval_id, model_name, version),
            )

    def reevaluation_target(self, eval_id: str) -> tuple[str, int] | None:
        row = self._read().execute(
            "SELECT model_name, version FROM reevaluations WHERE eval_id=?",
            (eval_id,),
        ).fetchone()
        return (row["model_name"], row["version"]) if row else None
