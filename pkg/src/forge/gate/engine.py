"""The gate scanner: applies every rule to every matching file.

Scans are pure functions of (bundle contents, ruleset, timestamp): finding
order is fixed at (path, line, rule_id) and the report serialization is
canonical, so a report is byte-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from fnmatch import fnmatchcase

from forge.bundle.archive import read_bundle_files
from forge.bundle.digest import Digest
from forge.bundle.manifest import Manifest, parse_manifest
from forge.clock import fmt_ts, utc_now
from forge.gate.rules import GateRule, RuleKind, Severity, ruleset_digest

MANIFEST_NAME = "manifest.json"

BINARY_SNIFF_BYTES = 8192
EXCERPT_MAX = 200

BIN_SKIP_RULE_ID = "BIN-SKIP"


@dataclass
class Finding:
    rule_id: str
    severity: Severity
    path: str
    line: int | None = None
    excerpt: str = ""

    def sort_key(self):
        return (self.path, self.line if self.line is not None else 0, self.rule_id)

    def to_dict(self) -> dict:
        d = {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "path": self.path,
            "excerpt": self.excerpt,
        }
        if self.line is not None:
            d["line"] = self.line
        return d


@dataclass
class GateReport:
    bundle_id: str
    ruleset_digest: Digest
    findings: list[Finding] = field(default_factory=list)
    verdict: str = "pass"
    scanned_at: str = ""

    def to_dict(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "ruleset_digest": self.ruleset_digest.hex,
            "findings": [f.to_dict() for f in self.findings],
            "verdict": self.verdict,
            "scanned_at": self.scanned_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, raw: dict) -> "GateReport":
        return cls(
            bundle_id=raw["bundle_id"],
            ruleset_digest=Digest(raw["ruleset_digest"]),
            findings=[
                Finding(
                    rule_id=f["rule_id"],
                    severity=Severity(f["severity"]),
                    path=f["path"],
                    line=f.get("line"),
                    excerpt=f.get("excerpt", ""),
                )
                for f in raw["findings"]
            ],
            verdict=raw["verdict"],
            scanned_at=raw["scanned_at"],
        )


def is_binary(content: bytes) -> bool:
    return b"\x00" in content[:BINARY_SNIFF_BYTES]


def _excerpt(line: str) -> str:
    return line.strip()[:EXCERPT_MAX]


def _pattern_findings(rule: GateRule, path: str, text: str) -> list[Finding]:
    found = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if rule.compiled.search(line):
            found.append(
                Finding(rule.rule_id, rule.severity, path, lineno, _excerpt(line))
            )
    return found


def scan(
    bundle_id: str,
    files: dict[str, bytes],
    ruleset: list[GateRule],
    now: datetime | None = None,
) -> GateReport:
    """Scan bundle contents (path -> bytes) with every rule in ``ruleset``.

    Pattern rules skip binary files (NUL byte in the first 8 KiB); each
    skipped file is surfaced once as an info-level BIN-SKIP finding so the
    gap is visible in the report.
    """
    for rule in ruleset:
        rule.validate()

    findings: list[Finding] = []
    paths = sorted(files)

    pattern_rules = [r for r in ruleset if r.kind is RuleKind.PATTERN]
    binary_paths = {p for p in paths if is_binary(files[p])}
    texts = {
        p: files[p].decode("utf-8", errors="replace")
        for p in paths
        if p not in binary_paths
    }

    for rule in ruleset:
        matching = [p for p in paths if fnmatchcase(p, rule.file_glob)]
        if rule.kind is RuleKind.PATTERN:
            for path in matching:
                if path in binary_paths:
                    continue
                findings.extend(_pattern_findings(rule, path, texts[path]))
        elif rule.kind is RuleKind.MAX_FILE_BYTES:
            for path in matching:
                size = len(files[path])
                if size > rule.limit:
                    findings.append(
                        Finding(
                            rule.rule_id,
                            rule.severity,
                            path,
                            None,
                            f"{size} bytes exceeds limit {rule.limit}",
                        )
                    )
        elif rule.kind is RuleKind.MAX_FILE_COUNT:
            if len(matching) > rule.limit:
                findings.append(
                    Finding(
                        rule.rule_id,
                        rule.severity,
                        ".",
                        None,
                        f"{len(matching)} files exceeds limit {rule.limit}",
                    )
                )
        elif rule.kind is RuleKind.DEPENDENCY_ALLOWLIST:
            for dep in _declared_dependencies(files):
                if not any(fnmatchcase(dep, allowed) for allowed in rule.allowlist):
                    findings.append(
                        Finding(
                            rule.rule_id,
                            rule.severity,
                            MANIFEST_NAME,
                            None,
                            f"dependency not in allowlist: {dep}",
                        )
                    )

    for path in sorted(binary_paths):
        if any(fnmatchcase(path, r.file_glob) for r in pattern_rules):
            findings.append(
                Finding(
                    BIN_SKIP_RULE_ID,
                    Severity.INFO,
                    path,
                    None,
                    "binary file skipped by pattern rules",
                )
            )

    findings.sort(key=Finding.sort_key)
    verdict = (
        "fail" if any(f.severity is Severity.BLOCK for f in findings) else "pass"
    )
    return GateReport(
        bundle_id=bundle_id,
        ruleset_digest=ruleset_digest(ruleset),
        findings=findings,
        verdict=verdict,
        scanned_at=fmt_ts(now or utc_now()),
    )


def scan_bundle(
    bundle_id: str,
    blob: bytes,
    ruleset: list[GateRule],
    now: datetime | None = None,
) -> GateReport:
    return scan(bundle_id, read_bundle_files(blob), ruleset, now=now)


def _declared_dependencies(files: dict[str, bytes]) -> list[str]:
    raw = files.get(MANIFEST_NAME)
    if raw is None:
        return []
    try:
        manifest: Manifest = parse_manifest(raw.decode("utf-8"))
    except Exception:
        return []
    return manifest.declared_dependencies
