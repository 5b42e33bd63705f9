"""Gate rules: a small self-contained rule vocabulary loaded from YAML.

Four rule kinds cover the v1 gate: regex pattern scans, per-file size caps,
archive entry-count caps, and a dependency allowlist. Rulesets are hashed
over a canonical JSON serialization so reports can state exactly which rules
produced them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import yaml

from forge.bundle.digest import Digest, compute_digest
from forge.errors import RulesetFileMissing, RulesetInvalid

DEFAULT_RULES_RESOURCE = "default_rules.yaml"


class Severity(str, Enum):
    INFO = "info"
    WARN = "warn"
    BLOCK = "block"


class RuleKind(str, Enum):
    PATTERN = "pattern"
    MAX_FILE_BYTES = "max_file_bytes"
    MAX_FILE_COUNT = "max_file_count"
    DEPENDENCY_ALLOWLIST = "dependency_allowlist"


@dataclass
class GateRule:
    rule_id: str
    severity: Severity
    kind: RuleKind
    file_glob: str = "*"
    pattern: str | None = None
    limit: int | None = None
    allowlist: list[str] = field(default_factory=list)
    compiled: re.Pattern | None = field(default=None, repr=False, compare=False)

    def validate(self) -> "GateRule":
        if self.kind is RuleKind.PATTERN:
            if not self.pattern:
                raise RulesetInvalid(self.rule_id, "pattern kind requires a pattern")
            try:
                self.compiled = re.compile(self.pattern)
            except re.error as exc:
                raise RulesetInvalid(self.rule_id, f"pattern does not compile: {exc}")
        elif self.kind in (RuleKind.MAX_FILE_BYTES, RuleKind.MAX_FILE_COUNT):
            if not isinstance(self.limit, int) or self.limit <= 0:
                raise RulesetInvalid(self.rule_id, "limit must be a positive integer")
        elif self.kind is RuleKind.DEPENDENCY_ALLOWLIST:
            if not isinstance(self.allowlist, list) or not all(
                isinstance(a, str) and a for a in self.allowlist
            ):
                raise RulesetInvalid(self.rule_id, "allowlist must be a list of strings")
        return self

    def to_dict(self) -> dict:
        d: dict = {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "kind": self.kind.value,
            "file_glob": self.file_glob,
        }
        if self.pattern is not None:
            d["pattern"] = self.pattern
        if self.limit is not None:
            d["limit"] = self.limit
        if self.allowlist:
            d["allowlist"] = self.allowlist
        return d


def rule_from_dict(raw: dict) -> GateRule:
    rule_id = raw.get("rule_id", "")
    if not rule_id:
        raise RulesetInvalid("?", "rule_id is required")
    try:
        severity = Severity(raw.get("severity", ""))
    except ValueError:
        raise RulesetInvalid(rule_id, f"unknown severity {raw.get('severity')!r}")
    try:
        kind = RuleKind(raw.get("kind", ""))
    except ValueError:
        raise RulesetInvalid(rule_id, f"unknown kind {raw.get('kind')!r}")
    return GateRule(
        rule_id=rule_id,
        severity=severity,
        kind=kind,
        file_glob=raw.get("file_glob", "*"),
        pattern=raw.get("pattern"),
        limit=raw.get("limit"),
        allowlist=list(raw.get("allowlist", [])),
    ).validate()


def load_ruleset(text: str) -> list[GateRule]:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RulesetInvalid("?", f"ruleset is not valid YAML: {exc}")
    if not isinstance(raw, list):
        raise RulesetInvalid("?", "ruleset must be a YAML list of rules")
    return [rule_from_dict(item) for item in raw]


def ruleset_digest(rules: list[GateRule]) -> Digest:
    canonical = json.dumps(
        [r.to_dict() for r in rules], sort_keys=True, separators=(",", ":")
    )
    return compute_digest(canonical.encode("utf-8"))


def default_ruleset() -> list[GateRule]:
    """The packaged default ruleset; digest is stable across runs."""
    ref = resources.files("forge.gate").joinpath(DEFAULT_RULES_RESOURCE)
    try:
        text = ref.read_text(encoding="utf-8")
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise RulesetFileMissing(f"packaged ruleset missing: {exc}") from exc
    return load_ruleset(text)
