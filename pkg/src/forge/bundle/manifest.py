"""Manifest schema: the machine-readable half of the submission template.

A bundle carries exactly one ``manifest.json`` at the archive root. The
schema is strict by design: unknown keys are rejected so that drift from the
published template fails fast instead of being silently ignored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from forge.errors import (
    MalformedManifest,
    MissingEntrypoint,
    PathEscape,
    UnsupportedSchemaVersion,
)

SCHEMA_VERSION = 1

_KNOWN_KEYS = {
    "schema_version",
    "competition_id",
    "team_id",
    "entrypoints",
    "model_files",
    "declared_dependencies",
    "runtime_hint",
    "hyper_parameters",
}

# ids end up in routes and registry model names; no slashes, no surprises
_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

_DEPENDENCY = re.compile(r"^[^@\s]+@[^@\s]+$")


@dataclass
class Manifest:
    competition_id: str
    team_id: str
    entrypoints: dict[str, list[str]]
    model_files: list[str] = field(default_factory=list)
    declared_dependencies: list[str] = field(default_factory=list)
    runtime_hint: str = ""
    hyper_parameters: dict[str, str] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def predict_argv(self) -> list[str]:
        return self.entrypoints["predict"]

    def to_dict(self) -> dict:
        d = {
            "schema_version": self.schema_version,
            "competition_id": self.competition_id,
            "team_id": self.team_id,
            "entrypoints": self.entrypoints,
            "model_files": self.model_files,
            "declared_dependencies": self.declared_dependencies,
            "runtime_hint": self.runtime_hint,
        }
        if self.hyper_parameters:
            d["hyper_parameters"] = self.hyper_parameters
        return d


def check_relative_path(path: str) -> None:
    """Reject any path that could resolve outside the bundle root."""
    if not isinstance(path, str) or not path:
        raise PathEscape(str(path))
    if "\\" in path or path.startswith("/") or ":" in path.split("/")[0]:
        raise PathEscape(path)
    parts = path.split("/")
    if any(part in ("", ".", "..") for part in parts):
        raise PathEscape(path)


def _require_str(obj: dict, key: str, pattern: re.Pattern | None = None) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise MalformedManifest(f"{key} must be a non-empty string")
    if pattern and not pattern.match(value):
        raise MalformedManifest(f"{key} has an invalid value: {value!r}")
    return value


def _parse_argv(value, name: str) -> list[str]:
    if (
        not isinstance(value, list)
        or not value
        or not all(isinstance(a, str) and a for a in value)
    ):
        raise MalformedManifest(
            f"entrypoint {name!r} must be a non-empty list of non-empty strings"
        )
    return list(value)


def parse_manifest(text: str) -> Manifest:
    """Parse and validate a manifest document; raises on any contract breach."""
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedManifest(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedManifest("top-level value must be an object")

    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise MalformedManifest(f"unknown top-level keys: {sorted(unknown)}")

    if "schema_version" not in raw:
        raise MalformedManifest("schema_version is required")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise UnsupportedSchemaVersion(
            f"schema_version must be {SCHEMA_VERSION}, got {raw['schema_version']!r}"
        )

    competition_id = _require_str(raw, "competition_id", _ID)
    team_id = _require_str(raw, "team_id", _ID)

    entrypoints_raw = raw.get("entrypoints")
    if not isinstance(entrypoints_raw, dict):
        raise MalformedManifest("entrypoints must be an object")
    if "predict" not in entrypoints_raw or entrypoints_raw["predict"] in ([], None):
        raise MissingEntrypoint("predict")
    extra_eps = set(entrypoints_raw) - {"predict", "train"}
    if extra_eps:
        raise MalformedManifest(f"unknown entrypoints: {sorted(extra_eps)}")
    entrypoints = {"predict": _parse_argv(entrypoints_raw["predict"], "predict")}
    if "train" in entrypoints_raw:
        entrypoints["train"] = _parse_argv(entrypoints_raw["train"], "train")

    model_files_raw = raw.get("model_files", [])
    if not isinstance(model_files_raw, list):
        raise MalformedManifest("model_files must be a list of relative paths")
    for path in model_files_raw:
        check_relative_path(path)

    deps_raw = raw.get("declared_dependencies", [])
    if not isinstance(deps_raw, list):
        raise MalformedManifest("declared_dependencies must be a list")
    for dep in deps_raw:
        if not isinstance(dep, str) or not _DEPENDENCY.match(dep):
            raise MalformedManifest(
                f"dependency must look like name@version, got {dep!r}"
            )

    runtime_hint = raw.get("runtime_hint", "")
    if not isinstance(runtime_hint, str):
        raise MalformedManifest("runtime_hint must be a string")

    hp_raw = raw.get("hyper_parameters", {})
    if not isinstance(hp_raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in hp_raw.items()
    ):
        raise MalformedManifest("hyper_parameters must map strings to strings")

    return Manifest(
        competition_id=competition_id,
        team_id=team_id,
        entrypoints=entrypoints,
        model_files=list(model_files_raw),
        declared_dependencies=list(deps_raw),
        runtime_hint=runtime_hint,
        hyper_parameters=dict(hp_raw),
    )
