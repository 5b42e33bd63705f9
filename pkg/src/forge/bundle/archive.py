"""Bundle archives: deterministic packing, validation, safe extraction.

The bundle file format is a ZIP with ``manifest.json`` at the root. Packing
is byte-deterministic (lexicographic entry order, zeroed timestamps, fixed
attributes) so equal trees produce equal digests, which the registry relies
on for deduplication.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from forge.bundle.digest import Digest, compute_digest
from forge.bundle.manifest import Manifest, check_relative_path, parse_manifest
from forge.clock import fmt_ts, utc_now
from forge.errors import (
    BundleTooLarge,
    FileCountExceeded,
    ForgeError,
    ManifestInvalid,
    ManifestMissing,
    NotAnArchive,
    WrongCompetition,
)

MANIFEST_NAME = "manifest.json"

# DOS epoch; ZIP cannot represent anything earlier
_ZERO_TIME = (1980, 1, 1, 0, 0, 0)


@dataclass
class BundleLimits:
    max_bundle_bytes: int = 512 * 1024 * 1024
    max_entries: int = 10_000


@dataclass
class SubmissionBundle:
    bundle_id: str
    blob_digest: Digest
    manifest: Manifest
    byte_size: int
    submitted_at: str
    team_id: str
    competition_id: str = ""

    def to_dict(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "blob_digest": self.blob_digest.hex,
            "manifest": self.manifest.to_dict(),
            "byte_size": self.byte_size,
            "submitted_at": self.submitted_at,
            "team_id": self.team_id,
            "competition_id": self.competition_id,
        }


def _open_archive(blob: bytes) -> zipfile.ZipFile:
    if not zipfile.is_zipfile(io.BytesIO(blob)):
        raise NotAnArchive("submission is not a ZIP archive")
    try:
        return zipfile.ZipFile(io.BytesIO(blob))
    except zipfile.BadZipFile as exc:
        raise NotAnArchive(f"corrupt archive: {exc}") from exc


def validate_bundle(
    blob: bytes,
    competition_id: str,
    limits: BundleLimits | None = None,
    now: datetime | None = None,
) -> SubmissionBundle:
    """Admit a submission blob or raise the specific rejection.

    Checks, in order: size cap, archive well-formedness, entry count, entry
    path safety, manifest presence and validity, competition match, and that
    every declared model file is present in the archive.
    """
    limits = limits or BundleLimits()
    if len(blob) > limits.max_bundle_bytes:
        raise BundleTooLarge(
            f"bundle is {len(blob)} bytes, cap is {limits.max_bundle_bytes}"
        )

    with _open_archive(blob) as zf:
        names = zf.namelist()
        if len(names) > limits.max_entries:
            raise FileCountExceeded(
                f"{len(names)} entries, cap is {limits.max_entries}"
            )
        seen: set[str] = set()
        for name in names:
            if name.endswith("/"):  # directory entries carry no content
                continue
            check_relative_path(name)
            if name in seen:
                raise NotAnArchive(f"duplicate archive entry: {name!r}")
            seen.add(name)

        if MANIFEST_NAME not in seen:
            raise ManifestMissing(f"{MANIFEST_NAME} missing at archive root")
        try:
            manifest = parse_manifest(zf.read(MANIFEST_NAME).decode("utf-8"))
        except ForgeError as exc:
            raise ManifestInvalid(exc) from exc
        except UnicodeDecodeError as exc:
            raise ManifestInvalid(f"manifest is not UTF-8: {exc}") from exc

        if manifest.competition_id != competition_id:
            raise WrongCompetition(
                f"manifest targets {manifest.competition_id!r}, "
                f"expected {competition_id!r}"
            )
        for path in manifest.model_files:
            if path not in seen:
                raise ManifestInvalid(f"declared model file not in archive: {path!r}")

    digest = compute_digest(blob)
    return SubmissionBundle(
        bundle_id="b" + digest.hex[:16],
        blob_digest=digest,
        manifest=manifest,
        byte_size=len(blob),
        submitted_at=fmt_ts(now or utc_now()),
        team_id=manifest.team_id,
        competition_id=manifest.competition_id,
    )


def pack_tree(files: dict[str, bytes]) -> bytes:
    """Deterministically zip an in-memory tree (path -> content)."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name in sorted(files):
            check_relative_path(name)
            info = zipfile.ZipInfo(name, date_time=_ZERO_TIME)
            info.create_system = 3
            info.external_attr = 0o644 << 16
            zf.writestr(info, files[name], zipfile.ZIP_DEFLATED, 9)
    return buf.getvalue()


def pack_bundle(directory: str | Path) -> bytes:
    """Pack a directory tree into a bundle archive.

    The manifest must be present and valid, and every declared model file
    must exist in the tree. Symlinks are rejected rather than followed.
    """
    root = Path(directory)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ManifestMissing(f"{MANIFEST_NAME} missing in {root}")
    try:
        manifest = parse_manifest(manifest_path.read_text("utf-8"))
    except ForgeError as exc:
        raise ManifestInvalid(exc) from exc

    files: dict[str, bytes] = {}
    for path in sorted(root.rglob("*")):
        if path.is_symlink():
            raise ManifestInvalid(f"symlink not allowed in bundle: {path.name}")
        if path.is_file():
            files[path.relative_to(root).as_posix()] = path.read_bytes()

    for declared in manifest.model_files:
        if declared not in files:
            raise ManifestInvalid(f"declared model file not in tree: {declared!r}")
    return pack_tree(files)


def read_bundle_files(blob: bytes) -> dict[str, bytes]:
    """All regular-file entries of a validated bundle, as path -> bytes."""
    with _open_archive(blob) as zf:
        return {
            name: zf.read(name)
            for name in zf.namelist()
            if not name.endswith("/")
        }


def extract_bundle(blob: bytes, dest: str | Path) -> Path:
    """Extract a validated bundle under ``dest``; never writes outside it."""
    root = Path(dest).resolve()
    root.mkdir(parents=True, exist_ok=True)
    with _open_archive(blob) as zf:
        for name in zf.namelist():
            if name.endswith("/"):
                continue
            check_relative_path(name)
            target = (root / name).resolve()
            if root != target and root not in target.parents:
                raise ManifestInvalid(f"entry escapes extraction root: {name!r}")
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(zf.read(name))
    return root
