"""Submission bundle contract: archive format, manifest schema, digests."""

from forge.bundle.digest import Digest, compute_digest
from forge.bundle.manifest import Manifest, parse_manifest
from forge.bundle.archive import (
    BundleLimits,
    SubmissionBundle,
    extract_bundle,
    pack_bundle,
    pack_tree,
    read_bundle_files,
    validate_bundle,
)

__all__ = [
    "BundleLimits",
    "Digest",
    "Manifest",
    "SubmissionBundle",
    "compute_digest",
    "extract_bundle",
    "pack_bundle",
    "pack_tree",
    "parse_manifest",
    "read_bundle_files",
    "validate_bundle",
]
