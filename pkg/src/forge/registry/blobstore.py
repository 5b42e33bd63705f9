"""Content-addressed blob store on the local filesystem.

Layout is ``<root>/blobs/<d0d1>/<digest>`` with a two-hex-char fan-out.
Writes are write-temp-then-rename so readers never observe partial blobs;
reads re-hash the content so silent corruption surfaces as an error.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from forge.bundle.digest import Digest, compute_digest
from forge.errors import UnknownDigest


class BlobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root) / "blobs"
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest_hex: str) -> Path:
        return self.root / digest_hex[:2] / digest_hex

    def put(self, data: bytes) -> Digest:
        """Store bytes under their digest; idempotent by content."""
        digest = compute_digest(data)
        target = self._path(digest.hex)
        if target.exists():
            return digest
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return digest

    def get(self, digest: str | Digest) -> bytes:
        digest_hex = digest.hex if isinstance(digest, Digest) else digest
        path = self._path(digest_hex)
        if not path.is_file():
            raise UnknownDigest(f"no blob {digest_hex}")
        data = path.read_bytes()
        if compute_digest(data).hex != digest_hex:
            raise UnknownDigest(f"blob {digest_hex} failed digest verification")
        return data

    def exists(self, digest: str | Digest) -> bool:
        digest_hex = digest.hex if isinstance(digest, Digest) else digest
        return self._path(digest_hex).is_file()
