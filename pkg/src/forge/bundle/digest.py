from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

_HEX64 = re.compile(r"^[0-9a-f]{64}$")


@dataclass(frozen=True)
class Digest:
    """SHA-256 rendered as 64 lowercase hex chars, no prefix."""

    hex: str

    def __post_init__(self):
        if not _HEX64.match(self.hex):
            raise ValueError(f"not a sha-256 hex digest: {self.hex!r}")

    def __str__(self) -> str:
        return self.hex


def compute_digest(data: bytes) -> Digest:
    return Digest(hashlib.sha256(data).hexdigest())
