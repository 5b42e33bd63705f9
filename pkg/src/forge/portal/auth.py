"""Static bearer tokens, hashed at rest; roles fixed at mint time."""

from __future__ import annotations

import hashlib
import re
import secrets
from dataclasses import dataclass
from enum import Enum

from forge.errors import Forbidden, SpecInvalid, Unauthenticated


class Role(str, Enum):
    ORGANIZER = "organizer"
    PARTICIPANT = "participant"
    PRODUCT_TEAM = "product_team"


@dataclass
class Principal:
    principal_id: str
    display_name: str
    role: Role


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


def _slug(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    if not slug:
        raise SpecInvalid(f"cannot derive a principal id from {name!r}")
    return slug


def mint_token(store, display_name: str, role: Role | str) -> tuple[str, str]:
    """Create a principal and return (principal_id, cleartext token).

    The cleartext token is shown exactly once; only its digest is stored.
    """
    role = Role(role)
    token = secrets.token_urlsafe(32)
    principal_id = _slug(display_name)
    store.put_principal(principal_id, display_name, role.value, hash_token(token))
    return principal_id, token


def authenticate(store, token: str | None) -> Principal:
    if not token:
        raise Unauthenticated("missing bearer token")
    row = store.find_principal_by_token_hash(hash_token(token))
    if row is None:
        raise Unauthenticated("unknown token")
    return Principal(
        principal_id=row["principal_id"],
        display_name=row["display_name"],
        role=Role(row["role"]),
    )


def require_role(principal: Principal, *roles: Role) -> None:
    if principal.role not in roles:
        allowed = ", ".join(r.value for r in roles)
        raise Forbidden(
            f"role {principal.role.value} may not perform this action "
            f"(requires {allowed})"
        )
