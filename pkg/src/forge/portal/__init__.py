"""Public HTTP API, auth, and the service facade binding every module."""

from forge.portal.auth import Principal, Role, authenticate, mint_token, require_role
from forge.portal.service import PortalConfig, PortalService

__all__ = [
    "PortalConfig",
    "PortalService",
    "Principal",
    "Role",
    "authenticate",
    "mint_token",
    "require_role",
]
