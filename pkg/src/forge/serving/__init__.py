"""Materialize registry versions as routed microservices and pipelines."""

from forge.serving.openapi import (
    ApiDocument,
    canonical_json,
    generate_api_doc,
    validate_openapi,
)
from forge.serving.host import (
    PipelineDescriptor,
    ServiceDescriptor,
    ServiceHost,
    ServiceStatus,
)

__all__ = [
    "ApiDocument",
    "PipelineDescriptor",
    "ServiceDescriptor",
    "ServiceHost",
    "ServiceStatus",
    "canonical_json",
    "generate_api_doc",
    "validate_openapi",
]
