"""Generated OpenAPI 3 documents for materialized model services.

Each served version gets a single-path document describing its predict
route. Serialization is canonical (sorted keys, fixed separators) so the
same inputs always produce the same document bytes and digest.
"""

from __future__ import annotations

import json
from typing import Any

from forge.errors import SchemaInvalid

OPENAPI_VERSION = "3.0.3"

ApiDocument = dict


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_route(model_name: str, version: int) -> str:
    return f"/models/{model_name}/{version}/predict"


def generate_api_doc(
    model_name: str,
    version: int,
    io_schema: dict[str, Any] | None = None,
) -> ApiDocument:
    """Build the document for one model's predict route.

    ``io_schema`` may carry JSON schemas under "input" and "output"; absent
    schemas default to "any value". The result always passes
    :func:`validate_openapi`; a schema with dangling $refs raises.
    """
    io_schema = io_schema or {}
    input_schema = io_schema.get("input", {})
    output_schema = io_schema.get("output", {})

    doc: ApiDocument = {
        "openapi": OPENAPI_VERSION,
        "info": {
            "title": model_name,
            "version": str(version),
            "description": (
                "Auto-generated API for a harvested competition model. "
                "POST a JSON object with an 'input' value; the response "
                "carries the model's 'output' value."
            ),
        },
        "paths": {
            model_route(model_name, version): {
                "post": {
                    "operationId": "predict",
                    "summary": f"Invoke {model_name} v{version}",
                    "requestBody": {
                        "required": True,
                        "content": {
                            "application/json": {
                                "schema": {
                                    "$ref": "#/components/schemas/PredictRequest"
                                }
                            }
                        },
                    },
                    "responses": {
                        "200": {
                            "description": "Model output",
                            "content": {
                                "application/json": {
                                    "schema": {
                                        "$ref": "#/components/schemas/PredictResponse"
                                    }
                                }
                            },
                        }
                    },
                }
            }
        },
        "components": {
            "schemas": {
                "PredictRequest": {
                    "type": "object",
                    "required": ["input"],
                    "properties": {"input": input_schema},
                },
                "PredictResponse": {
                    "type": "object",
                    "required": ["output"],
                    "properties": {"output": output_schema},
                },
            }
        },
    }
    validate_openapi(doc)
    return doc


def _collect_refs(node: Any, refs: list[str]) -> None:
    if isinstance(node, dict):
        for key, value in node.items():
            if key == "$ref":
                if not isinstance(value, str):
                    raise SchemaInvalid(f"$ref must be a string, got {value!r}")
                refs.append(value)
            else:
                _collect_refs(value, refs)
    elif isinstance(node, list):
        for item in node:
            _collect_refs(item, refs)


def _resolve_pointer(doc: dict, ref: str) -> bool:
    if not ref.startswith("#/"):
        return False
    node: Any = doc
    for part in ref[2:].split("/"):
        part = part.replace("~1", "/").replace("~0", "~")
        if not isinstance(node, dict) or part not in node:
            return False
        node = node[part]
    return True


def validate_openapi(doc: dict) -> None:
    """Structural OpenAPI 3 validation: required sections, method shape,
    and resolvable internal $refs. Raises SchemaInvalid on any breach.
    """
    if not isinstance(doc, dict):
        raise SchemaInvalid("document must be an object")
    if not isinstance(doc.get("openapi"), str) or not doc["openapi"].startswith("3."):
        raise SchemaInvalid("openapi version field missing or not 3.x")
    info = doc.get("info")
    if (
        not isinstance(info, dict)
        or not isinstance(info.get("title"), str)
        or not isinstance(info.get("version"), str)
    ):
        raise SchemaInvalid("info.title and info.version are required strings")
    paths = doc.get("paths")
    if not isinstance(paths, dict) or not paths:
        raise SchemaInvalid("paths must be a non-empty object")
    for path, operations in paths.items():
        if not path.startswith("/") or not isinstance(operations, dict) or not operations:
            raise SchemaInvalid(f"bad path item {path!r}")
        for method, op in operations.items():
            if method not in {"get", "put", "post", "delete", "options", "head", "patch", "trace"}:
                raise SchemaInvalid(f"unknown method {method!r} on {path!r}")
            if not isinstance(op, dict) or not isinstance(op.get("responses"), dict) or not op["responses"]:
                raise SchemaInvalid(f"{method} {path}: responses are required")
    refs: list[str] = []
    _collect_refs(doc, refs)
    for ref in refs:
        if not _resolve_pointer(doc, ref):
            raise SchemaInvalid(f"unresolvable reference {ref!r}")
