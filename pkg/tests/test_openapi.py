import json

import pytest

from forge.bundle.digest import compute_digest
from forge.errors import SchemaInvalid
from forge.serving.openapi import (
    canonical_json,
    generate_api_doc,
    model_route,
    validate_openapi,
)


def test_single_path_single_post():
    doc = generate_api_doc("compA/teamX", 3)
    assert doc["openapi"] == "3.0.3"
    assert doc["info"]["title"] == "compA/teamX"
    assert doc["info"]["version"] == "3"
    assert list(doc["paths"]) == ["/models/compA/teamX/3/predict"]
    operations = doc["paths"]["/models/compA/teamX/3/predict"]
    assert list(operations) == ["post"]


def test_route_derivation():
    assert model_route("compA/teamX", 3) == "/models/compA/teamX/3/predict"


def test_generation_is_deterministic():
    a = canonical_json(generate_api_doc("m/t", 1))
    b = canonical_json(generate_api_doc("m/t", 1))
    assert a == b
    assert compute_digest(a.encode()) == compute_digest(b.encode())


def test_io_schema_embedded():
    doc = generate_api_doc(
        "m/t", 2, io_schema={"input": {"type": "integer"}, "output": {"type": "integer"}}
    )
    schemas = doc["components"]["schemas"]
    assert schemas["PredictRequest"]["properties"]["input"] == {"type": "integer"}
    assert schemas["PredictResponse"]["properties"]["output"] == {"type": "integer"}
    validate_openapi(doc)


def test_unresolvable_reference_rejected():
    with pytest.raises(SchemaInvalid):
        generate_api_doc(
            "m/t", 1, io_schema={"input": {"$ref": "#/components/schemas/Ghost"}}
        )


def test_validator_structural_rules():
    good = generate_api_doc("m/t", 1)
    validate_openapi(good)

    for mutate in (
        lambda d: d.pop("openapi"),
        lambda d: d.pop("info"),
        lambda d: d["info"].pop("title"),
        lambda d: d.update(paths={}),
        lambda d: d["paths"]["/models/m/t/1/predict"]["post"].pop("responses"),
        lambda d: d["paths"].update({"no-slash": {"post": {"responses": {"200": {}}}}}),
    ):
        doc = json.loads(json.dumps(good))
        mutate(doc)
        with pytest.raises(SchemaInvalid):
            validate_openapi(doc)


def test_external_ref_rejected():
    doc = generate_api_doc("m/t", 1)
    doc["components"]["schemas"]["PredictRequest"]["properties"]["input"] = {
        "$ref": "http://elsewhere/schema.json"
    }
    with pytest.raises(SchemaInvalid):
        validate_openapi(doc)
