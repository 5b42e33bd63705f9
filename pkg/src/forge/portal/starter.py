"""Starter kit attached to every competition for download.

A minimal working submission: the manifest, a predict entrypoint that
implements the wire protocol over an identity model, and protocol notes.
Participants replace the model logic and team id, then pack and submit.
"""

from __future__ import annotations

import json

from forge.bundle.archive import pack_tree

PREDICT_SOURCE = '''\
#!/usr/bin/env python3
"""Reference predict entrypoint for the submission template.

Reads one JSON record per line from stdin, answers one JSON record per
line on stdout, and exits 0 at end of input. Replace load_model/predict
with your own logic; keep the I/O loop exactly as it is.
"""
import json
import sys


def load_model():
    with open("model_files/model.json", "r") as fh:
        return json.load(fh)


def predict(model, value):
    if model.get("op") == "constant":
        return model["value"]
    return value  # identity


def main():
    model = load_model()
    sys.stdout.write(json.dumps({"ready": True, "protocol": 1}) + "\\n")
    sys.stdout.flush()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            rid = record["id"]
            value = record["input"]
        except (json.JSONDecodeError, KeyError, TypeError):
            sys.exit(3)
        out = {"id": rid, "output": predict(model, value)}
        sys.stdout.write(json.dumps(out) + "\\n")
        sys.stdout.flush()
    sys.exit(0)


if __name__ == "__main__":
    main()
'''

TRAIN_SOURCE = '''\
#!/usr/bin/env python3
"""Optional train entrypoint: writes the model file the predictor loads."""
import json

with open("model_files/model.json", "w") as fh:
    json.dump({"op": "identity"}, fh)
'''

README_TEMPLATE = """\
# Submission starter kit — {competition_id}

Your submission is a ZIP archive with `manifest.json` at the root.

## Protocol (v1)

The platform launches your predict entrypoint and talks line-delimited
JSON over stdin/stdout:

1. Print exactly `{{"ready":true,"protocol":1}}` plus newline on stdout.
2. For every request line `{{"id":"<id>","input":<value>}}` reply with one
   line `{{"id":"<id>","output":<value>}}` carrying the same id, in order.
3. Answer the reserved health record (id `__health__`) like any other.
4. Exit 0 when stdin closes.

Answers must be deterministic for identical inputs; stderr is captured and
shown with your submission status.

## Files

- `manifest.json` — entrypoints, model files, declared dependencies.
  Set `team_id` to your team before packing.
- `predict.py` — working identity model; replace the logic, keep the loop.
- `train.py` — optional, declared for provenance; not run by the platform.
- `model_files/` — your model artifacts; list each file in the manifest.

Pack deterministically (sorted entries, zeroed timestamps) or use the
platform tooling so re-packing an unchanged tree re-produces the same
digest.
"""


def starter_manifest(competition_id: str, team_id: str = "example-team") -> dict:
    return {
        "schema_version": 1,
        "competition_id": competition_id,
        "team_id": team_id,
        "entrypoints": {
            "predict": ["python3", "predict.py"],
            "train": ["python3", "train.py"],
        },
        "model_files": ["model_files/model.json"],
        "declared_dependencies": [],
        "runtime_hint": "python3",
        "hyper_parameters": {"op": "identity"},
    }


def starter_files(competition_id: str, team_id: str = "example-team") -> dict[str, bytes]:
    return {
        "manifest.json": json.dumps(
            starter_manifest(competition_id, team_id), indent=2, sort_keys=True
        ).encode("utf-8"),
        "predict.py": PREDICT_SOURCE.encode("utf-8"),
        "train.py": TRAIN_SOURCE.encode("utf-8"),
        "model_files/model.json": json.dumps({"op": "identity"}).encode("utf-8"),
        "README.md": README_TEMPLATE.format(competition_id=competition_id).encode(
            "utf-8"
        ),
    }


def build_starter_bundle(competition_id: str, team_id: str = "example-team") -> bytes:
    return pack_tree(starter_files(competition_id, team_id))
