#!/usr/bin/env python3
"""Reference predict entrypoint.

Replace load_model()/predict() with your own inference; keep main() as it
is — it implements the submission protocol the platform expects, in both
evaluation and serving.
"""

import json
import sys


def load_model():
    with open("model_files/model.json", "r") as fh:
        return json.load(fh)


def predict(model, value):
    """The actual model. The reference ships an identity/constant toy."""
    if model.get("op") == "constant":
        return model["value"]
    return value


def main():
    model = load_model()
    sys.stdout.write(json.dumps({"ready": True, "protocol": 1}) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            record_id = record["id"]
            value = record["input"]
        except (json.JSONDecodeError, KeyError, TypeError):
            # a malformed request means the platform and template disagree;
            # fail loudly rather than answer garbage
            sys.exit(3)
        response = {"id": record_id, "output": predict(model, value)}
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()
    sys.exit(0)


if __name__ == "__main__":
    main()
