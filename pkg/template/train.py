#!/usr/bin/env python3
"""Optional train entrypoint: (re)writes the model file predict.py loads.

The platform records that it exists but never runs it server-side; it is
here so the submission is a complete, reproducible unit.
"""

import json

with open("model_files/model.json", "w") as fh:
    json.dump({"op": "identity"}, fh)
    fh.write("\n")
