#!/usr/bin/env python3
"""Pack this template deterministically and submit it to a competition.

Standard library only, on purpose: participants should be able to submit
from any Python 3.10+ without installing anything. Talks to the platform
exclusively over its public HTTP API.

    python3 pack_and_submit.py --api-url http://host:8080 --token T \
        --competition toy --team my-team
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time
import urllib.error
import urllib.request
import uuid
import zipfile
from pathlib import Path

ZERO_TIME = (1980, 1, 1, 0, 0, 0)  # ZIP cannot represent earlier

TERMINAL = ("succeeded", "failed")


def pack_directory(directory: Path, competition_id: str, team_id: str | None) -> bytes:
    """Zip the tree with sorted entries and zeroed timestamps.

    The manifest copy gets competition_id (and optionally team_id)
    rewritten; everything else is byte-identical to the tree, so repacking
    an unchanged tree gives a byte-identical archive.
    """
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        sys.exit(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text("utf-8"))
    manifest["competition_id"] = competition_id
    if team_id:
        manifest["team_id"] = team_id

    files: dict[str, bytes] = {
        "manifest.json": json.dumps(manifest, indent=2, sort_keys=True).encode()
    }
    skip = {"pack_and_submit.py", "manifest.json"}
    for path in sorted(directory.rglob("*")):
        relative = path.relative_to(directory).as_posix()
        if not path.is_file() or relative in skip:
            continue
        if relative.startswith(("tests/", ".", "__pycache__/")) or "__pycache__" in relative:
            continue
        files[relative] = path.read_bytes()

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        for name in sorted(files):
            info = zipfile.ZipInfo(name, date_time=ZERO_TIME)
            info.create_system = 3
            info.external_attr = 0o644 << 16
            archive.writestr(info, files[name], zipfile.ZIP_DEFLATED, 9)
    return buffer.getvalue()


def _request(url: str, token: str, data: bytes | None = None, content_type: str | None = None):
    request = urllib.request.Request(url, data=data)
    request.add_header("Authorization", f"Bearer {token}")
    if content_type:
        request.add_header("Content-Type", content_type)
    try:
        with urllib.request.urlopen(request, timeout=60) as response:
            return json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as error:
        body = error.read().decode("utf-8", errors="replace")
        try:
            code = json.loads(body)["error"]["code"]
            message = json.loads(body)["error"]["message"]
        except (json.JSONDecodeError, KeyError):
            code, message = str(error.code), body[:200]
        sys.exit(f"API error {error.code} [{code}]: {message}")


def upload(api_url: str, token: str, competition_id: str, blob: bytes) -> dict:
    boundary = uuid.uuid4().hex
    body = (
        f"--{boundary}\r\n"
        'Content-Disposition: form-data; name="bundle"; filename="bundle.zip"\r\n'
        "Content-Type: application/zip\r\n\r\n"
    ).encode() + blob + f"\r\n--{boundary}--\r\n".encode()
    return _request(
        f"{api_url}/api/v1/competitions/{competition_id}/submissions",
        token,
        data=body,
        content_type=f"multipart/form-data; boundary={boundary}",
    )


def poll(api_url: str, token: str, submission_id: str, timeout_s: float) -> dict:
    deadline = time.time() + timeout_s
    while time.time() < deadline:
        record = _request(f"{api_url}/api/v1/submissions/{submission_id}", token)
        if record["status"] in TERMINAL:
            return record
        time.sleep(1.0)
    sys.exit(f"submission {submission_id} not terminal after {timeout_s:.0f}s")


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--api-url", required=True)
    parser.add_argument("--token", required=True)
    parser.add_argument("--competition", required=True)
    parser.add_argument("--team", default=None, help="overrides manifest team_id")
    parser.add_argument(
        "--dir", default=str(Path(__file__).parent), help="template directory"
    )
    parser.add_argument("--poll-timeout", type=float, default=300.0)
    args = parser.parse_args(argv)

    blob = pack_directory(Path(args.dir), args.competition, args.team)
    print(f"packed {len(blob)} bytes")
    record = upload(args.api_url.rstrip("/"), args.token, args.competition, blob)
    submission_id = record["eval_id"]
    print(f"submission id: {submission_id} (status: {record['status']})")

    final = poll(args.api_url.rstrip("/"), args.token, submission_id, args.poll_timeout)
    print(f"terminal status: {final['status']}")
    if final["status"] == "succeeded":
        print(f"metrics: {json.dumps(final['metrics'], sort_keys=True)}")
    else:
        print(f"error class: {final['error_class']}")
        if final.get("log_tail"):
            print(f"stderr tail:\n{final['log_tail']}")
        sys.exit(1)


if __name__ == "__main__":
    main()
