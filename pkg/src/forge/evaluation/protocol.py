"""The predict wire protocol: line-delimited JSON over a child's stdio.

One protocol serves both contexts: batch evaluation and resident model
serving. The exchange is strictly sequential — the platform writes one
request line and waits for exactly one response line with the same id.

    child -> {"ready":true,"protocol":1}\n        (within the startup timeout)
    plat  -> {"id":"<id>","input":<value>}\n
    child -> {"id":"<id>","output":<value>}\n     (same id, within the record timeout)
    ...
    plat closes stdin; child exits 0.

stderr is drained on a thread and kept up to a byte cap.
"""

from __future__ import annotations

import json
import os
import queue
import resource
import signal
import subprocess
import threading
import time
from pathlib import Path
from typing import Any

PROTOCOL_VERSION = 1
READY_LINE = {"ready": True, "protocol": PROTOCOL_VERSION}

HEALTH_RECORD_ID = "__health__"

_EOF = object()


class WireError(Exception):
    """Base for protocol-level failures; carries no platform error code."""


class ReadyTimeout(WireError):
    pass


class RecordTimeout(WireError):
    pass


class WireViolation(WireError):
    pass


class ProcessExited(WireError):
    def __init__(self, returncode: int | None):
        super().__init__(f"model process exited with code {returncode}")
        self.returncode = returncode


def _limit_preexec(max_memory_bytes: int | None, cpu_seconds: int | None, uid: int | None):
    def apply():
        os.setsid()
        if uid is not None:
            os.setgroups([])
            os.setgid(uid)
            os.setuid(uid)
        if max_memory_bytes:
            resource.setrlimit(resource.RLIMIT_AS, (max_memory_bytes, max_memory_bytes))
        if cpu_seconds:
            resource.setrlimit(resource.RLIMIT_CPU, (cpu_seconds, cpu_seconds))
        resource.setrlimit(resource.RLIMIT_CORE, (0, 0))

    return apply


class ModelProcess:
    """A child process speaking the predict protocol, with stdio plumbing.

    ``sandbox_uid`` drops the child to an unprivileged user (requires the
    platform itself to run as root); combined with rlimits this is the v1
    process sandbox.
    """

    def __init__(
        self,
        argv: list[str],
        cwd: str | Path,
        *,
        env: dict[str, str] | None = None,
        max_memory_bytes: int | None = None,
        cpu_seconds: int | None = None,
        sandbox_uid: int | None = None,
        stderr_cap: int = 1024 * 1024,
    ):
        self.argv = argv
        self.cwd = str(cwd)
        self.env = env if env is not None else {}
        self.max_memory_bytes = max_memory_bytes
        self.cpu_seconds = cpu_seconds
        self.sandbox_uid = sandbox_uid
        self.stderr_cap = stderr_cap
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._stderr_chunks: list[bytes] = []
        self._stderr_len = 0
        self._stderr_lock = threading.Lock()
        self._readers: list[threading.Thread] = []

    def start(self) -> None:
        self._proc = subprocess.Popen(
            self.argv,
            cwd=self.cwd,
            env=self.env,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            preexec_fn=_limit_preexec(
                self.max_memory_bytes, self.cpu_seconds, self.sandbox_uid
            ),
        )
        self._readers = [
            threading.Thread(target=self._read_stdout, daemon=True),
            threading.Thread(target=self._read_stderr, daemon=True),
        ]
        for reader in self._readers:
            reader.start()

    def _read_stdout(self) -> None:
        assert self._proc is not None and self._proc.stdout is not None
        for raw in self._proc.stdout:
            self._lines.put(raw)
        self._lines.put(_EOF)

    def _read_stderr(self) -> None:
        assert self._proc is not None and self._proc.stderr is not None
        while True:
            chunk = self._proc.stderr.read(65536)
            if not chunk:
                break
            with self._stderr_lock:
                if self._stderr_len < self.stderr_cap:
                    keep = chunk[: self.stderr_cap - self._stderr_len]
                    self._stderr_chunks.append(keep)
                    self._stderr_len += len(keep)

    def stderr_bytes(self) -> bytes:
        with self._stderr_lock:
            return b"".join(self._stderr_chunks)

    def drain(self, timeout: float = 2.0) -> None:
        """Join the pipe readers (call after exit/kill so stderr is complete)."""
        deadline = time.monotonic() + timeout
        for reader in self._readers:
            reader.join(max(deadline - time.monotonic(), 0.01))

    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def returncode(self) -> int | None:
        return self._proc.poll() if self._proc else None

    def _next_line(self, timeout: float, timeout_exc: type[WireError]):
        try:
            item = self._lines.get(timeout=max(timeout, 0.001))
        except queue.Empty:
            raise timeout_exc(f"no line within {timeout:.3f}s")
        if item is _EOF:
            raise ProcessExited(self._wait_quietly())
        return item

    def _wait_quietly(self, timeout: float = 5.0) -> int | None:
        try:
            return self._proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            return self._proc.poll()

    def wait_ready(self, timeout: float) -> None:
        """Consume the ready line; anything else is a violation."""
        raw = self._next_line(timeout, ReadyTimeout)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise WireViolation(f"bad ready line: {raw[:120]!r}")
        if obj != READY_LINE:
            raise WireViolation(f"unexpected ready line: {obj!r}")

    def request(self, record_id: str, value: Any, timeout: float) -> Any:
        """Send one record and read its response; strict id matching."""
        assert self._proc is not None and self._proc.stdin is not None
        line = json.dumps({"id": record_id, "input": value}) + "\n"
        try:
            self._proc.stdin.write(line.encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise ProcessExited(self._wait_quietly())
        raw = self._next_line(timeout, RecordTimeout)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise WireViolation(f"response is not a JSON line: {raw[:120]!r}")
        if not isinstance(obj, dict) or set(obj) != {"id", "output"}:
            raise WireViolation(f"response must be {{id, output}}: {obj!r}")
        if obj["id"] != record_id:
            raise WireViolation(
                f"out-of-order response: sent id {record_id!r}, got {obj['id']!r}"
            )
        return obj["output"]

    def finish(self, timeout: float = 10.0) -> int:
        """Close stdin and wait for a clean exit."""
        assert self._proc is not None
        if self._proc.stdin:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            return self._proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            self.kill()
            return self._proc.wait(timeout=5.0)

    def kill(self) -> None:
        if self._proc is None or self._proc.poll() is not None:
            return
        try:
            os.killpg(os.getpgid(self._proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            try:
                self._proc.kill()
            except ProcessLookupError:
                pass
        self._wait_quietly()

    def killed_by_resource_signal(self) -> bool:
        rc = self.returncode()
        return rc is not None and -rc in (signal.SIGXCPU, signal.SIGKILL)
