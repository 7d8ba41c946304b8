"""Client side of the kernel wire protocol.

The execution kernel is a separate worker process holding the persistent
Python namespace.  Messages are length-prefixed JSON over the worker's
stdio: a 4-byte big-endian length, then the UTF-8 payload.  Every message
carries the protocol version.  Request fields: op, cell_name, source,
var_name.  Response fields: status, stdout, error_trace, duration,
peak_memory.

The client owns process lifecycle: it spawns the worker, kills and
restarts it when a request misses its deadline (plus a short grace), and
surfaces WorkerDead when the process disappears mid-request.
"""

from __future__ import annotations

import json
import os
import select
import struct
import subprocess
import sys
import time
from dataclasses import dataclass
from typing import BinaryIO

PROTOCOL_VERSION = "1"

# extra seconds allowed for the worker's own cooperative timeout to answer
KILL_GRACE = 0.2

OPS = ("execute", "resolve_var", "reset", "shutdown")
STATUSES = ("ok", "error", "interrupted")


class WorkerDead(RuntimeError):
    """The worker process vanished while a request was in flight."""


@dataclass(frozen=True)
class ExecRequest:
    op: str
    cell_name: str = ""
    source: str = ""
    var_name: str = ""

    def to_wire(self) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "op": self.op,
            "cell_name": self.cell_name,
            "source": self.source,
            "var_name": self.var_name,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "ExecRequest":
        return cls(
            op=obj["op"],
            cell_name=obj.get("cell_name", ""),
            source=obj.get("source", ""),
            var_name=obj.get("var_name", ""),
        )


@dataclass(frozen=True)
class ExecResponse:
    status: str
    stdout: str = ""
    error_trace: str = ""
    duration: float = 0.0
    peak_memory: int = 0

    def to_wire(self) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "status": self.status,
            "stdout": self.stdout,
            "error_trace": self.error_trace,
            "duration": self.duration,
            "peak_memory": self.peak_memory,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "ExecResponse":
        return cls(
            status=obj["status"],
            stdout=obj.get("stdout", ""),
            error_trace=obj.get("error_trace", ""),
            duration=obj.get("duration", 0.0),
            peak_memory=obj.get("peak_memory", 0),
        )


# --------------------------------------------------------------------------
# framing
# --------------------------------------------------------------------------


def write_frame(stream: BinaryIO, obj: dict) -> None:
    payload = json.dumps(obj, ensure_ascii=False).encode("utf-8")
    stream.write(struct.pack(">I", len(payload)) + payload)
    stream.flush()


def read_frame(stream: BinaryIO) -> dict:
    """Blocking frame read; raises EOFError on a closed stream."""
    header = _read_exact(stream, 4)
    (length,) = struct.unpack(">I", header)
    return json.loads(_read_exact(stream, length).decode("utf-8"))


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = b""
    while len(chunks) < n:
        chunk = stream.read(n - len(chunks))
        if not chunk:
            raise EOFError("stream closed mid-frame")
        chunks += chunk
    return chunks


def _read_exact_fd(fd: int, n: int, deadline: float | None) -> bytes:
    chunks = b""
    while len(chunks) < n:
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("frame read deadline passed")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise TimeoutError("frame read deadline passed")
        chunk = os.read(fd, n - len(chunks))
        if not chunk:
            raise EOFError("worker closed its stdout")
        chunks += chunk
    return chunks


# --------------------------------------------------------------------------
# client
# --------------------------------------------------------------------------


def default_worker_command() -> list[str]:
    return [sys.executable, "-u", "-m", "codeloop_kernel"]


class KernelClient:
    """Spawns and talks to one kernel worker over stdio frames."""

    def __init__(
        self,
        command: list[str] | None = None,
        per_cell_timeout: float = 60.0,
        memory_cap_mb: int = 500,
    ):
        self.command = list(command) if command else default_worker_command()
        self.per_cell_timeout = per_cell_timeout
        self.memory_cap_mb = memory_cap_mb
        self._proc: subprocess.Popen | None = None
        self.restarts = 0

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        cmd = self.command + [
            "--timeout", str(self.per_cell_timeout),
            "--memory-cap-mb", str(self.memory_cap_mb),
        ]
        self._proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )

    def kill(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def restart(self) -> None:
        self.kill()
        self.restarts += 1
        self.start()

    def close(self) -> None:
        if self._proc is None:
            return
        if self._proc.poll() is None:
            try:
                self._request(ExecRequest(op="shutdown"), deadline=time.monotonic() + 2)
            except (WorkerDead, TimeoutError):
                pass
        self.kill()

    @property
    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    # -- requests ----------------------------------------------------------

    def _request(self, request: ExecRequest, deadline: float | None) -> ExecResponse:
        if not self.alive:
            self.start()
        proc = self._proc
        assert proc is not None and proc.stdin and proc.stdout
        try:
            write_frame(proc.stdin, request.to_wire())
            fd = proc.stdout.fileno()
            header = _read_exact_fd(fd, 4, deadline)
            (length,) = struct.unpack(">I", header)
            payload = _read_exact_fd(fd, length, deadline)
        except (BrokenPipeError, EOFError) as exc:
            self.kill()
            raise WorkerDead(str(exc)) from exc
        return ExecResponse.from_wire(json.loads(payload.decode("utf-8")))

    def execute(self, cell_name: str, source: str, timeout: float | None = None) -> ExecResponse:
        """Run one cell.  If the worker misses the deadline (its own
        cooperative timeout plus grace) it is killed and restarted, and the
        cell reports as interrupted with a fresh namespace upstream."""
        wait = min(timeout, self.per_cell_timeout) if timeout else self.per_cell_timeout
        deadline = time.monotonic() + wait + KILL_GRACE
        start = time.monotonic()
        try:
            return self._request(
                ExecRequest(op="execute", cell_name=cell_name, source=source),
                deadline,
            )
        except TimeoutError:
            self.restart()
            return ExecResponse(
                status="interrupted",
                stdout="",
                error_trace=(
                    f"Time limit exceeded: cell ran longer than {wait:g} seconds"
                ),
                duration=time.monotonic() - start,
            )

    def resolve_var(self, var_name: str, timeout: float = 10.0) -> ExecResponse:
        return self._request(
            ExecRequest(op="resolve_var", var_name=var_name),
            time.monotonic() + timeout,
        )

    def reset(self, timeout: float = 30.0) -> ExecResponse:
        return self._request(ExecRequest(op="reset"), time.monotonic() + timeout)

    def __enter__(self) -> "KernelClient":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
