"""Persistent sandboxed Python worker.

One worker process holds one interpreter namespace and serves requests
over stdio: a 4-byte big-endian length prefix, then a UTF-8 JSON payload.
Requests carry op ("execute" | "resolve_var" | "reset" | "shutdown"),
cell_name, source, var_name; responses carry status ("ok" | "error" |
"interrupted"), stdout, error_trace, duration, peak_memory.  Every frame
includes the protocol version.

Cells run in a namespace preloaded with a fixed library set and a guarded
``__import__`` that rejects everything else.  Two resource guards watch
each cell: a wall-clock alarm that raises inside the running code, and a
memory watchdog thread that injects an interrupt into the main thread
when process RSS passes the cap.  Both are cooperative; code that swallows
BaseException can outlive them, which is why the parent client enforces a
hard kill deadline of its own.
"""

from __future__ import annotations

import ctypes
import io
import json
import os
import signal
import struct
import sys
import threading
import time
import traceback
from typing import BinaryIO

PROTOCOL_VERSION = "1"

STDOUT_CAP_BYTES = 1 << 20
MEMORY_POLL_SECS = 0.02
# bounded wait for an injected interrupt to surface after the cell ends
INJECT_SETTLE_SECS = 1.0

# mirrors the library block the orchestrator advertises to the model
PRELOAD_SOURCE = """\
import collections
import copy
from enum import Enum
import itertools
import json
import math
import random
import re
import string
from typing import *

import numpy as np
import scipy
import sympy as sp
"""

ALLOWED_IMPORT_ROOTS = frozenset(
    {
        "collections",
        "copy",
        "enum",
        "itertools",
        "json",
        "math",
        "random",
        "re",
        "string",
        "typing",
        "numpy",
        "scipy",
        "sympy",
    }
)


class TimeoutInterrupt(BaseException):
    """Raised inside cell code when the per-cell alarm fires."""


class MemoryInterrupt(BaseException):
    """Injected into cell code when process RSS passes the cap."""


# --------------------------------------------------------------------------
# framing
# --------------------------------------------------------------------------


def write_frame(stream: BinaryIO, obj: dict) -> None:
    payload = json.dumps(obj, ensure_ascii=False).encode("utf-8")
    stream.write(struct.pack(">I", len(payload)) + payload)
    stream.flush()


def read_frame(stream: BinaryIO) -> dict:
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


# --------------------------------------------------------------------------
# sandboxed namespace
# --------------------------------------------------------------------------

_real_import = __import__


def _guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
    root = name.split(".")[0]
    if level == 0 and root not in ALLOWED_IMPORT_ROOTS:
        raise ImportError(
            f"import of '{name}' is not allowed: only the preloaded "
            "libraries are available"
        )
    return _real_import(name, globals, locals, fromlist, level)


def _cell_builtins() -> dict:
    import builtins

    table = dict(vars(builtins))
    table["__import__"] = _guarded_import
    return table


def build_namespace() -> dict:
    """Fresh cell namespace holding exactly the preloaded names."""
    namespace: dict = {"__builtins__": _cell_builtins()}
    exec(PRELOAD_SOURCE, namespace)
    return namespace


class CappedWriter(io.TextIOBase):
    """Text sink that stops keeping data past a byte budget.

    Writes always succeed so printing code never breaks; only retention
    is capped.  There is deliberately no ``buffer`` attribute, so cell
    code cannot reach the real stdout behind the frames.
    """

    def __init__(self, cap_bytes: int = STDOUT_CAP_BYTES):
        self.cap_bytes = cap_bytes
        self.truncated = False
        self._chunks: list[str] = []
        self._size = 0

    def writable(self) -> bool:
        return True

    def write(self, text: str) -> int:
        if not self.truncated:
            data = str(text).encode("utf-8", "replace")
            room = self.cap_bytes - self._size
            if len(data) <= room:
                self._chunks.append(str(text))
                self._size += len(data)
            else:
                self._chunks.append(data[:room].decode("utf-8", "ignore"))
                self._size = self.cap_bytes
                self.truncated = True
        return len(text)

    def value(self) -> str:
        return "".join(self._chunks)


# --------------------------------------------------------------------------
# resource guards
# --------------------------------------------------------------------------

_PAGE_SIZE = os.sysconf("SC_PAGE_SIZE") if hasattr(os, "sysconf") else 4096

_set_async_exc = ctypes.pythonapi.PyThreadState_SetAsyncExc
_set_async_exc.argtypes = (ctypes.c_ulong, ctypes.py_object)
_set_async_exc.restype = ctypes.c_int


def rss_bytes() -> int:
    """Current resident set size of this process."""
    try:
        with open("/proc/self/statm", encoding="ascii") as f:
            return int(f.read().split()[1]) * _PAGE_SIZE
    except (OSError, IndexError, ValueError):
        import resource

        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


class MemoryWatchdog:
    """Samples RSS on a side thread; injects one MemoryInterrupt at cap."""

    def __init__(self, cap_bytes: int, main_thread_id: int):
        self.cap_bytes = cap_bytes
        self.main_thread_id = main_thread_id
        self.peak = rss_bytes()
        self.fired = False
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=1.0)

    def _run(self) -> None:
        while not self._stop.wait(MEMORY_POLL_SECS):
            rss = rss_bytes()
            if rss > self.peak:
                self.peak = rss
            if rss > self.cap_bytes and not self.fired:
                self.fired = True
                _set_async_exc(
                    ctypes.c_ulong(self.main_thread_id),
                    ctypes.py_object(MemoryInterrupt),
                )


def _alarm(signum, frame):
    raise TimeoutInterrupt()


# --------------------------------------------------------------------------
# worker
# --------------------------------------------------------------------------


class KernelWorker:
    def __init__(self, timeout: float = 60.0, memory_cap_mb: int = 500):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        if memory_cap_mb <= 0:
            raise ValueError("memory cap must be positive")
        self.timeout = timeout
        self.memory_cap_mb = memory_cap_mb
        self.namespace = build_namespace()

    # -- request handling --------------------------------------------------

    def handle(self, request: dict) -> dict:
        if request.get("version") != PROTOCOL_VERSION:
            return self._response(
                "error",
                error_trace=(
                    f"unsupported protocol version {request.get('version')!r}"
                ),
            )
        op = request.get("op")
        if op == "execute":
            return self.execute(request.get("cell_name", ""), request.get("source", ""))
        if op == "resolve_var":
            return self.resolve_var(request.get("var_name", ""))
        if op == "reset":
            self.namespace = build_namespace()
            return self._response("ok")
        if op == "shutdown":
            return self._response("ok")
        return self._response("error", error_trace=f"unknown op {op!r}")

    def execute(self, cell_name: str, source: str) -> dict:
        try:
            code = compile(source, f"<cell {cell_name}>", "exec")
        except SyntaxError:
            return self._response("error", error_trace=traceback.format_exc(limit=0))

        capture = CappedWriter()
        watchdog = MemoryWatchdog(
            self.memory_cap_mb * 1024 * 1024, threading.main_thread().ident or 0
        )
        old_stdout, old_stdin = sys.stdout, sys.stdin
        sys.stdout, sys.stdin = capture, io.StringIO("")
        old_alarm = signal.signal(signal.SIGALRM, _alarm)
        status, error_trace = "ok", ""
        start = time.monotonic()
        watchdog.start()
        signal.setitimer(signal.ITIMER_REAL, self.timeout)
        try:
            try:
                exec(code, self.namespace)
            finally:
                signal.setitimer(signal.ITIMER_REAL, 0.0)
                watchdog.stop()
                # a fired watchdog may not have delivered yet: run bytecode
                # here until the injected interrupt lands (or give up)
                if watchdog.fired and not isinstance(
                    sys.exc_info()[1], MemoryInterrupt
                ):
                    end = time.monotonic() + INJECT_SETTLE_SECS
                    while time.monotonic() < end:
                        pass
        except MemoryInterrupt:
            status = "interrupted"
            error_trace = (
                f"Memory limit exceeded: usage grew beyond {self.memory_cap_mb}MB"
            )
        except TimeoutInterrupt:
            status = "interrupted"
            error_trace = (
                f"Time limit exceeded: cell ran longer than {self.timeout:g} seconds"
            )
        except BaseException as exc:
            status = "error"
            error_trace = self._format_cell_traceback(exc)
        finally:
            signal.setitimer(signal.ITIMER_REAL, 0.0)
            signal.signal(signal.SIGALRM, old_alarm)
            sys.stdout, sys.stdin = old_stdout, old_stdin
        return self._response(
            status,
            stdout=capture.value(),
            error_trace=error_trace,
            duration=time.monotonic() - start,
            peak_memory=watchdog.peak,
        )

    def resolve_var(self, var_name: str) -> dict:
        if var_name not in self.namespace:
            return self._response(
                "error", error_trace=f"name '{var_name}' is not defined"
            )
        value = self.namespace[var_name]
        if not isinstance(value, str):
            return self._response(
                "error",
                error_trace=(
                    f"variable '{var_name}' is {type(value).__name__}, not a string"
                ),
            )
        return self._response("ok", stdout=value)

    @staticmethod
    def _format_cell_traceback(exc: BaseException) -> str:
        # hide this module's frames (the exec call, the import guard) so
        # the trace reads as if the cell ran top-level
        te = traceback.TracebackException.from_exception(exc)
        chain: traceback.TracebackException | None = te
        while chain is not None:
            chain.stack = traceback.StackSummary.from_list(
                [f for f in chain.stack if f.filename != __file__]
            )
            chain = chain.__cause__ or chain.__context__
        return "".join(te.format())

    @staticmethod
    def _response(
        status: str,
        stdout: str = "",
        error_trace: str = "",
        duration: float = 0.0,
        peak_memory: int = 0,
    ) -> dict:
        return {
            "version": PROTOCOL_VERSION,
            "status": status,
            "stdout": stdout,
            "error_trace": error_trace,
            "duration": duration,
            "peak_memory": peak_memory,
        }

    # -- serving -----------------------------------------------------------

    def serve(self, stdin: BinaryIO | None = None, stdout: BinaryIO | None = None) -> None:
        """Answer frames until shutdown or the request stream closes."""
        stdin = stdin if stdin is not None else sys.stdin.buffer
        stdout = stdout if stdout is not None else sys.stdout.buffer
        while True:
            try:
                request = read_frame(stdin)
            except EOFError:
                return
            response = self.handle(request)
            write_frame(stdout, response)
            if request.get("op") == "shutdown" and response["status"] == "ok":
                return


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="codeloop-kernel",
        description="sandboxed cell-execution worker speaking stdio frames",
    )
    parser.add_argument("--timeout", type=float, default=60.0)
    parser.add_argument("--memory-cap-mb", type=int, default=500)
    args = parser.parse_args(argv)
    try:
        worker = KernelWorker(timeout=args.timeout, memory_cap_mb=args.memory_cap_mb)
    except Exception as exc:  # preload or argument failure: diagnose and exit
        print(f"worker startup failed: {exc}", file=sys.stderr)
        return 1
    worker.serve()
    return 0
