"""Sandboxed persistent Python kernel worker."""

from .worker import (
    ALLOWED_IMPORT_ROOTS,
    PROTOCOL_VERSION,
    STDOUT_CAP_BYTES,
    KernelWorker,
    MemoryInterrupt,
    TimeoutInterrupt,
    build_namespace,
    main,
    read_frame,
    write_frame,
)

__all__ = [
    "ALLOWED_IMPORT_ROOTS",
    "PROTOCOL_VERSION",
    "STDOUT_CAP_BYTES",
    "KernelWorker",
    "MemoryInterrupt",
    "TimeoutInterrupt",
    "build_namespace",
    "main",
    "read_frame",
    "write_frame",
]
