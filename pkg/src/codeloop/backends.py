"""Model backends: an OpenAI-compatible HTTP client and a scripted replay.

Both expose one operation, complete(conversation) -> CompletionResult, so
the episode loop never knows whether it is talking to a live endpoint or to
a recorded script.  API keys are read from the environment at request time
and never stored on the config.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Sequence

import requests

# --------------------------------------------------------------------------
# types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChatTurn:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass(frozen=True)
class LMConfig:
    endpoint: str = ""
    model_id: str = ""
    temperature: float = 0.5
    max_tokens: int = 4096
    api_key_env: str = "LM_API_KEY"
    request_timeout: float = 120.0
    max_retries: int = 3
    backoff_base: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    output_tokens: int
    latency: float
    tokens_estimated: bool = False


class BackendError(RuntimeError):
    """Base for everything a backend can fail with."""


class AuthError(BackendError):
    pass


class RateLimited(BackendError):
    pass


class BackendTimeout(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class ScriptExhausted(BackendError):
    """A replay script ran out of entries."""


def estimate_tokens(text: str) -> int:
    """Fallback token count when the endpoint reports no usage: bytes / 4,
    rounded up."""
    return math.ceil(len(text.encode("utf-8")) / 4)


# --------------------------------------------------------------------------
# HTTP backend
# --------------------------------------------------------------------------


class HTTPBackend:
    """Chat-completions client for any OpenAI-compatible endpoint."""

    def __init__(self, config: LMConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()

    def complete(self, conversation: Sequence[ChatTurn]) -> CompletionResult:
        cfg = self.config
        url = cfg.endpoint.rstrip("/") + "/chat/completions"
        payload = {
            "model": cfg.model_id,
            "messages": [{"role": t.role, "content": t.content} for t in conversation],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {}
        api_key = os.environ.get(cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: BackendError | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
            start = time.monotonic()
            try:
                resp = self._session.post(
                    url, json=payload, headers=headers, timeout=cfg.request_timeout
                )
            except requests.Timeout:
                last_error = BackendTimeout(f"no response within {cfg.request_timeout}s")
                continue
            except requests.RequestException as exc:
                last_error = BackendError(f"request failed: {exc}")
                continue
            latency = time.monotonic() - start

            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({resp.status_code})")
            if resp.status_code == 429:
                last_error = RateLimited("rate limited by endpoint")
                continue
            if resp.status_code >= 500:
                last_error = BackendError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise BackendError(f"unexpected status {resp.status_code}")

            try:
                data = resp.json()
                text = data["choices"][0]["message"]["content"]
            except (ValueError, LookupError, TypeError) as exc:
                raise MalformedResponse(f"cannot read completion: {exc}") from exc

            usage = data.get("usage") or {}
            tokens = usage.get("completion_tokens")
            if isinstance(tokens, int) and tokens >= 0:
                return CompletionResult(text, tokens, latency)
            return CompletionResult(text, estimate_tokens(text), latency, True)

        raise last_error if last_error else BackendError("no attempts made")


def complete(config: LMConfig, conversation: Sequence[ChatTurn]) -> CompletionResult:
    """One-shot convenience wrapper around HTTPBackend."""
    return HTTPBackend(config).complete(conversation)


# --------------------------------------------------------------------------
# replay backend
# --------------------------------------------------------------------------


@dataclass
class ReplayBackend:
    """Deterministic backend that pops scripted completions in order.

    Script entries are (text, output_tokens) or (text, output_tokens,
    latency).  Every conversation shown is recorded in ``calls`` so tests
    can assert on exact prompt bytes.
    """

    script: list[tuple]
    calls: list[list[ChatTurn]] = field(default_factory=list)
    _cursor: int = 0

    def complete(self, conversation: Sequence[ChatTurn]) -> CompletionResult:
        self.calls.append(list(conversation))
        if self._cursor >= len(self.script):
            raise ScriptExhausted(
                f"script ended after {len(self.script)} completions"
            )
        entry = self.script[self._cursor]
        self._cursor += 1
        text, tokens = entry[0], entry[1]
        latency = entry[2] if len(entry) > 2 else 0.0
        return CompletionResult(text, tokens, latency)
