"""Backend configuration and error types shared by every model service."""

from __future__ import annotations

from dataclasses import dataclass

BACKEND_KINDS = ("expert", "judge", "s2tt", "asr", "tts")


class BackendError(Exception):
    """Base class for backend transport and protocol failures."""


class Timeout(BackendError):
    """The backend did not answer within the configured timeout, retries exhausted."""


class RateLimited(BackendError):
    """The backend kept answering 429 after all retries."""


class MalformedResponse(BackendError):
    """The response does not match the chat-completion wire schema."""


class HttpError(BackendError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status


@dataclass(frozen=True)
class BackendConfig:
    """One model service endpoint: a translation expert, judge, S2TT, ASR, or TTS.

    ``endpoint`` is either a real base URL (requests go to
    ``{endpoint}/chat/completions``) or a ``mock:`` spec resolved to a
    deterministic in-process handler (see :mod:`emphst.backends.mock`).
    """

    id: str
    kind: str
    endpoint: str
    model: str
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 2
    rate_limit: float = 8.0

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("backend id must be non-empty")
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}, expected one of {BACKEND_KINDS}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")


@dataclass(frozen=True)
class PromptExchange:
    """One completed request/response round trip, including retry accounting."""

    system_prompt: str
    user_prompt: str
    response_text: str
    latency: float
    attempt_count: int
