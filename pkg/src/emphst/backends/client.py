"""Chat-completion client: transports, retries with jittered backoff, rate limiting.

All model services (experts, judges, S2TT, ASR, TTS) speak the same wire
format: POST ``{endpoint}/chat/completions`` with a ``messages`` array, reply
with ``choices[0].message.content``. Audio never travels over this channel;
requests and responses carry file paths or tokens instead.

Credentials come from the environment only: ``EMPHST_API_KEY_<ID>`` where
``<ID>`` is the backend id uppercased with non-alphanumerics mapped to ``_``.
"""

from __future__ import annotations

import math
import os
import random
import re
import threading
import time
from collections import deque
from typing import Callable, Protocol

import httpx

from emphst.backends.config import (
    BackendConfig,
    HttpError,
    MalformedResponse,
    PromptExchange,
    RateLimited,
    Timeout,
)

BACKOFF_BASE = 0.25
BACKOFF_FACTOR = 2.0


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class RealClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock:
    """Manually advanced clock; sleep() jumps time forward. For tests."""

    def __init__(self, start: float = 0.0):
        self._t = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def sleep(self, seconds: float) -> None:
        with self._lock:
            self._t += max(0.0, seconds)

    def advance(self, seconds: float) -> None:
        self.sleep(seconds)


class RateLimiter:
    """Sliding-window limiter: at most ``capacity`` sends in any ``window`` seconds.

    For rate >= 1 the window is one second and capacity floor(rate), so the
    configured requests-per-second bound holds over every one-second window.
    For fractional rates below 1 the window stretches to 1/rate (one request
    per 1/rate seconds).
    """

    def __init__(self, rate: float, clock: Clock):
        if rate >= 1.0:
            self.capacity = math.floor(rate)
            self.window = 1.0
        else:
            self.capacity = 1
            self.window = 1.0 / rate
        self._clock = clock
        self._sent: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock.now()
                while self._sent and self._sent[0] <= now - self.window:
                    self._sent.popleft()
                if len(self._sent) < self.capacity:
                    self._sent.append(now)
                    return
                wait = self._sent[0] + self.window - now
            self._clock.sleep(wait + 1e-9)


class TransportFailure(Exception):
    """Raised by transports for timeouts and connection-level failures (retryable)."""


class Transport(Protocol):
    def send(self, config: BackendConfig, request: dict) -> tuple[int, object]:
        """Return (status, parsed JSON body). Raise TransportFailure on timeout."""
        ...


def api_key_env_var(backend_id: str) -> str:
    return "EMPHST_API_KEY_" + re.sub(r"[^A-Z0-9]", "_", backend_id.upper())


class HttpTransport:
    def __init__(self, client: httpx.Client | None = None):
        self._client = client or httpx.Client()

    def send(self, config: BackendConfig, request: dict) -> tuple[int, object]:
        url = config.endpoint.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(api_key_env_var(config.id))
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            response = self._client.post(url, json=request, headers=headers, timeout=config.timeout)
        except httpx.TimeoutException as exc:
            raise TransportFailure(f"timeout after {config.timeout}s: {exc}") from exc
        except httpx.TransportError as exc:
            raise TransportFailure(str(exc)) from exc
        try:
            body = response.json()
        except ValueError:
            body = None
        return response.status_code, body


# Handlers registered by tests (and by mock: endpoints) under a backend id.
# A handler takes the request JSON and returns response content (str), a full
# response body (dict), or raises TransportFailure / HttpError.
MockHandler = Callable[[dict], object]

_mock_registry: dict[str, MockHandler] = {}
_registry_lock = threading.Lock()


def register_mock(backend_id: str, handler: MockHandler) -> None:
    with _registry_lock:
        _mock_registry[backend_id] = handler


def unregister_mock(backend_id: str) -> None:
    with _registry_lock:
        _mock_registry.pop(backend_id, None)


def clear_mocks() -> None:
    with _registry_lock:
        _mock_registry.clear()


class MockTransport:
    def __init__(self, handler: MockHandler):
        self._handler = handler

    def send(self, config: BackendConfig, request: dict) -> tuple[int, object]:
        result = self._handler(request)
        if isinstance(result, str):
            return 200, {"choices": [{"message": {"role": "assistant", "content": result}}]}
        return 200, result


_http_transport: HttpTransport | None = None


def resolve_transport(config: BackendConfig) -> Transport:
    global _http_transport
    with _registry_lock:
        handler = _mock_registry.get(config.id)
    if handler is not None:
        return MockTransport(handler)
    if config.endpoint.startswith("mock:"):
        from emphst.backends.mock import handler_for_endpoint

        return MockTransport(handler_for_endpoint(config))
    if _http_transport is None:
        _http_transport = HttpTransport()
    return _http_transport


def _extract_content(body: object) -> str:
    if not isinstance(body, dict):
        raise MalformedResponse(f"response body is not a JSON object: {body!r}")
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse(f"missing choices[0].message.content in {body!r}") from None
    if not isinstance(content, str):
        raise MalformedResponse(f"message content is not a string: {content!r}")
    return content


class ChatClient:
    """Shared, thread-safe entry point for chat completions.

    Retries transport failures and 429/5xx responses with full-jitter
    exponential backoff (base 0.25 s, factor 2), never more than
    ``config.max_retries`` retries, and keeps every backend under its
    configured rate limit.
    """

    def __init__(
        self,
        clock: Clock | None = None,
        rng: random.Random | None = None,
        transport: Transport | None = None,
    ):
        self._clock = clock or RealClock()
        self._rng = rng or random.Random()
        self._transport = transport
        self._limiters: dict[str, RateLimiter] = {}
        self._lock = threading.Lock()

    def _limiter(self, config: BackendConfig) -> RateLimiter:
        with self._lock:
            limiter = self._limiters.get(config.id)
            if limiter is None:
                limiter = RateLimiter(config.rate_limit, self._clock)
                self._limiters[config.id] = limiter
            return limiter

    def complete(self, config: BackendConfig, system: str, user: str) -> PromptExchange:
        transport = self._transport or resolve_transport(config)
        limiter = self._limiter(config)
        request = {
            "model": config.model,
            "temperature": config.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        started = self._clock.now()
        attempt = 0
        while True:
            attempt += 1
            limiter.acquire()
            failure: Exception | None = None
            try:
                status, body = transport.send(config, request)
            except TransportFailure as exc:
                failure = Timeout(f"{config.id}: {exc}")
            else:
                if status == 200:
                    content = _extract_content(body)
                    return PromptExchange(
                        system_prompt=system,
                        user_prompt=user,
                        response_text=content,
                        latency=self._clock.now() - started,
                        attempt_count=attempt,
                    )
                if status == 429:
                    failure = RateLimited(f"{config.id}: rate limited by server")
                elif 500 <= status <= 599:
                    failure = HttpError(status, f"server error from {config.id}")
                else:
                    raise HttpError(status, f"non-retryable response from {config.id}")
            if attempt > config.max_retries:
                raise failure
            delay = self._rng.uniform(0.0, BACKOFF_BASE * BACKOFF_FACTOR ** (attempt - 1))
            self._clock.sleep(delay)


_default_client = ChatClient()


def complete(config: BackendConfig, system: str, user: str) -> PromptExchange:
    """Module-level convenience wrapper over a shared :class:`ChatClient`."""
    return _default_client.complete(config, system, user)
