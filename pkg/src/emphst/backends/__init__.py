"""Pluggable model backends over one chat-completion wire format, plus mocks."""

from emphst.backends.config import (  # noqa: F401
    BACKEND_KINDS,
    BackendConfig,
    BackendError,
    HttpError,
    MalformedResponse,
    PromptExchange,
    RateLimited,
    Timeout,
)
from emphst.backends.client import (  # noqa: F401
    ChatClient,
    Clock,
    HttpTransport,
    MockTransport,
    RateLimiter,
    RealClock,
    TransportFailure,
    VirtualClock,
    api_key_env_var,
    clear_mocks,
    complete,
    register_mock,
    resolve_transport,
    unregister_mock,
)
from emphst.backends.mock import (  # noqa: F401
    MockLexicon,
    OutOfVocabulary,
    echo_handler,
    failing_handler,
    mock_judge,
    mock_translate,
)
