import threading

import httpx
import pytest

from emphst.backends import (
    BackendConfig,
    ChatClient,
    HttpError,
    HttpTransport,
    MalformedResponse,
    MockLexicon,
    MockTransport,
    OutOfVocabulary,
    RateLimited,
    RateLimiter,
    Timeout,
    TransportFailure,
    VirtualClock,
    api_key_env_var,
    clear_mocks,
    echo_handler,
    failing_handler,
    mock_judge,
    mock_translate,
    register_mock,
)
from emphst.markup import EmphasisTaggedText, TagDialect, parse, render

MD = TagDialect.MARKDOWN


def config(backend_id="b1", **overrides):
    defaults = dict(
        id=backend_id,
        kind="expert",
        endpoint="mock:echo",
        model="test-model",
        temperature=0.0,
        timeout=5.0,
        max_retries=2,
        rate_limit=100.0,
    )
    defaults.update(overrides)
    return BackendConfig(**defaults)


class ScriptedTransport:
    """Plays back a list of outcomes: int status (with ok body), 'fail', or dict body."""

    def __init__(self, outcomes, content="ok"):
        self.outcomes = list(outcomes)
        self.calls = 0
        self.content = content

    def send(self, cfg, request):
        self.calls += 1
        outcome = self.outcomes.pop(0) if self.outcomes else 200
        if outcome == "fail":
            raise TransportFailure("scripted failure")
        if isinstance(outcome, dict):
            return 200, outcome
        if outcome == 200:
            return 200, {"choices": [{"message": {"content": self.content}}]}
        return outcome, {"error": "scripted"}


def client(transport=None):
    return ChatClient(clock=VirtualClock(), transport=transport)


class TestConfigValidation:
    def test_temperature_range(self):
        with pytest.raises(ValueError):
            config(temperature=2.5)

    def test_kind(self):
        with pytest.raises(ValueError):
            config(kind="oracle")

    def test_positive_rate_limit(self):
        with pytest.raises(ValueError):
            config(rate_limit=0)


class TestComplete:
    def test_echo_mock(self):
        clear_mocks()
        register_mock("echo-1", echo_handler)
        try:
            exchange = client().complete(config("echo-1"), "", "ping")
        finally:
            clear_mocks()
        assert exchange.response_text == "ping"
        assert exchange.attempt_count == 1

    def test_mock_endpoint_scheme(self):
        exchange = client().complete(config(endpoint="mock:echo"), "sys", "hello")
        assert exchange.response_text == "hello"

    def test_retry_then_success(self):
        transport = ScriptedTransport(["fail", "fail", 200])
        exchange = client(transport).complete(config(max_retries=3), "", "x")
        assert exchange.attempt_count == 3
        assert transport.calls == 3

    def test_timeout_after_retries_exhausted(self):
        transport = ScriptedTransport(["fail"] * 10)
        with pytest.raises(Timeout):
            client(transport).complete(config(max_retries=1), "", "x")
        assert transport.calls == 2

    def test_rate_limited_after_retries(self):
        transport = ScriptedTransport([429] * 10)
        with pytest.raises(RateLimited):
            client(transport).complete(config(max_retries=2), "", "x")
        assert transport.calls == 3

    def test_server_errors_retried(self):
        transport = ScriptedTransport([500, 503, 200])
        exchange = client(transport).complete(config(max_retries=2), "", "x")
        assert exchange.attempt_count == 3

    def test_client_error_not_retried(self):
        transport = ScriptedTransport([404])
        with pytest.raises(HttpError) as exc_info:
            client(transport).complete(config(max_retries=5), "", "x")
        assert exc_info.value.status == 404
        assert transport.calls == 1

    def test_malformed_response_not_retried(self):
        transport = ScriptedTransport([{"unexpected": True}])
        with pytest.raises(MalformedResponse):
            client(transport).complete(config(max_retries=5), "", "x")
        assert transport.calls == 1

    def test_extra_response_fields_ignored(self):
        body = {
            "id": "cmpl-1",
            "usage": {"total_tokens": 7},
            "choices": [{"index": 0, "message": {"role": "assistant", "content": "fine"}, "finish_reason": "stop"}],
        }
        exchange = client(ScriptedTransport([body])).complete(config(), "", "x")
        assert exchange.response_text == "fine"

    @pytest.mark.parametrize("failures,max_retries", [(0, 0), (1, 3), (3, 3), (5, 2)])
    def test_attempt_count_bound(self, failures, max_retries):
        transport = ScriptedTransport(["fail"] * failures + [200] * 5)
        cfg = config(max_retries=max_retries)
        if failures <= max_retries:
            exchange = client(transport).complete(cfg, "", "x")
            assert exchange.attempt_count == failures + 1
            assert exchange.attempt_count <= max_retries + 1
        else:
            with pytest.raises(Timeout):
                client(transport).complete(cfg, "", "x")
            assert transport.calls == max_retries + 1

    def test_backoff_stays_within_exponential_envelope(self):
        clock = VirtualClock()
        transport = ScriptedTransport(["fail", "fail", "fail", 200])
        chat = ChatClient(clock=clock, transport=transport)
        chat.complete(config(max_retries=3), "", "x")
        # full jitter: sum of delays <= 0.25 * (1 + 2 + 4)
        assert clock.now() <= 0.25 * 7 + 1e-6

    def test_deterministic_failing_handler(self):
        handler = failing_handler(2, echo_handler)
        transport = MockTransport(handler)
        exchange = client(transport).complete(config(max_retries=3), "", "pong")
        assert exchange.response_text == "pong"
        assert exchange.attempt_count == 3


class TestRateLimiter:
    def test_never_exceeds_rate_in_any_window(self):
        clock = VirtualClock()
        limiter = RateLimiter(3.0, clock)
        stamps = []
        for _ in range(10):
            limiter.acquire()
            stamps.append(clock.now())
        for i, t in enumerate(stamps):
            in_window = [s for s in stamps if t - 1.0 < s <= t]
            assert len(in_window) <= 3

    def test_fractional_rate_spaces_requests(self):
        clock = VirtualClock()
        limiter = RateLimiter(0.5, clock)
        limiter.acquire()
        limiter.acquire()
        assert clock.now() >= 2.0 - 1e-6

    def test_limiter_applies_through_client(self):
        clock = VirtualClock()
        transport = ScriptedTransport([200] * 8)
        chat = ChatClient(clock=clock, transport=transport)
        cfg = config(rate_limit=2.0)
        for _ in range(6):
            chat.complete(cfg, "", "x")
        # 6 sends at 2/s need at least 2 seconds of virtual time
        assert clock.now() >= 2.0 - 1e-6

    def test_thread_safety_under_virtual_clock(self):
        clock = VirtualClock()
        limiter = RateLimiter(4.0, clock)
        stamps = []
        lock = threading.Lock()

        def worker():
            for _ in range(5):
                limiter.acquire()
                with lock:
                    stamps.append(clock.now())

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(stamps) == 20
        for t in stamps:
            in_window = [s for s in stamps if t - 1.0 < s <= t]
            assert len(in_window) <= 4


class TestHttpTransport:
    def test_bearer_header_from_env(self, monkeypatch):
        monkeypatch.setenv("EMPHST_API_KEY_GPT_4_1", "sk-test")
        seen = {}

        def respond(request: httpx.Request) -> httpx.Response:
            seen["auth"] = request.headers.get("Authorization")
            seen["url"] = str(request.url)
            return httpx.Response(200, json={"choices": [{"message": {"content": "hi"}}]})

        transport = HttpTransport(httpx.Client(transport=httpx.MockTransport(respond)))
        cfg = config("gpt-4.1", endpoint="https://api.example.com/v1")
        status, body = transport.send(cfg, {"model": "m", "messages": []})
        assert status == 200
        assert seen["auth"] == "Bearer sk-test"
        assert seen["url"] == "https://api.example.com/v1/chat/completions"

    def test_env_var_name_sanitized(self):
        assert api_key_env_var("gpt-4.1") == "EMPHST_API_KEY_GPT_4_1"
        assert api_key_env_var("expert_a") == "EMPHST_API_KEY_EXPERT_A"

    def test_timeout_maps_to_transport_failure(self):
        def respond(request):
            raise httpx.ConnectTimeout("too slow")

        transport = HttpTransport(httpx.Client(transport=httpx.MockTransport(respond)))
        with pytest.raises(TransportFailure):
            transport.send(config(endpoint="https://x.example"), {})


class TestMockTranslate:
    lexicon = MockLexicon.of({"he": "他", "ran": "跑了"})

    def test_emphasis_carried_over(self):
        source = parse("**he** ran", MD)
        got = mock_translate(source, self.lexicon, "e1")
        assert render(got, MD) == "**他** 跑了"

    def test_no_emphasis_stays_plain(self):
        got = mock_translate(parse("he ran", MD), self.lexicon, "e1")
        assert got.plain == "他 跑了"
        assert got.spans == ()

    def test_out_of_vocabulary(self):
        with pytest.raises(OutOfVocabulary):
            mock_translate(parse("**x**", MD), MockLexicon.of({}), "e1")

    def test_deterministic_across_calls(self):
        lexicon = MockLexicon.of({"he": ["他", "该人"], "ran": "跑了"})
        source = parse("**he** ran", MD)
        first = mock_translate(source, lexicon, "expert-a")
        again = mock_translate(source, lexicon, "expert-a")
        assert first == again

    def test_expert_id_perturbs_synonym_choice(self):
        lexicon = MockLexicon.of({"w": [f"t{i}" for i in range(10)]})
        source = parse("w", MD)
        picks = {mock_translate(source, lexicon, f"e{i}").plain for i in range(20)}
        assert len(picks) > 1

    def test_multiword_emphasis(self):
        lexicon = MockLexicon.of({"a": "甲", "b": "乙", "c": "丙"})
        got = mock_translate(parse("**a b** c", MD), lexicon, "e")
        assert got.span_texts() == ["甲", "乙"]


class TestMockJudge:
    def test_span_count_match_preferred(self):
        source = EmphasisTaggedText.from_offsets("ab", [(0, 1)])
        candidates = [
            EmphasisTaggedText("xy"),
            EmphasisTaggedText.from_offsets("pq", [(0, 1)]),
            EmphasisTaggedText.from_offsets("pqrst", [(0, 1)]),
        ]
        assert mock_judge(source, candidates) == 1

    def test_single_candidate(self):
        source = EmphasisTaggedText("a")
        assert mock_judge(source, [EmphasisTaggedText("b")]) == 0

    def test_fallback_to_first_when_no_count_match(self):
        source = EmphasisTaggedText.from_offsets("ab", [(0, 1)])
        candidates = [EmphasisTaggedText("xy"), EmphasisTaggedText("zw")]
        assert mock_judge(source, candidates) == 0

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            mock_judge(EmphasisTaggedText("a"), [])
