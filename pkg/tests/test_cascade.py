import random

import pytest

from emphst.backends import BackendConfig, ChatClient, VirtualClock, clear_mocks, register_mock
from emphst.backends.mock import table_handler, tts_handler
from emphst.cascade import cascade_translate
from emphst.markup import TagDialect, UnbalancedDelimiterError, parse

from genutil import random_tagged_text

MD = TagDialect.MARKDOWN
STRONG = TagDialect.STRONG


def s2tt_config():
    return BackendConfig(id="s2tt-x", kind="s2tt", endpoint="mock:echo", model="m",
                         max_retries=0, rate_limit=10_000)


def tts_config():
    return BackendConfig(id="tts-x", kind="tts", endpoint="mock:tts", model="m",
                         max_retries=0, rate_limit=10_000)


def fresh_complete():
    return ChatClient(clock=VirtualClock()).complete


@pytest.fixture(autouse=True)
def clean_registry():
    clear_mocks()
    yield
    clear_mocks()


class TestCascade:
    def test_strong_prompt_reaches_tts(self):
        register_mock("s2tt-x", table_handler({"a.wav": "我没有说**他**偷了钱。"}))
        seen = {}

        def recording_tts(request):
            seen["prompt"] = request["messages"][1]["content"]
            return "mock-audio://deadbeef"

        register_mock("tts-x", recording_tts)
        result = cascade_translate("a.wav", s2tt_config(), tts_config(),
                                   sample_id="s1", complete_fn=fresh_complete())
        assert result.tts_prompt == "我没有说<strong>他</strong>偷了钱。"
        assert seen["prompt"] == result.tts_prompt
        assert result.audio_out == "mock-audio://deadbeef"
        assert result.sample_id == "s1"
        assert set(result.stage_latencies) == {"s2tt", "tts"}

    def test_no_emphasis_passes_plain_text(self):
        register_mock("s2tt-x", table_handler({"a.wav": "他跑了"}))
        register_mock("tts-x", tts_handler)
        result = cascade_translate("a.wav", s2tt_config(), tts_config(),
                                   complete_fn=fresh_complete())
        assert result.tts_prompt == "他跑了"
        assert result.tagged_text.spans == ()

    def test_instruction_carries_target_language(self):
        seen = {}

        def recording_s2tt(request):
            seen["system"] = request["messages"][0]["content"]
            return "他跑了"

        register_mock("s2tt-x", recording_s2tt)
        register_mock("tts-x", tts_handler)
        cascade_translate("a.wav", s2tt_config(), tts_config(),
                          target_language="German", complete_fn=fresh_complete())
        assert "German" in seen["system"]
        assert "** tags" in seen["system"]

    def test_malformed_markup_reasked_once_then_fails(self):
        calls = []

        def bad_s2tt(request):
            calls.append(1)
            return "**bad"

        register_mock("s2tt-x", bad_s2tt)
        register_mock("tts-x", tts_handler)
        with pytest.raises(UnbalancedDelimiterError):
            cascade_translate("a.wav", s2tt_config(), tts_config(), complete_fn=fresh_complete())
        assert len(calls) == 2

    def test_reask_recovers_when_second_reply_parses(self):
        replies = iter(["**bad", "**好**吧"])

        def flaky_s2tt(request):
            return next(replies)

        register_mock("s2tt-x", flaky_s2tt)
        register_mock("tts-x", tts_handler)
        result = cascade_translate("a.wav", s2tt_config(), tts_config(), complete_fn=fresh_complete())
        assert result.tts_prompt == "<strong>好</strong>吧"

    def test_tag_fidelity_over_random_runs(self):
        rng = random.Random(991)
        for i in range(20):
            tagged_md, value = random_tagged_text(rng, MD)
            register_mock("s2tt-x", table_handler({f"a{i}.wav": tagged_md}))
            register_mock("tts-x", tts_handler)
            result = cascade_translate(f"a{i}.wav", s2tt_config(), tts_config(),
                                       complete_fn=fresh_complete())
            assert parse(result.tts_prompt, STRONG) == result.tagged_text == value
