"""Deterministic mock backends: the offline stand-ins for every model service.

Two layers:

* pure functions (:func:`mock_translate`, :func:`mock_judge`) that implement
  the documented deterministic rules, used directly as test oracles;
* chat handlers that expose those rules through the normal wire format, so
  pipelines and CLIs exercise the real prompt/reply plumbing offline.

The handlers read the structured lines our shipped prompt templates emit
(``SOURCE: ...``, ``A. ...``, ``GOLD: ...``, ``PREDICTED: ...``). Built-in
handlers can also be selected straight from a config file via ``mock:``
endpoints:

    mock:echo                reply with the user message
    mock:lexicon:PATH        translation expert driven by a lexicon JSON file
    mock:judge:count         selection judge (span-count rule, then shortest)
    mock:ssr:exact           SSR judge replying MATCH/NO_MATCH by exact match
    mock:table:PATH          map the exact user content to a reply (ASR/S2TT)
    mock:tts                 reply with a stable fake audio token
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

from emphst.backends.config import BackendConfig, BackendError
from emphst.backends.client import MockHandler, TransportFailure
from emphst.markup import EmphasisSpan, EmphasisTaggedText, TagDialect, parse, render


class OutOfVocabulary(BackendError):
    def __init__(self, word: str):
        super().__init__(f"word not in mock lexicon: {word!r}")
        self.word = word


@dataclass(frozen=True)
class MockLexicon:
    """Total, pure word-to-word mapping; values may list synonym alternatives."""

    entries: Mapping[str, tuple[str, ...]]

    @classmethod
    def of(cls, mapping: Mapping[str, str | Sequence[str]]) -> "MockLexicon":
        entries = {}
        for word, target in mapping.items():
            entries[word] = (target,) if isinstance(target, str) else tuple(target)
        return cls(entries)

    @classmethod
    def from_file(cls, path: str) -> "MockLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.of(json.load(fh))

    def lookup(self, word: str, expert_id: str) -> str:
        alts = self.entries.get(word)
        if not alts:
            raise OutOfVocabulary(word)
        digest = hashlib.sha256(f"{expert_id}\x00{word}".encode()).digest()
        return alts[int.from_bytes(digest[:8], "big") % len(alts)]


_WORD = re.compile(r"\S+")


def mock_translate(source: EmphasisTaggedText, lexicon: MockLexicon, expert_id: str) -> EmphasisTaggedText:
    """Word-by-word lexicon translation preserving which words carry emphasis.

    Deterministic in (source, lexicon, expert_id); the expert id only perturbs
    synonym choice where the lexicon lists alternatives.
    """
    words = []
    for match in _WORD.finditer(source.plain):
        emphasized = any(
            span.start < match.end() and match.start() < span.end for span in source.spans
        )
        words.append((lexicon.lookup(match.group(), expert_id), emphasized))

    plain_parts: list[str] = []
    spans: list[EmphasisSpan] = []
    offset = 0
    for i, (target, emphasized) in enumerate(words):
        if i:
            plain_parts.append(" ")
            offset += 1
        if emphasized:
            spans.append(EmphasisSpan(offset, offset + len(target), target))
        plain_parts.append(target)
        offset += len(target)
    return EmphasisTaggedText("".join(plain_parts), tuple(spans))


def mock_judge(
    source: EmphasisTaggedText,
    candidates: Sequence[EmphasisTaggedText],
    rule: str = "emphasis_count_match_then_shortest",
) -> int:
    """Pick the candidate matching the source span count; shortest plain breaks ties.

    Falls back to index 0 when no candidate matches. Fully deterministic.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if rule != "emphasis_count_match_then_shortest":
        raise ValueError(f"unknown mock judge rule {rule!r}")
    matching = [i for i, c in enumerate(candidates) if len(c.spans) == len(source.spans)]
    if not matching:
        return 0
    return min(matching, key=lambda i: (len(candidates[i].plain), i))


# -- chat handlers ------------------------------------------------------------

_SOURCE_LINE = re.compile(r"^SOURCE:\s?(.*)$", re.MULTILINE)
_CANDIDATE_LINE = re.compile(r"^([A-Z])\.\s?(.*)$", re.MULTILINE)
_GOLD_LINE = re.compile(r"^GOLD:\s?(.*)$", re.MULTILINE)
_PREDICTED_LINE = re.compile(r"^PREDICTED:\s?(.*)$", re.MULTILINE)


def _user_content(request: dict) -> str:
    for message in request.get("messages", []):
        if message.get("role") == "user":
            return message.get("content", "")
    return ""


def _extract(pattern: re.Pattern, text: str, what: str) -> str:
    match = pattern.search(text)
    if match is None:
        raise TransportFailure(f"mock handler found no {what} line in prompt")
    return match.group(1)


def echo_handler(request: dict) -> str:
    return _user_content(request)


def lexicon_expert_handler(lexicon: MockLexicon, expert_id: str) -> MockHandler:
    def handle(request: dict) -> str:
        source = parse(_extract(_SOURCE_LINE, _user_content(request), "SOURCE"), TagDialect.MARKDOWN)
        return render(mock_translate(source, lexicon, expert_id), TagDialect.MARKDOWN)

    return handle


def counting_judge_handler() -> MockHandler:
    def handle(request: dict) -> str:
        content = _user_content(request)
        source = parse(_extract(_SOURCE_LINE, content, "SOURCE"), TagDialect.MARKDOWN)
        labeled = _CANDIDATE_LINE.findall(content)
        if not labeled:
            raise TransportFailure("mock judge found no candidate lines in prompt")
        candidates = [parse(text, TagDialect.MARKDOWN) for _, text in labeled]
        choice = mock_judge(source, candidates)
        return f"{labeled[choice][0]}\nspan count matches source; shortest candidate preferred"

    return handle


def exact_ssr_judge_handler() -> MockHandler:
    from emphst.evaluation.ssr import exact_match_verdict

    def handle(request: dict) -> str:
        content = _user_content(request)
        gold = parse(_extract(_GOLD_LINE, content, "GOLD"), TagDialect.MARKDOWN)
        predicted = parse(_extract(_PREDICTED_LINE, content, "PREDICTED"), TagDialect.MARKDOWN)
        verdict = exact_match_verdict(gold, predicted)
        token = "MATCH" if verdict == "match" else "NO_MATCH"
        return f"{token}\nnormalized emphasized spans compared as multisets"

    return handle


def table_handler(table: Mapping[str, str]) -> MockHandler:
    def handle(request: dict) -> str:
        key = _user_content(request)
        if key not in table:
            raise TransportFailure(f"mock table has no entry for {key!r}")
        return table[key]

    return handle


def tts_handler(request: dict) -> str:
    digest = hashlib.sha1(_user_content(request).encode()).hexdigest()[:12]
    return f"mock-audio://{digest}"


def failing_handler(failures: int, then: MockHandler) -> MockHandler:
    """Raise a transport failure for the first ``failures`` calls, then delegate."""
    remaining = [failures]
    lock = threading.Lock()

    def handle(request: dict) -> object:
        with lock:
            if remaining[0] > 0:
                remaining[0] -= 1
                raise TransportFailure("scripted mock failure")
        return then(request)

    return handle


def handler_for_endpoint(config: BackendConfig) -> MockHandler:
    """Build the handler a ``mock:`` endpoint spec names; see module docstring."""
    spec = config.endpoint[len("mock:") :]
    if spec == "echo":
        return echo_handler
    if spec == "tts":
        return tts_handler
    if spec == "judge:count":
        return counting_judge_handler()
    if spec == "ssr:exact":
        return exact_ssr_judge_handler()
    if spec.startswith("lexicon:"):
        return lexicon_expert_handler(MockLexicon.from_file(spec[len("lexicon:") :]), config.id)
    if spec.startswith("table:"):
        with open(spec[len("table:") :], encoding="utf-8") as fh:
            return table_handler(json.load(fh))
    raise ValueError(f"unknown mock endpoint spec {config.endpoint!r}")
