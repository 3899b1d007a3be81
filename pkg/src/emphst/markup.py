"""Inline emphasis markup: parsing, rendering, and dialect conversion.

Two dialects mark emphasized spans inside otherwise plain text:

* Markdown  -- ``**word**`` (the same ``**`` token opens and closes)
* Strong    -- ``<strong>word</strong>``

The parsed form is an :class:`EmphasisTaggedText`: the plain text with all
markers removed plus a sorted list of character spans. All offsets count
Unicode scalar values (Python string indices), never bytes, so Chinese text
behaves exactly like ASCII.

Grammar rules, identical for both dialects:

* spans may not nest and may not be empty or whitespace-only;
* markers bind literally, there is no escape syntax;
* a lone ``*`` is ordinary text, but a ``*`` run that is not exactly a
  delimiter (``***``, ``*****``, ...) is ambiguous and rejected;
* adjacent spans (``**a****b**``) are rejected rather than merged, which
  keeps ``render`` the exact inverse of ``parse``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field


class TagDialect(enum.Enum):
    """The concrete marker syntax used on the wire."""

    MARKDOWN = "md"
    STRONG = "strong"

    @classmethod
    def from_name(cls, name: str) -> "TagDialect":
        for dialect in cls:
            if name == dialect.value or name == dialect.name.lower():
                return dialect
        raise ValueError(f"unknown dialect {name!r} (expected 'md' or 'strong')")


# (open token, close token) per dialect; Markdown reuses one token for both.
_DELIMS = {
    TagDialect.MARKDOWN: ("**", "**"),
    TagDialect.STRONG: ("<strong>", "</strong>"),
}


class ViolationKind(enum.Enum):
    UNBALANCED_DELIMITER = "UnbalancedDelimiter"
    EMPTY_SPAN = "EmptySpan"
    NESTED_SPAN = "NestedSpan"
    ESCAPING_UNSUPPORTED = "EscapingUnsupported"


@dataclass(frozen=True)
class Violation:
    """One grammar violation, located by character offset in the tagged string."""

    kind: ViolationKind
    position: int
    message: str

    def __str__(self) -> str:
        return f"{self.kind.value}@{self.position}: {self.message}"


class MarkupError(ValueError):
    """Base class for all markup failures."""


class InvariantViolation(MarkupError):
    """An EmphasisTaggedText value breaks its own invariants or cannot be rendered."""


class ParseError(MarkupError):
    """Tagged text does not conform to the grammar."""

    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation

    @property
    def position(self) -> int:
        return self.violation.position


class UnbalancedDelimiterError(ParseError):
    pass


class EmptySpanError(ParseError):
    pass


class NestedSpanError(ParseError):
    pass


class EscapingUnsupportedError(ParseError):
    pass


_ERROR_FOR_KIND = {
    ViolationKind.UNBALANCED_DELIMITER: UnbalancedDelimiterError,
    ViolationKind.EMPTY_SPAN: EmptySpanError,
    ViolationKind.NESTED_SPAN: NestedSpanError,
    ViolationKind.ESCAPING_UNSUPPORTED: EscapingUnsupportedError,
}


def _raise_for(violation: Violation) -> None:
    raise _ERROR_FOR_KIND[violation.kind](violation)


@dataclass(frozen=True)
class EmphasisSpan:
    """One emphasized region of the plain text, [start, end) in character offsets."""

    start: int
    end: int
    text: str


@dataclass(frozen=True)
class EmphasisTaggedText:
    """Plain text plus its emphasized spans; validated on construction."""

    plain: str
    spans: tuple[EmphasisSpan, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", tuple(self.spans))
        prev_end = None
        for span in self.spans:
            if not (0 <= span.start < span.end <= len(self.plain)):
                raise InvariantViolation(
                    f"span ({span.start}, {span.end}) out of bounds for text of length {len(self.plain)}"
                )
            if prev_end is not None and span.start < prev_end:
                raise InvariantViolation(
                    f"span ({span.start}, {span.end}) overlaps or precedes the previous span"
                )
            if span.text != self.plain[span.start : span.end]:
                raise InvariantViolation(
                    f"span text {span.text!r} does not equal plain[{span.start}:{span.end}]"
                )
            if not span.text.strip():
                raise InvariantViolation(f"span ({span.start}, {span.end}) is whitespace-only")
            prev_end = span.end

    @classmethod
    def from_offsets(cls, plain: str, offsets: list[tuple[int, int]] | tuple[tuple[int, int], ...]) -> "EmphasisTaggedText":
        spans = tuple(EmphasisSpan(s, e, plain[s:e]) for s, e in offsets)
        return cls(plain, spans)

    def span_texts(self) -> list[str]:
        return [span.text for span in self.spans]

    def offsets(self) -> list[tuple[int, int]]:
        return [(span.start, span.end) for span in self.spans]


# Markdown `*` runs: length 1 is a literal star, length 2 a delimiter,
# anything longer cannot be read unambiguously.
_STAR_RUN = re.compile(r"\*+")


def _scan_markdown(tagged: str) -> tuple[list[Violation], str, list[tuple[int, int]]]:
    violations: list[Violation] = []
    plain_parts: list[str] = []
    plain_len = 0
    offsets: list[tuple[int, int]] = []
    open_at: int | None = None  # tagged offset of the opening delimiter
    open_plain = 0
    cursor = 0

    def emit(text: str) -> None:
        nonlocal plain_len
        plain_parts.append(text)
        plain_len += len(text)

    for run in _STAR_RUN.finditer(tagged):
        emit(tagged[cursor : run.start()])
        cursor = run.end()
        length = run.end() - run.start()
        if length == 1:
            emit("*")
        elif length == 2:
            if open_at is None:
                open_at, open_plain = run.start(), plain_len
            else:
                offsets.append((open_plain, plain_len))
                if plain_len == open_plain or not "".join(plain_parts)[open_plain:plain_len].strip():
                    violations.append(
                        Violation(ViolationKind.EMPTY_SPAN, open_at, "emphasized span is empty or whitespace-only")
                    )
                    offsets.pop()
                open_at = None
        elif length % 2 == 1:
            violations.append(
                Violation(
                    ViolationKind.ESCAPING_UNSUPPORTED,
                    run.start(),
                    f"ambiguous run of {length} '*' characters (no escape syntax)",
                )
            )
        else:
            violations.append(
                Violation(
                    ViolationKind.EMPTY_SPAN,
                    run.start(),
                    f"run of {length} '*' characters implies an empty or adjacent span",
                )
            )
    emit(tagged[cursor:])

    if open_at is not None:
        violations.append(
            Violation(ViolationKind.UNBALANCED_DELIMITER, open_at, "opening '**' is never closed")
        )
    violations.sort(key=lambda v: v.position)
    return violations, "".join(plain_parts), offsets


def _scan_strong(tagged: str) -> tuple[list[Violation], str, list[tuple[int, int]]]:
    open_tok, close_tok = _DELIMS[TagDialect.STRONG]
    violations: list[Violation] = []
    plain_parts: list[str] = []
    plain_len = 0
    offsets: list[tuple[int, int]] = []
    open_at: int | None = None
    open_plain = 0
    i = 0

    def emit(text: str) -> None:
        nonlocal plain_len
        plain_parts.append(text)
        plain_len += len(text)

    while True:
        p_open = tagged.find(open_tok, i)
        p_close = tagged.find(close_tok, i)
        if p_open == -1 and p_close == -1:
            emit(tagged[i:])
            break
        if p_close == -1 or (p_open != -1 and p_open < p_close):
            pos, token, is_open = p_open, open_tok, True
        else:
            pos, token, is_open = p_close, close_tok, False
        emit(tagged[i:pos])
        i = pos + len(token)
        if is_open:
            if open_at is not None:
                violations.append(
                    Violation(ViolationKind.NESTED_SPAN, pos, "opening tag inside an open span")
                )
            else:
                open_at, open_plain = pos, plain_len
        else:
            if open_at is None:
                violations.append(
                    Violation(ViolationKind.UNBALANCED_DELIMITER, pos, "closing tag without an open span")
                )
            else:
                text = "".join(plain_parts)[open_plain:plain_len]
                if not text.strip():
                    violations.append(
                        Violation(ViolationKind.EMPTY_SPAN, open_at, "emphasized span is empty or whitespace-only")
                    )
                else:
                    offsets.append((open_plain, plain_len))
                open_at = None

    if open_at is not None:
        violations.append(
            Violation(ViolationKind.UNBALANCED_DELIMITER, open_at, "opening tag is never closed")
        )
    violations.sort(key=lambda v: v.position)
    return violations, "".join(plain_parts), offsets


_SCANNERS = {
    TagDialect.MARKDOWN: _scan_markdown,
    TagDialect.STRONG: _scan_strong,
}


def validate(tagged: str, dialect: TagDialect) -> list[Violation]:
    """Return every grammar violation in ``tagged``; empty list iff parse succeeds."""
    violations, _, _ = _SCANNERS[dialect](tagged)
    return violations


def parse(tagged: str, dialect: TagDialect) -> EmphasisTaggedText:
    """Parse tagged text into plain text plus spans.

    Raises the :class:`ParseError` subclass for the first violation found:
    :class:`UnbalancedDelimiterError`, :class:`EmptySpanError`,
    :class:`NestedSpanError`, or :class:`EscapingUnsupportedError`.
    """
    violations, plain, offsets = _SCANNERS[dialect](tagged)
    if violations:
        _raise_for(violations[0])
    return EmphasisTaggedText.from_offsets(plain, offsets)


def render(text: EmphasisTaggedText, dialect: TagDialect) -> str:
    """Render back to a tagged string; exact inverse of :func:`parse`.

    Raises :class:`InvariantViolation` when the value cannot be represented in
    the dialect: adjacent spans in Markdown (``**a****b**`` would be
    ambiguous), or plain text that itself contains delimiter sequences.
    """
    if dialect is TagDialect.MARKDOWN:
        for a, b in zip(text.spans, text.spans[1:]):
            if a.end == b.start:
                raise InvariantViolation(
                    f"adjacent spans at offset {a.end} cannot be rendered in Markdown"
                )
    open_tok, close_tok = _DELIMS[dialect]
    parts: list[str] = []
    last = 0
    for span in text.spans:
        parts.append(text.plain[last : span.start])
        parts.append(open_tok)
        parts.append(span.text)
        parts.append(close_tok)
        last = span.end
    parts.append(text.plain[last:])
    rendered = "".join(parts)

    # The contract is that the output parses back to an equal value; plain
    # text colliding with delimiter tokens would silently break that.
    try:
        back = parse(rendered, dialect)
    except ParseError as exc:
        raise InvariantViolation(
            f"rendered text is not well-formed {dialect.value}: {exc}"
        ) from exc
    if back != text:
        raise InvariantViolation(
            f"plain text interferes with {dialect.value} delimiters; value is not representable"
        )
    return rendered


def convert(tagged: str, from_dialect: TagDialect, to_dialect: TagDialect) -> str:
    """Re-express tagged text in another dialect, preserving plain text and spans."""
    return render(parse(tagged, from_dialect), to_dialect)


def strip_markers(text: str, dialect: TagDialect) -> str:
    """Remove delimiter tokens lexically, with no well-formedness requirement.

    On well-formed input this equals ``parse(text, dialect).plain``; on
    arbitrary input (e.g. ASR transcripts) it is still total.
    """
    if dialect is TagDialect.MARKDOWN:
        return text.replace("**", "")
    open_tok, close_tok = _DELIMS[TagDialect.STRONG]
    return text.replace(open_tok, "").replace(close_tok, "")
