"""Sentence stress reasoning: per-sample emphasis match verdicts and the SSR score.

Emphasis recognition is a binary classification per sample: does the
predicted emphasis match the reference emphasis? Verdicts come either from
an LLM judge over a strict MATCH/NO_MATCH reply contract, or from the
deterministic exact-match fallback (judge id ``"exact"``) that makes the
whole metric computable offline.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from emphst.backends import BackendConfig, PromptExchange, complete
from emphst.evaluation.errors import EmptyInput, JudgeUnparseable
from emphst.markup import EmphasisTaggedText, TagDialect, render

MATCH = "match"
NO_MATCH = "no_match"

CompleteFn = Callable[[BackendConfig, str, str], PromptExchange]

# Default wording only; deployments tune it per judge model. The reply
# contract (first line exactly MATCH or NO_MATCH) is what judge_sample parses.
DEFAULT_SSR_PROMPT = """\
You compare emphasized words in two versions of the same translated sentence.
Emphasized words are wrapped in **double asterisks**.
Decide whether the PREDICTED emphasis marks the same words as the GOLD emphasis.
Reply with MATCH or NO_MATCH on the first line, exactly. Add a one-line rationale after it.
GOLD: {gold}
PREDICTED: {predicted}
"""


@dataclass(frozen=True)
class SSRJudgment:
    sample_id: str
    verdict: str  # "match" | "no_match"
    rationale: str
    judge_id: str


def _normalize_span(text: str) -> str:
    stripped = text.strip()
    start, end = 0, len(stripped)
    while start < end and unicodedata.category(stripped[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(stripped[end - 1]).startswith("P"):
        end -= 1
    return stripped[start:end].casefold()


def exact_match_verdict(gold: EmphasisTaggedText, predicted: EmphasisTaggedText) -> str:
    """Deterministic fallback: compare emphasized span texts as multisets.

    Spans are case-folded and stripped of leading/trailing punctuation first,
    so "他。" and "他" count as the same emphasized word.
    """
    gold_spans = Counter(_normalize_span(s.text) for s in gold.spans)
    pred_spans = Counter(_normalize_span(s.text) for s in predicted.spans)
    return MATCH if gold_spans == pred_spans else NO_MATCH


def judge_exact(gold: EmphasisTaggedText, predicted: EmphasisTaggedText, sample_id: str = "") -> SSRJudgment:
    verdict = exact_match_verdict(gold, predicted)
    return SSRJudgment(
        sample_id=sample_id,
        verdict=verdict,
        rationale="normalized emphasized spans compared as multisets",
        judge_id="exact",
    )


def _parse_verdict_reply(reply: str) -> tuple[str, str] | None:
    lines = reply.splitlines()
    for i, line in enumerate(lines):
        token = line.strip()
        if not token:
            continue
        if token == "MATCH":
            return MATCH, "\n".join(lines[i + 1 :]).strip()
        if token == "NO_MATCH":
            return NO_MATCH, "\n".join(lines[i + 1 :]).strip()
        return None
    return None


def judge_sample(
    gold: EmphasisTaggedText,
    predicted: EmphasisTaggedText,
    judge: BackendConfig,
    prompt_template: str = DEFAULT_SSR_PROMPT,
    sample_id: str = "",
    complete_fn: CompleteFn = complete,
    re_asks: int = 2,
) -> SSRJudgment:
    """Ask an LLM judge for a binary emphasis verdict.

    The reply contract is strict: first non-blank line exactly MATCH or
    NO_MATCH, remainder is the rationale. Malformed replies are re-asked up
    to ``re_asks`` times, then :class:`JudgeUnparseable` is raised.
    """
    md = TagDialect.MARKDOWN
    prompt = prompt_template.replace("{gold}", render(gold, md)).replace(
        "{predicted}", render(predicted, md)
    )
    last_reply = ""
    for _ in range(re_asks + 1):
        exchange = complete_fn(judge, "", prompt)
        last_reply = exchange.response_text
        parsed = _parse_verdict_reply(last_reply)
        if parsed is not None:
            verdict, rationale = parsed
            return SSRJudgment(
                sample_id=sample_id, verdict=verdict, rationale=rationale, judge_id=judge.id
            )
    raise JudgeUnparseable(
        f"judge {judge.id} reply not MATCH/NO_MATCH after {re_asks} re-asks: {last_reply!r}"
    )


def ssr_score(judgments: Sequence[SSRJudgment]) -> float:
    """Percentage of match verdicts, rounded to one decimal place.

    Rounding goes through exact rational arithmetic so complementary verdict
    sets always sum to exactly 100.0.
    """
    if not judgments:
        raise EmptyInput("SSR over zero judgments is undefined")
    matches = sum(1 for j in judgments if j.verdict == MATCH)
    tenths = round(Fraction(1000 * matches, len(judgments)))
    return tenths / 10.0
