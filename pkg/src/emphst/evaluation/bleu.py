"""Corpus BLEU with modified n-gram precision, plus ASR-BLEU composition.

Single-reference, 4-gram corpus BLEU:

* per-sentence n-gram counts are clipped to the reference counts
  (modified precision), then pooled over the corpus;
* brevity penalty exp(1 - ref_len/hyp_len) when the hypothesis side is
  shorter, 1 otherwise;
* a precision of exactly zero is floored at epsilon (default 1e-9)
  before the geometric mean; an order with no hypothesis n-grams at all
  counts as vacuously perfect (1.0), so identical corpora score exactly
  100 regardless of sentence length.

Emphasis markers are stripped before any BLEU computation: BLEU measures
semantics, emphasis is measured separately by SSR.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from emphst.backends import BackendConfig, PromptExchange, complete
from emphst.evaluation.errors import EmptyInput, LengthMismatch
from emphst.markup import TagDialect, strip_markers

TOKENIZE_MODES = ("whitespace", "character")

CompleteFn = Callable[[BackendConfig, str, str], PromptExchange]


@dataclass(frozen=True)
class BleuScore:
    """Corpus score in [0, 100] with its sufficient statistics.

    ``precisions`` holds the raw modified precisions (no smoothing applied);
    the score applies the epsilon floor before the geometric mean.
    """

    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def tokenize_for_bleu(text: str, mode: str = "whitespace") -> list[str]:
    """Split into BLEU tokens: Unicode-whitespace words, or single characters.

    Character mode emits one token per non-whitespace scalar value, the
    right granularity for unsegmented Chinese text.
    """
    if mode == "whitespace":
        return text.split()
    if mode == "character":
        return [ch for ch in text if not ch.isspace()]
    raise ValueError(f"unknown tokenization mode {mode!r}, expected one of {TOKENIZE_MODES}")


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    epsilon: float = 1e-9,
) -> BleuScore:
    """Corpus BLEU over pre-tokenized, length-aligned hypothesis/reference lists."""
    if len(hypotheses) != len(references):
        raise LengthMismatch(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise EmptyInput("need at least one hypothesis/reference pair")

    correct = [0] * max_n
    total = [0] * max_n
    hyp_length = 0
    ref_length = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_length += len(hyp)
        ref_length += len(ref)
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            correct[n - 1] += sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
            total[n - 1] += sum(hyp_counts.values())

    precisions = tuple(
        (correct[i] / total[i]) if total[i] > 0 else 1.0 for i in range(max_n)
    )
    if hyp_length >= ref_length:
        brevity_penalty = 1.0
    elif hyp_length == 0:
        brevity_penalty = 0.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)

    log_sum = sum(math.log(p if p > 0.0 else epsilon) for p in precisions)
    score = 100.0 * brevity_penalty * math.exp(log_sum / max_n)
    return BleuScore(
        score=score,
        precisions=precisions,
        brevity_penalty=brevity_penalty,
        hyp_length=hyp_length,
        ref_length=ref_length,
    )


def asr_bleu(
    speech_refs: Sequence[str],
    text_refs: Sequence[str],
    asr: BackendConfig,
    tokenization: str = "character",
    complete_fn: CompleteFn = complete,
) -> BleuScore:
    """Transcribe audio through an ASR backend and score BLEU against references.

    The ASR request carries the audio path as the user content; the reply
    content is the transcript. Emphasis markers are stripped from both sides.
    """
    if len(speech_refs) != len(text_refs):
        raise LengthMismatch(f"{len(speech_refs)} audio refs vs {len(text_refs)} text refs")
    if not speech_refs:
        raise EmptyInput("need at least one audio/text pair")
    transcripts = [complete_fn(asr, "", path).response_text for path in speech_refs]
    hyp = [tokenize_for_bleu(strip_markers(t, TagDialect.MARKDOWN), tokenization) for t in transcripts]
    ref = [tokenize_for_bleu(strip_markers(r, TagDialect.MARKDOWN), tokenization) for r in text_refs]
    return bleu(hyp, ref)
