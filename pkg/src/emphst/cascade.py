"""Cascaded speech-to-speech orchestration: S2TT text, tag conversion, TTS.

The S2TT backend receives a translation instruction (system) plus the audio
reference (user) and must answer with Markdown-tagged target text. That text
is converted to the strong-tag dialect and sent verbatim to the TTS backend,
whose reply is an audio path or token. One re-ask is allowed when the S2TT
output is malformed markup; a second malformed reply fails the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from emphst.backends import BackendConfig, PromptExchange, complete
from emphst.markup import EmphasisTaggedText, ParseError, TagDialect, parse, render

CompleteFn = Callable[[BackendConfig, str, str], PromptExchange]

DEFAULT_S2TT_INSTRUCTION = "Translate the speech to {language}, preserving emphasis with ** tags."


@dataclass(frozen=True)
class CascadeResult:
    sample_id: str
    tagged_text: EmphasisTaggedText
    tts_prompt: str
    audio_out: str
    stage_latencies: dict[str, float]


def cascade_translate(
    audio_ref: str,
    s2tt: BackendConfig,
    tts: BackendConfig,
    sample_id: str = "",
    target_language: str = "Chinese",
    complete_fn: CompleteFn = complete,
) -> CascadeResult:
    instruction = DEFAULT_S2TT_INSTRUCTION.replace("{language}", target_language)

    exchange = complete_fn(s2tt, instruction, audio_ref)
    try:
        tagged = parse(exchange.response_text, TagDialect.MARKDOWN)
    except ParseError:
        exchange = complete_fn(s2tt, instruction, audio_ref)
        tagged = parse(exchange.response_text, TagDialect.MARKDOWN)

    tts_prompt = render(tagged, TagDialect.STRONG)
    tts_exchange = complete_fn(tts, "", tts_prompt)
    return CascadeResult(
        sample_id=sample_id,
        tagged_text=tagged,
        tts_prompt=tts_prompt,
        audio_out=tts_exchange.response_text,
        stage_latencies={"s2tt": exchange.latency, "tts": tts_exchange.latency},
    )
