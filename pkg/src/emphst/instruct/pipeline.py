"""Multi-expert translation pipeline: fan out, validate, judge, export.

Each source sample is translated by every configured expert, the candidates
are mechanically validated, and a judge backend picks the best valid one.
Every sample produces exactly one output record (selected or failed); nothing
is silently dropped. Runs are deterministic: with the same config digest,
corpus, and mock backends, the output file is byte-identical regardless of
worker budget or completion order.
"""

from __future__ import annotations

import json
import math
import random
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from emphst.backends import BackendConfig, BackendError, PromptExchange, complete
from emphst.instruct.config import PipelineConfig
from emphst.markup import (
    EmphasisTaggedText,
    TagDialect,
    parse,
    render,
    validate as validate_markup,
)

MD = TagDialect.MARKDOWN

CompleteFn = Callable[[BackendConfig, str, str], PromptExchange]

# Rationale markers for selections that never reached the judge.
RATIONALE_SINGLE_VALID = "auto:single-valid"
RATIONALE_FALLBACK = "fallback:first-valid"

JUDGE_RE_ASKS = 2


class PipelineError(Exception):
    pass


class AllExpertsFailed(PipelineError):
    pass


class NoValidCandidate(PipelineError):
    pass


@dataclass(frozen=True)
class SourceSample:
    id: str
    source_text: EmphasisTaggedText
    audio_ref: str | None = None
    audio_sec: float | None = None
    origin: str = ""

    def __post_init__(self) -> None:
        if self.audio_sec is not None and self.audio_sec <= 0:
            raise ValueError(f"sample {self.id}: audio_sec must be positive when present")


@dataclass(frozen=True)
class TranslationCandidate:
    expert_id: str
    raw_response: str | None  # None when the expert failed at transport level
    tagged_target: EmphasisTaggedText | None
    valid: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class SelectionRecord:
    sample_id: str
    candidates: tuple[TranslationCandidate, ...]
    chosen_expert: str
    judge_rationale: str
    judge_backend_id: str


@dataclass(frozen=True)
class PipelineRun:
    config_digest: str
    started: float
    finished: float
    counts: dict
    seed: int


def validate_candidate(sample: SourceSample, candidate_text: str) -> tuple[bool, list[str]]:
    """Mechanical candidate checks: parses, non-empty, keeps emphasis when source has it."""
    valid, violations, _ = _validate_candidate(sample, candidate_text)
    return valid, violations


def _validate_candidate(
    sample: SourceSample, candidate_text: str
) -> tuple[bool, list[str], EmphasisTaggedText | None]:
    if not candidate_text.strip():
        return False, ["EmptyTranslation"], None
    violations = validate_markup(candidate_text, MD)
    if violations:
        return False, [v.kind.value for v in violations], None
    tagged = parse(candidate_text, MD)
    if not tagged.plain.strip():
        return False, ["EmptyTranslation"], None
    if sample.source_text.spans and not tagged.spans:
        return False, ["MissingEmphasis"], None
    return True, [], tagged


def fan_out_translate(
    sample: SourceSample,
    experts: Sequence[BackendConfig],
    prompt_template: str,
    complete_fn: CompleteFn = complete,
    max_workers: int = 8,
) -> list[TranslationCandidate]:
    """Query every expert once; candidates come back in expert config order.

    Transport-level failures become invalid candidates rather than
    exceptions; only if every expert fails is :class:`AllExpertsFailed`
    raised.
    """
    if not experts:
        raise PipelineError("experts must be non-empty")
    if "{source}" not in prompt_template:
        raise PipelineError("prompt template must contain the {source} placeholder")
    prompt = prompt_template.replace("{source}", render(sample.source_text, MD))

    def ask(expert: BackendConfig) -> TranslationCandidate:
        try:
            exchange = complete_fn(expert, "", prompt)
        except BackendError as exc:
            return TranslationCandidate(
                expert_id=expert.id,
                raw_response=None,
                tagged_target=None,
                valid=False,
                violations=(f"TransportError:{type(exc).__name__}",),
            )
        valid, violations, tagged = _validate_candidate(sample, exchange.response_text)
        return TranslationCandidate(
            expert_id=expert.id,
            raw_response=exchange.response_text,
            tagged_target=tagged,
            valid=valid,
            violations=tuple(violations),
        )

    if len(experts) == 1 or max_workers == 1:
        candidates = [ask(expert) for expert in experts]
    else:
        with ThreadPoolExecutor(max_workers=min(max_workers, len(experts))) as pool:
            candidates = list(pool.map(ask, experts))
    if all(c.raw_response is None for c in candidates):
        raise AllExpertsFailed(f"sample {sample.id}: every expert failed at transport level")
    return candidates


def _parse_judge_reply(reply: str, letters: str) -> tuple[int, str] | None:
    lines = reply.splitlines()
    for i, line in enumerate(lines):
        token = line.strip()
        if not token:
            continue
        if len(token) == 1 and token in letters:
            return letters.index(token), "\n".join(lines[i + 1 :]).strip()
        return None
    return None


def select_best(
    sample: SourceSample,
    candidates: Sequence[TranslationCandidate],
    judge: BackendConfig,
    judge_prompt_template: str,
    complete_fn: CompleteFn = complete,
    re_asks: int = JUDGE_RE_ASKS,
) -> SelectionRecord:
    """Have the judge pick among valid candidates, labeled A, B, C, ...

    A single valid candidate is chosen without consulting the judge. A judge
    reply whose first non-blank line is not exactly one candidate letter is
    re-asked up to ``re_asks`` times, then the first valid candidate wins
    with rationale ``fallback:first-valid``.
    """
    valid = [c for c in candidates if c.valid]
    if not valid:
        raise NoValidCandidate(f"sample {sample.id}: no valid candidate to select from")
    if len(valid) == 1:
        return SelectionRecord(
            sample_id=sample.id,
            candidates=tuple(candidates),
            chosen_expert=valid[0].expert_id,
            judge_rationale=RATIONALE_SINGLE_VALID,
            judge_backend_id=judge.id,
        )
    if len(valid) > len(string.ascii_uppercase):
        raise PipelineError(f"sample {sample.id}: more than 26 valid candidates")

    letters = string.ascii_uppercase[: len(valid)]
    listing = "\n".join(
        f"{letters[i]}. {render(c.tagged_target, MD)}" for i, c in enumerate(valid)
    )
    prompt = judge_prompt_template.replace(
        "{source}", render(sample.source_text, MD)
    ).replace("{candidates}", listing)

    chosen_index: int | None = None
    rationale = ""
    for _ in range(re_asks + 1):
        exchange = complete_fn(judge, "", prompt)
        parsed = _parse_judge_reply(exchange.response_text, letters)
        if parsed is not None:
            chosen_index, rationale = parsed
            break
    if chosen_index is None:
        chosen_index, rationale = 0, RATIONALE_FALLBACK
    return SelectionRecord(
        sample_id=sample.id,
        candidates=tuple(candidates),
        chosen_expert=valid[chosen_index].expert_id,
        judge_rationale=rationale,
        judge_backend_id=judge.id,
    )


# -- corpus I/O ----------------------------------------------------------------


def sample_from_record(record: dict, line: int) -> SourceSample:
    from emphst.dataset import SchemaError  # shared error vocabulary

    sample_id = record.get("id")
    src_raw = record.get("src_text")
    if not isinstance(sample_id, str):
        raise SchemaError(line, "id")
    if not isinstance(src_raw, str):
        raise SchemaError(line, "src_text")
    audio_ref = record.get("src_audio")
    audio_sec = record.get("audio_sec")
    return SourceSample(
        id=sample_id,
        source_text=parse(src_raw, MD),
        audio_ref=audio_ref if isinstance(audio_ref, str) else None,
        audio_sec=float(audio_sec) if isinstance(audio_sec, (int, float)) else None,
        origin=record.get("origin", "") if isinstance(record.get("origin"), str) else "",
    )


def load_corpus(path: str | Path) -> list[SourceSample]:
    from emphst.dataset import read_jsonl

    return [sample_from_record(record, line) for line, record in read_jsonl(path)]


def _candidate_json(candidate: TranslationCandidate) -> dict:
    return {
        "expert_id": candidate.expert_id,
        "text": candidate.raw_response,
        "valid": candidate.valid,
    }


def _record_json(sample: SourceSample, outcome: SelectionRecord | str, candidates) -> dict:
    record: dict = {
        "id": sample.id,
        "src_text": render(sample.source_text, MD),
    }
    if isinstance(outcome, SelectionRecord):
        chosen = next(c for c in outcome.candidates if c.expert_id == outcome.chosen_expert)
        record.update(
            tgt_text=render(chosen.tagged_target, MD),
            chosen_expert=outcome.chosen_expert,
            judge_rationale=outcome.judge_rationale,
            candidates=[_candidate_json(c) for c in outcome.candidates],
            status="selected",
        )
    else:
        record.update(
            tgt_text=None,
            chosen_expert=None,
            judge_rationale=None,
            candidates=[_candidate_json(c) for c in candidates],
            status="failed",
            failure_reason=outcome,
        )
    # audio metadata passes through when present so benchmark construction
    # downstream can reference the source recordings
    if sample.audio_ref is not None:
        record["src_audio"] = sample.audio_ref
    if sample.audio_sec is not None:
        record["audio_sec"] = sample.audio_sec
    if sample.origin:
        record["origin"] = sample.origin
    return record


def run_pipeline(
    corpus: Iterable[SourceSample],
    config: PipelineConfig,
    out_path: str | Path,
    log_path: str | Path | None = None,
    complete_fn: CompleteFn = complete,
) -> PipelineRun:
    """Run the full construction pipeline and write one JSONL record per sample.

    Samples are processed by a bounded worker pool but written strictly in
    input order; per-sample failures are recorded with a reason, never
    raised. Rerunning with identical inputs yields a byte-identical file.
    """
    samples = list(corpus)
    started = time.time()

    def process(sample: SourceSample) -> dict:
        try:
            candidates = fan_out_translate(
                sample,
                config.experts,
                config.expert_prompt,
                complete_fn=complete_fn,
                max_workers=config.worker_budget,
            )
        except AllExpertsFailed:
            return _record_json(sample, "all-experts-failed", [
                TranslationCandidate(e.id, None, None, False, ("TransportError",))
                for e in config.experts
            ])
        try:
            selection = select_best(
                sample, candidates, config.judge, config.judge_prompt, complete_fn=complete_fn
            )
        except NoValidCandidate:
            return _record_json(sample, "no-valid-candidate", candidates)
        except BackendError as exc:
            return _record_json(sample, f"judge-error:{type(exc).__name__}", candidates)
        return _record_json(sample, selection, None)

    if samples:
        if config.worker_budget == 1:
            records = [process(s) for s in samples]
        else:
            with ThreadPoolExecutor(max_workers=config.worker_budget) as pool:
                records = list(pool.map(process, samples))
    else:
        records = []

    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")

    counts = {
        "input": len(samples),
        "translated": sum(
            1 for r in records for c in r["candidates"] if c["text"] is not None
        ),
        "selected": sum(1 for r in records if r["status"] == "selected"),
        "failed": sum(1 for r in records if r["status"] == "failed"),
    }
    run = PipelineRun(
        config_digest=config.digest(),
        started=started,
        finished=time.time(),
        counts=counts,
        seed=config.seed,
    )
    if log_path is not None:
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(vars(run), ensure_ascii=False))
            fh.write("\n")
    return run


def sample_for_review(
    dataset_path: str | Path,
    rate: float,
    seed: int,
    out_path: str | Path,
) -> int:
    """Export a seeded uniform sample of ceil(rate * N) records for human review.

    Output is ordered by sample id and byte-identical for identical inputs.
    Returns the number of records written.
    """
    from emphst.dataset import SchemaError, read_jsonl

    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    entries = []
    for line, record in read_jsonl(dataset_path):
        if not isinstance(record.get("id"), str):
            raise SchemaError(line, "id")
        entries.append(record)
    if not entries:
        raise ValueError("dataset is empty")
    k = math.ceil(rate * len(entries))
    chosen = random.Random(seed).sample(range(len(entries)), k)
    picked = sorted((entries[i] for i in chosen), key=lambda r: r["id"])
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in picked:
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")
    return k
