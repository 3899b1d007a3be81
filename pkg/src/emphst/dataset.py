"""Benchmark dataset files: schema validation, statistics, and construction.

The benchmark is a JSONL file of human-verified English-to-Chinese samples
with emphasis alignments. Each record:

    {"id": str, "src_text": str, "src_audio": str, "audio_sec": float,
     "tgt_text": str, "verified": bool}

``src_text``/``tgt_text`` carry Markdown emphasis markers. Audio is referenced
by path and duration only, never decoded here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from emphst.markup import (
    EmphasisTaggedText,
    ParseError,
    TagDialect,
    parse,
    render,
)

MD = TagDialect.MARKDOWN


class DatasetError(ValueError):
    pass


class SchemaError(DatasetError):
    def __init__(self, line: int, field: str, detail: str = ""):
        message = f"line {line}: bad or missing field {field!r}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.line = line
        self.field = field


class MarkupFieldError(DatasetError):
    """A text field failed to parse as emphasis markup."""

    def __init__(self, line: int, field: str, cause: ParseError):
        super().__init__(f"line {line}: field {field!r}: {cause}")
        self.line = line
        self.field = field
        self.violation = cause.violation


class UnknownId(DatasetError):
    def __init__(self, line: int, sample_id: str):
        super().__init__(f"line {line}: decision references unknown id {sample_id!r}")
        self.sample_id = sample_id


@dataclass(frozen=True)
class BenchSample:
    id: str
    src_text: EmphasisTaggedText
    src_audio: str
    audio_sec: float
    tgt_text: EmphasisTaggedText
    verified: bool


@dataclass(frozen=True)
class DatasetStats:
    count: int
    avg_audio_sec: float
    avg_src_words: float
    avg_tgt_chars: float


def _parse_markup(raw: str, line: int, field: str) -> EmphasisTaggedText:
    try:
        return parse(raw, MD)
    except ParseError as exc:
        raise MarkupFieldError(line, field, exc) from exc


def _require(record: dict, line: int, field: str, types) -> object:
    value = record.get(field)
    if not isinstance(value, types):
        raise SchemaError(line, field)
    return value


def read_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    """Yield (1-based line number, record) pairs; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_no, "<json>", str(exc)) from exc
            if not isinstance(record, dict):
                raise SchemaError(line_no, "<json>", "record is not an object")
            yield line_no, record


def sample_from_record(record: dict, line: int) -> BenchSample:
    sample_id = _require(record, line, "id", str)
    src_raw = _require(record, line, "src_text", str)
    src_audio = _require(record, line, "src_audio", str)
    audio_sec = record.get("audio_sec")
    if not isinstance(audio_sec, (int, float)) or isinstance(audio_sec, bool) or audio_sec <= 0:
        raise SchemaError(line, "audio_sec", "must be a positive number")
    tgt_raw = _require(record, line, "tgt_text", str)
    verified = record.get("verified")
    if not isinstance(verified, bool):
        raise SchemaError(line, "verified")

    src_text = _parse_markup(src_raw, line, "src_text")
    tgt_text = _parse_markup(tgt_raw, line, "tgt_text")
    if not src_text.spans:
        raise SchemaError(line, "src_text", "source must contain at least one emphasized span")
    if verified and not tgt_text.spans:
        raise SchemaError(line, "tgt_text", "verified sample must contain an emphasized span")
    return BenchSample(
        id=sample_id,
        src_text=src_text,
        src_audio=src_audio,
        audio_sec=float(audio_sec),
        tgt_text=tgt_text,
        verified=verified,
    )


def load_bench(path: str | Path) -> list[BenchSample]:
    """Load and fully validate a benchmark file; errors carry line numbers."""
    return [sample_from_record(record, line) for line, record in read_jsonl(path)]


def sample_to_record(sample: BenchSample) -> dict:
    return {
        "id": sample.id,
        "src_text": render(sample.src_text, MD),
        "src_audio": sample.src_audio,
        "audio_sec": sample.audio_sec,
        "tgt_text": render(sample.tgt_text, MD),
        "verified": sample.verified,
    }


def write_bench(samples: Sequence[BenchSample], path: str | Path) -> None:
    """Serialize samples with stable field order; inverse of load_bench."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_record(sample), ensure_ascii=False))
            fh.write("\n")


def stats(samples: Sequence[BenchSample]) -> DatasetStats:
    """Arithmetic means over duration, source words, and target characters.

    Word count is whitespace tokens of the plain source; character count is
    non-whitespace Unicode scalar values of the plain target. Values are kept
    unrounded; round at display time only.
    """
    if not samples:
        return DatasetStats(count=0, avg_audio_sec=0.0, avg_src_words=0.0, avg_tgt_chars=0.0)
    n = len(samples)
    total_audio = sum(s.audio_sec for s in samples)
    total_words = sum(len(s.src_text.plain.split()) for s in samples)
    total_chars = sum(sum(1 for ch in s.tgt_text.plain if not ch.isspace()) for s in samples)
    return DatasetStats(
        count=n,
        avg_audio_sec=total_audio / n,
        avg_src_words=total_words / n,
        avg_tgt_chars=total_chars / n,
    )


def stats_report(s: DatasetStats) -> dict:
    """Display form: averages rounded to two decimals, fixed key order."""
    return {
        "count": s.count,
        "avg_audio_sec": round(s.avg_audio_sec, 2),
        "avg_src_words": round(s.avg_src_words, 2),
        "avg_tgt_chars": round(s.avg_tgt_chars, 2),
    }


DECISIONS = ("accept", "reject", "edit")


def apply_decisions(
    candidates: dict[str, tuple[int, dict]],
    decisions: Iterable[tuple[int, dict]],
) -> tuple[list[BenchSample], list[str]]:
    """Resolve review decisions against candidate records.

    ``candidates`` maps sample id to (line, record) from an instruct-style
    dataset file; records must carry ``src_audio``/``audio_sec`` for accepted
    samples. Later decisions for the same id replace earlier ones. Returns
    (verified benchmark samples in decision order, rejected ids in decision
    order).
    """
    resolved: dict[str, tuple[int, dict]] = {}
    order: list[str] = []
    for line, decision in decisions:
        sample_id = _require(decision, line, "id", str)
        verb = decision.get("decision")
        if verb not in DECISIONS:
            raise SchemaError(line, "decision", f"expected one of {DECISIONS}")
        if sample_id not in candidates:
            raise UnknownId(line, sample_id)
        if sample_id not in resolved:
            order.append(sample_id)
        resolved[sample_id] = (line, decision)

    accepted: list[BenchSample] = []
    rejected: list[str] = []
    for sample_id in order:
        line, decision = resolved[sample_id]
        if decision["decision"] == "reject":
            rejected.append(sample_id)
            continue
        candidate_line, record = candidates[sample_id]
        if decision["decision"] == "edit":
            tgt_raw = decision.get("tgt_text")
            if not isinstance(tgt_raw, str):
                raise SchemaError(line, "tgt_text", "edit decision must supply tgt_text")
            tgt_line = line
        else:
            tgt_raw = record.get("tgt_text")
            if not isinstance(tgt_raw, str):
                raise SchemaError(candidate_line, "tgt_text", "candidate has no target to accept")
            tgt_line = candidate_line

        src_raw = _require(record, candidate_line, "src_text", str)
        src_text = _parse_markup(src_raw, candidate_line, "src_text")
        if not src_text.spans:
            raise SchemaError(candidate_line, "src_text", "source has no emphasized span")
        src_audio = record.get("src_audio")
        audio_sec = record.get("audio_sec")
        if not isinstance(src_audio, str):
            raise SchemaError(candidate_line, "src_audio", "accepted sample needs audio metadata")
        if not isinstance(audio_sec, (int, float)) or isinstance(audio_sec, bool) or audio_sec <= 0:
            raise SchemaError(candidate_line, "audio_sec", "must be a positive number")
        tgt_text = _parse_markup(tgt_raw, tgt_line, "tgt_text")
        if not tgt_text.spans:
            raise SchemaError(tgt_line, "tgt_text", "verified sample must contain an emphasized span")
        accepted.append(
            BenchSample(
                id=sample_id,
                src_text=src_text,
                src_audio=src_audio,
                audio_sec=float(audio_sec),
                tgt_text=tgt_text,
                verified=True,
            )
        )
    return accepted, rejected


def build_bench(
    candidates_path: str | Path,
    decisions_path: str | Path,
    out_path: str | Path,
    audit_path: str | Path,
) -> tuple[int, int]:
    """Assemble the benchmark from reviewed candidates; returns (kept, rejected)."""
    candidates: dict[str, tuple[int, dict]] = {}
    for line, record in read_jsonl(candidates_path):
        sample_id = _require(record, line, "id", str)
        if sample_id in candidates:
            raise SchemaError(line, "id", f"duplicate candidate id {sample_id!r}")
        candidates[sample_id] = (line, record)

    accepted, rejected = apply_decisions(candidates, read_jsonl(decisions_path))
    write_bench(accepted, out_path)
    with open(audit_path, "w", encoding="utf-8") as fh:
        for sample_id in rejected:
            fh.write(json.dumps({"id": sample_id, "decision": "reject"}, ensure_ascii=False))
            fh.write("\n")
    return len(accepted), len(rejected)
