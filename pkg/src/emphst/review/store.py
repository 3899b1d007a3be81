"""Durable review store: task samples, an append-only journal, and exports.

The store lives in one directory:

    samples.jsonl     tasks to review (instruct-style records, read-only)
    journal.jsonl     every annotation/decision event, appended before ack
    judgments.jsonl   optional SSR judge verdicts, enables the agreement view

Annotations are keyed by (sample_id, annotator_id); resubmission replaces.
Decisions are keyed by sample_id; the latest wins. The in-memory index is
rebuilt by replaying the journal at startup, so the process can die at any
point after an acknowledged write without losing data.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path

from emphst.dataset import apply_decisions, write_bench
from emphst.evaluation import SSRJudgment, agreement_report, majority_vote
from emphst.markup import TagDialect, parse, validate

MD = TagDialect.MARKDOWN

SAMPLES_FILE = "samples.jsonl"
JOURNAL_FILE = "journal.jsonl"
JUDGMENTS_FILE = "judgments.jsonl"


class StoreError(ValueError):
    pass


class UnknownSample(StoreError):
    pass


class InvalidPayload(StoreError):
    def __init__(self, message: str, violations: list | None = None):
        super().__init__(message)
        self.violations = violations or []


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class ReviewStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.samples: dict[str, dict] = {}
        self.sample_order: list[str] = []
        # (sample_id, annotator_id) -> annotation record
        self.annotations: dict[tuple[str, str], dict] = {}
        # sample_id -> decision record
        self.decisions: dict[str, dict] = {}
        self._write_lock = threading.Lock()
        self._load_samples()
        self._replay_journal()

    # -- loading ---------------------------------------------------------

    def _load_samples(self) -> None:
        path = self.root / SAMPLES_FILE
        if not path.is_file():
            raise StoreError(f"store has no {SAMPLES_FILE}: {path}")
        from emphst.dataset import read_jsonl

        for line, record in read_jsonl(path):
            sample_id = record.get("id")
            if not isinstance(sample_id, str):
                raise StoreError(f"{SAMPLES_FILE} line {line}: missing id")
            if sample_id in self.samples:
                raise StoreError(f"{SAMPLES_FILE} line {line}: duplicate id {sample_id!r}")
            self.samples[sample_id] = record
            self.sample_order.append(sample_id)

    def _replay_journal(self) -> None:
        path = self.root / JOURNAL_FILE
        if not path.is_file():
            return
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                if not raw.strip():
                    continue
                event = json.loads(raw)
                if event.get("type") == "annotation":
                    self.annotations[(event["sample_id"], event["annotator_id"])] = event
                elif event.get("type") == "decision":
                    self.decisions[event["sample_id"]] = event

    def _append_event(self, event: dict) -> None:
        with self._write_lock:
            with open(self.root / JOURNAL_FILE, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False))
                fh.write("\n")
                fh.flush()
                os.fsync(fh.fileno())

    # -- mutations -------------------------------------------------------

    def submit_annotation(self, sample_id: str, annotator_id: str, payload: dict) -> dict:
        if sample_id not in self.samples:
            raise UnknownSample(sample_id)
        if not annotator_id:
            raise InvalidPayload("annotator_id must be non-empty")
        self._check_payload(sample_id, payload)
        event = {
            "type": "annotation",
            "sample_id": sample_id,
            "annotator_id": annotator_id,
            "payload": payload,
            "submitted_at": _now_iso(),
        }
        self._append_event(event)
        self.annotations[(sample_id, annotator_id)] = event
        return event

    def _check_payload(self, sample_id: str, payload: dict) -> None:
        if not isinstance(payload, dict):
            raise InvalidPayload("payload must be an object")
        has_verdict = "verdict" in payload
        has_spans = "spans" in payload
        if has_verdict == has_spans:
            raise InvalidPayload("payload must carry exactly one of 'verdict' or 'spans'")
        if has_verdict:
            if payload["verdict"] not in ("match", "no_match"):
                raise InvalidPayload("verdict must be 'match' or 'no_match'")
            return
        spans = payload["spans"]
        if not isinstance(spans, list):
            raise InvalidPayload("spans must be a list of [start, end] pairs")
        tgt_raw = self.samples[sample_id].get("tgt_text") or ""
        plain = parse(tgt_raw, MD).plain if tgt_raw else ""
        prev_end = 0
        for pair in spans:
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, int) for x in pair)
            ):
                raise InvalidPayload(f"bad span {pair!r}: expected [start, end]")
            start, end = pair
            if not (0 <= start < end <= len(plain)):
                raise InvalidPayload(f"span [{start}, {end}) out of bounds for target of length {len(plain)}")
            if start < prev_end:
                raise InvalidPayload(f"span [{start}, {end}) overlaps the previous span")
            if not plain[start:end].strip():
                raise InvalidPayload(f"span [{start}, {end}) selects only whitespace")
            prev_end = end

    def submit_decision(self, sample_id: str, decision: str, tgt_text: str | None = None) -> dict:
        if sample_id not in self.samples:
            raise UnknownSample(sample_id)
        if decision not in ("accept", "reject", "edit"):
            raise InvalidPayload("decision must be accept, reject, or edit")
        if decision == "edit":
            if not isinstance(tgt_text, str):
                raise InvalidPayload("edit decision must supply tgt_text")
            violations = validate(tgt_text, MD)
            if violations:
                raise InvalidPayload(
                    "tgt_text is not well-formed markup",
                    violations=[
                        {"kind": v.kind.value, "position": v.position, "message": v.message}
                        for v in violations
                    ],
                )
        event = {"type": "decision", "sample_id": sample_id, "decision": decision,
                 "submitted_at": _now_iso()}
        if decision == "edit":
            event["tgt_text"] = tgt_text
        self._append_event(event)
        self.decisions[sample_id] = event
        return event

    # -- queries ---------------------------------------------------------

    def status_of(self, sample_id: str) -> str:
        return "done" if sample_id in self.decisions else "pending"

    def list_samples(self, status: str | None = None) -> list[dict]:
        out = []
        for sample_id in self.sample_order:
            if status is not None and self.status_of(sample_id) != status:
                continue
            out.append(self.task_summary(sample_id))
        return out

    def task_summary(self, sample_id: str) -> dict:
        record = self.samples[sample_id]
        return {
            "id": sample_id,
            "status": self.status_of(sample_id),
            "src_text": record.get("src_text"),
            "tgt_text": record.get("tgt_text"),
            "annotation_count": sum(1 for key in self.annotations if key[0] == sample_id),
        }

    def task_view(self, sample_id: str) -> dict:
        if sample_id not in self.samples:
            raise UnknownSample(sample_id)
        record = self.samples[sample_id]
        view = {
            "id": sample_id,
            "status": self.status_of(sample_id),
            "src_text": record.get("src_text"),
            "tgt_text": record.get("tgt_text"),
            "candidates": record.get("candidates", []),
            "judge_rationale": record.get("judge_rationale"),
            "annotations": [
                event for (sid, _), event in sorted(self.annotations.items()) if sid == sample_id
            ],
            "decision": self.decisions.get(sample_id),
        }
        for field in ("src_audio", "audio_sec"):
            if field in record:
                view[field] = record[field]
        # parsed spans so clients never touch raw markers for display
        for side in ("src", "tgt"):
            raw = record.get(f"{side}_text")
            if isinstance(raw, str):
                try:
                    tagged = parse(raw, MD)
                except ValueError:
                    continue
                view[f"{side}_plain"] = tagged.plain
                view[f"{side}_spans"] = tagged.offsets()
        return view

    # -- derived ---------------------------------------------------------

    def verdict_annotations(self) -> dict[str, list[str]]:
        by_sample: dict[str, list[str]] = {}
        for (sample_id, _), event in sorted(self.annotations.items()):
            verdict = event["payload"].get("verdict")
            if verdict is not None:
                by_sample.setdefault(sample_id, []).append(verdict)
        return by_sample

    def load_judgments(self) -> list[SSRJudgment]:
        path = self.root / JUDGMENTS_FILE
        if not path.is_file():
            raise StoreError(f"store has no {JUDGMENTS_FILE}; run the SSR evaluation first")
        from emphst.dataset import read_jsonl

        judgments = []
        for line, record in read_jsonl(path):
            judgments.append(
                SSRJudgment(
                    sample_id=record.get("id", ""),
                    verdict=record.get("verdict", ""),
                    rationale=record.get("rationale", ""),
                    judge_id=record.get("judge_id", ""),
                )
            )
        return judgments

    def agreement(self) -> dict:
        judgments = self.load_judgments()
        consensus = majority_vote(self.verdict_annotations())
        return agreement_report(judgments, consensus)

    def export(self) -> dict[str, str]:
        """Write benchmark, audit, and annotations files; returns their paths."""
        candidates = {
            sample_id: (i + 1, self.samples[sample_id])
            for i, sample_id in enumerate(self.sample_order)
        }
        decision_records = [
            (i + 1, {"id": sid, "decision": ev["decision"], **({"tgt_text": ev["tgt_text"]} if "tgt_text" in ev else {})})
            for i, (sid, ev) in enumerate(
                (sid, self.decisions[sid]) for sid in self.sample_order if sid in self.decisions
            )
        ]
        accepted, rejected = apply_decisions(candidates, decision_records)

        bench_path = self.root / "bench.jsonl"
        audit_path = self.root / "audit.jsonl"
        annotations_path = self.root / "annotations.jsonl"
        write_bench(accepted, bench_path)
        with open(audit_path, "w", encoding="utf-8") as fh:
            for sample_id in rejected:
                fh.write(json.dumps({"id": sample_id, "decision": "reject"}, ensure_ascii=False))
                fh.write("\n")
        with open(annotations_path, "w", encoding="utf-8") as fh:
            for (sample_id, annotator_id), event in sorted(self.annotations.items()):
                record = {"id": sample_id, "annotator_id": annotator_id}
                record.update(event["payload"])
                fh.write(json.dumps(record, ensure_ascii=False))
                fh.write("\n")
        return {
            "benchmark": str(bench_path),
            "audit": str(audit_path),
            "annotations": str(annotations_path),
        }
