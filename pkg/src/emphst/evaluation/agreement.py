"""Annotator consensus by majority vote and judge-vs-human agreement metrics.

Per-sample human verdicts are merged by strict majority into a single
consensus label; exact ties stay unresolved and are excluded from the
agreement denominators. Agreement treats "match" as the positive class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from emphst.evaluation.errors import NoOverlap
from emphst.evaluation.ssr import MATCH, NO_MATCH, SSRJudgment

UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class ConsensusLabel:
    sample_id: str
    label: str  # "match" | "no_match" | "unresolved"
    votes: tuple[tuple[str, int], ...]  # ((verdict, count), ...), fixed order
    annotator_count: int


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def majority_vote(annotations: Mapping[str, Sequence[str]]) -> list[ConsensusLabel]:
    """Merge per-sample verdict lists into consensus labels, sorted by sample id."""
    labels = []
    for sample_id in sorted(annotations):
        verdicts = annotations[sample_id]
        if not verdicts:
            raise ValueError(f"sample {sample_id!r} has no annotations")
        match_votes = 0
        no_match_votes = 0
        for verdict in verdicts:
            if verdict == MATCH:
                match_votes += 1
            elif verdict == NO_MATCH:
                no_match_votes += 1
            else:
                raise ValueError(f"sample {sample_id!r}: unknown verdict {verdict!r}")
        if match_votes > no_match_votes:
            label = MATCH
        elif no_match_votes > match_votes:
            label = NO_MATCH
        else:
            label = UNRESOLVED
        labels.append(
            ConsensusLabel(
                sample_id=sample_id,
                label=label,
                votes=((MATCH, match_votes), (NO_MATCH, no_match_votes)),
                annotator_count=len(verdicts),
            )
        )
    return labels


def confusion(judge: Sequence[SSRJudgment], consensus: Sequence[ConsensusLabel]) -> ConfusionCounts:
    """Tally judge verdicts against resolved consensus labels, joined by sample id."""
    consensus_by_id = {c.sample_id: c.label for c in consensus if c.label != UNRESOLVED}
    tp = fp = fn = tn = 0
    joined = 0
    for judgment in judge:
        label = consensus_by_id.get(judgment.sample_id)
        if label is None:
            continue
        joined += 1
        judge_match = judgment.verdict == MATCH
        human_match = label == MATCH
        if judge_match and human_match:
            tp += 1
        elif judge_match and not human_match:
            fp += 1
        elif not judge_match and human_match:
            fn += 1
        else:
            tn += 1
    if joined == 0:
        raise NoOverlap("no sample ids shared between judge verdicts and resolved consensus")
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def metrics_from_confusion(counts: ConfusionCounts) -> dict[str, float]:
    """Accuracy, precision, recall, F1 with the usual zero-denominator conventions."""
    total = counts.total
    accuracy = (counts.tp + counts.tn) / total
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


def agreement_metrics(
    judge: Sequence[SSRJudgment], consensus: Sequence[ConsensusLabel]
) -> tuple[dict[str, float], ConfusionCounts]:
    counts = confusion(judge, consensus)
    return metrics_from_confusion(counts), counts


def agreement_report(
    judge: Sequence[SSRJudgment], consensus: Sequence[ConsensusLabel]
) -> dict[str, object]:
    """The fixed-key-order JSON report shared by the CLI and the review service."""
    metrics, counts = agreement_metrics(judge, consensus)
    return {
        "accuracy": metrics["accuracy"],
        "precision": metrics["precision"],
        "recall": metrics["recall"],
        "f1": metrics["f1"],
        "tp": counts.tp,
        "fp": counts.fp,
        "fn": counts.fn,
        "tn": counts.tn,
        "resolved_samples": counts.total,
    }
