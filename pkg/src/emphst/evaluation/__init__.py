"""Evaluation harness: SSR, BLEU, ASR-BLEU, consensus, and agreement metrics."""

from emphst.evaluation.errors import (  # noqa: F401
    EmptyInput,
    EvaluationError,
    JudgeUnparseable,
    LengthMismatch,
    NoOverlap,
)
from emphst.evaluation.bleu import (  # noqa: F401
    BleuScore,
    asr_bleu,
    bleu,
    tokenize_for_bleu,
)
from emphst.evaluation.ssr import (  # noqa: F401
    DEFAULT_SSR_PROMPT,
    MATCH,
    NO_MATCH,
    SSRJudgment,
    exact_match_verdict,
    judge_exact,
    judge_sample,
    ssr_score,
)
from emphst.evaluation.agreement import (  # noqa: F401
    UNRESOLVED,
    ConfusionCounts,
    ConsensusLabel,
    agreement_metrics,
    agreement_report,
    confusion,
    majority_vote,
    metrics_from_confusion,
)
