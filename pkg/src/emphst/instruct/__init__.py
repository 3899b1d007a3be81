"""The EmphST-Instruct data-construction pipeline."""

from emphst.instruct.config import (  # noqa: F401
    ConfigError,
    PipelineConfig,
    load_backend_tables,
    load_pipeline_config,
)
from emphst.instruct.pipeline import (  # noqa: F401
    AllExpertsFailed,
    NoValidCandidate,
    PipelineError,
    PipelineRun,
    SelectionRecord,
    SourceSample,
    TranslationCandidate,
    fan_out_translate,
    load_corpus,
    run_pipeline,
    sample_for_review,
    select_best,
    validate_candidate,
)
from emphst.instruct.prompts import DEFAULT_EXPERT_PROMPT, DEFAULT_JUDGE_PROMPT  # noqa: F401
