"""Emphasis-preserving speech translation toolkit.

Non-neural machinery for an emphasis-preserving S2ST system: the inline
emphasis markup grammar, pluggable chat-completion backends with
deterministic mocks, the multi-expert translation data pipeline, benchmark
dataset handling, the evaluation harness (SSR, BLEU, ASR-BLEU, majority
vote, judge-vs-human agreement), the cascade orchestrator, and the human
review service.
"""

__version__ = "0.1.0"

from emphst.markup import (  # noqa: F401
    EmphasisSpan,
    EmphasisTaggedText,
    TagDialect,
    convert,
    parse,
    render,
    strip_markers,
    validate,
)
