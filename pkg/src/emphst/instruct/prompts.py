"""Default prompt templates for the data-construction pipeline.

Both templates are plain text with literal placeholders substituted by
string replacement (never str.format, so braces in instructions are safe):

* expert template: ``{source}`` -- the Markdown-tagged source sentence;
* judge template: ``{source}`` and ``{candidates}`` -- candidates arrive as
  lines ``A. <tagged text>``, ``B. <tagged text>``, ...

The structured trailing lines (``SOURCE:``, the lettered list) are load
bearing: the offline mock experts and judges locate their inputs by them,
and the judge reply contract (first non-blank line is a single candidate
letter) is what :func:`emphst.instruct.pipeline.select_best` parses.
Deployments tune the surrounding instructions freely via config overrides;
the human review loop exists precisely to iterate on this wording.
"""

DEFAULT_EXPERT_PROMPT = """\
You are a professional English-to-Chinese translator working on emphasis-preserving translation.
Translate the sentence into natural Chinese. The speaker stressed the words wrapped in **double
asterisks**; wrap the Chinese words carrying that same contrastive focus in ** markers too.
Use exactly one pair of ** per stressed word and output only the translated sentence.
SOURCE: {source}
"""

DEFAULT_JUDGE_PROMPT = """\
You are reviewing candidate emphasis-preserving translations of one English sentence.
Pick the candidate whose wording is most natural and whose **emphasized** words best mirror
the emphasis of the source. Reply with the single letter of the best candidate on the first
line, followed by a one-line rationale.
SOURCE: {source}
CANDIDATES:
{candidates}
"""
