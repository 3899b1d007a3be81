"""The ``emphst`` command line: convert, lint, pipeline, eval, bench, cascade, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.
(``emphst convert`` exits 1 on the first malformed input line, with position
diagnostics on stderr, since malformed stdin is the command's one job to
police.)
"""

from __future__ import annotations

import json
import sys

import click

from emphst import dataset as ds
from emphst import evaluation as ev
from emphst.backends import BackendError
from emphst.cascade import cascade_translate
from emphst.instruct import (
    ConfigError,
    PipelineError,
    load_backend_tables,
    load_corpus,
    load_pipeline_config,
    run_pipeline,
    sample_for_review,
)
from emphst.markup import (
    MarkupError,
    ParseError,
    TagDialect,
    convert as convert_text,
    parse as parse_text,
    render as render_text,
    strip_markers,
    validate,
)
from emphst.review.store import StoreError

DIALECTS = click.Choice(["md", "strong"])
TOKENIZATIONS = {"char": "character", "ws": "whitespace"}


def emit(report: dict) -> None:
    click.echo(json.dumps(report, ensure_ascii=False))


@click.group()
def cli():
    """Emphasis-preserving speech translation toolkit."""


@cli.command()
@click.option("--from", "from_dialect", type=DIALECTS, required=True, help="input dialect")
@click.option("--to", "to_dialect", type=DIALECTS, required=True, help="output dialect")
def convert(from_dialect: str, to_dialect: str):
    """Convert tagged lines between dialects (stdin to stdout)."""
    src = TagDialect.from_name(from_dialect)
    dst = TagDialect.from_name(to_dialect)
    for line_no, line in enumerate(sys.stdin, start=1):
        text = line.rstrip("\n")
        try:
            click.echo(convert_text(text, src, dst))
        except ParseError as exc:
            click.echo(f"line {line_no}: {exc}", err=True)
            raise click.exceptions.Exit(1)


@cli.command()
@click.option("--dialect", type=DIALECTS, required=True)
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def lint(dialect: str, file: str):
    """Print grammar violations in FILE, one per line."""
    d = TagDialect.from_name(dialect)
    found = 0
    with open(file, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            for violation in validate(line.rstrip("\n"), d):
                click.echo(f"{file}:{line_no}: {violation}")
                found += 1
    if found:
        raise click.exceptions.Exit(2)


@cli.group()
def pipeline():
    """EmphST-Instruct data construction."""


@pipeline.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path(), default=None)
def pipeline_run(config_path, in_path, out_path, log_path):
    """Fan out a corpus to the experts, judge, and write the dataset."""
    config = load_pipeline_config(config_path)
    run = run_pipeline(load_corpus(in_path), config, out_path, log_path=log_path)
    emit({"config_digest": run.config_digest, "counts": run.counts, "seed": run.seed})


@pipeline.command("sample")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--rate", required=True, type=float)
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def pipeline_sample(in_path, rate, seed, out_path):
    """Draw a seeded review sample from a dataset."""
    count = sample_for_review(in_path, rate, seed, out_path)
    emit({"sampled": count, "rate": rate, "seed": seed})


@cli.group("eval")
def eval_group():
    """Evaluation harness."""


@eval_group.command()
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--judge", "judge_name", default="exact", show_default=True,
              help="'exact' or a backend id defined in --config")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def ssr(gold_path, pred_path, judge_name, config_path, out_path):
    """Judge predictions against benchmark targets and report SSR."""
    gold = {s.id: s.tgt_text for s in ds.load_bench(gold_path)}
    pairs = []
    for line, record in ds.read_jsonl(pred_path):
        sample_id = record.get("id")
        tgt_raw = record.get("tgt_text")
        if not isinstance(sample_id, str):
            raise ds.SchemaError(line, "id")
        if not isinstance(tgt_raw, str):
            raise ds.SchemaError(line, "tgt_text")
        if sample_id not in gold:
            raise ds.UnknownId(line, sample_id)
        try:
            predicted = parse_text(tgt_raw, TagDialect.MARKDOWN)
        except ParseError as exc:
            raise ds.MarkupFieldError(line, "tgt_text", exc) from exc
        pairs.append((sample_id, gold[sample_id], predicted))

    if not pairs:
        raise ev.EmptyInput("prediction file is empty")
    pairs.sort(key=lambda p: p[0])

    if judge_name == "exact":
        judgments = [ev.judge_exact(g, p, sample_id=sid) for sid, g, p in pairs]
    else:
        if config_path is None:
            raise ConfigError("--config is required when --judge is a backend id")
        judge = load_backend_tables(config_path, "judge")["judge"]
        if judge.id != judge_name:
            raise ConfigError(f"--judge {judge_name!r} does not match [judge].id {judge.id!r}")
        judgments = [ev.judge_sample(g, p, judge, sample_id=sid) for sid, g, p in pairs]

    with open(out_path, "w", encoding="utf-8") as fh:
        for j in judgments:
            fh.write(json.dumps(
                {"id": j.sample_id, "verdict": j.verdict, "rationale": j.rationale,
                 "judge_id": j.judge_id},
                ensure_ascii=False))
            fh.write("\n")
    emit({"ssr": ev.ssr_score(judgments), "judged": len(judgments),
          "judge": judgments[0].judge_id})


@eval_group.command()
@click.option("--hyp", "hyp_path", required=True, type=click.Path(exists=True))
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True))
@click.option("--tok", type=click.Choice(sorted(TOKENIZATIONS)), default="ws", show_default=True)
def bleu(hyp_path, ref_path, tok):
    """Corpus BLEU between two line-aligned text files (markers stripped)."""
    mode = TOKENIZATIONS[tok]
    md = TagDialect.MARKDOWN
    with open(hyp_path, encoding="utf-8") as fh:
        hyps = [ev.tokenize_for_bleu(strip_markers(line, md), mode) for line in fh.read().splitlines()]
    with open(ref_path, encoding="utf-8") as fh:
        refs = [ev.tokenize_for_bleu(strip_markers(line, md), mode) for line in fh.read().splitlines()]
    score = ev.bleu(hyps, refs)
    emit({
        "score": score.score,
        "precisions": list(score.precisions),
        "brevity_penalty": score.brevity_penalty,
        "hyp_length": score.hyp_length,
        "ref_length": score.ref_length,
    })


@eval_group.command()
@click.option("--judge", "judge_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
def agreement(judge_path, annotations_path):
    """Judge-vs-human agreement against the majority-vote consensus."""
    judgments = []
    for line, record in ds.read_jsonl(judge_path):
        if not isinstance(record.get("id"), str) or record.get("verdict") not in ("match", "no_match"):
            raise ds.SchemaError(line, "verdict", "need id plus match/no_match verdict")
        judgments.append(ev.SSRJudgment(
            sample_id=record["id"], verdict=record["verdict"],
            rationale=record.get("rationale", ""), judge_id=record.get("judge_id", ""),
        ))
    by_sample: dict[str, list[str]] = {}
    for line, record in ds.read_jsonl(annotations_path):
        verdict = record.get("verdict")
        if verdict is None:
            continue  # span-style annotations carry no verdict
        if not isinstance(record.get("id"), str):
            raise ds.SchemaError(line, "id")
        by_sample.setdefault(record["id"], []).append(verdict)
    consensus = ev.majority_vote(by_sample)
    emit(ev.agreement_report(judgments, consensus))


@cli.group()
def bench():
    """Benchmark dataset tools."""


@bench.command("stats")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def bench_stats(file):
    """Sample count and average duration/word/character statistics."""
    emit(ds.stats_report(ds.stats(ds.load_bench(file))))


@bench.command("build")
@click.option("--candidates", "candidates_path", required=True, type=click.Path(exists=True))
@click.option("--decisions", "decisions_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--audit", "audit_path", required=True, type=click.Path())
def bench_build(candidates_path, decisions_path, out_path, audit_path):
    """Assemble the verified benchmark from reviewed candidates."""
    kept, rejected = ds.build_bench(candidates_path, decisions_path, out_path, audit_path)
    emit({"kept": kept, "rejected": rejected})


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="TOML with [s2tt] and [tts] tables")
@click.option("--audio", "audio_ref", required=True)
@click.option("--id", "sample_id", default="")
@click.option("--language", default="Chinese", show_default=True)
def cascade(config_path, audio_ref, sample_id, language):
    """Run one utterance through S2TT, tag conversion, and TTS."""
    backends = load_backend_tables(config_path, "s2tt", "tts")
    result = cascade_translate(
        audio_ref, backends["s2tt"], backends["tts"],
        sample_id=sample_id, target_language=language,
    )
    emit({
        "sample_id": result.sample_id,
        "tagged_text": render_text(result.tagged_text, TagDialect.MARKDOWN),
        "tts_prompt": result.tts_prompt,
        "audio_out": result.audio_out,
        "stage_latencies": result.stage_latencies,
    })


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--port", type=int, default=8321, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="static UI bundle to serve at /")
def serve(store_path, port, ui_dir):
    """Run the human review service."""
    from emphst.review.service import serve_review

    serve_review(store_path, port, static_dir=ui_dir)


def main(argv: list[str] | None = None) -> int:
    try:
        # in non-standalone mode click hands back Exit codes as the return value
        rv = cli.main(args=argv, prog_name="emphst", standalone_mode=False)
        if isinstance(rv, int):
            return rv
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except (MarkupError, ds.DatasetError, ev.EvaluationError, PipelineError,
            ConfigError, StoreError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
