import json
import random

import pytest

from emphst.dataset import (
    BenchSample,
    DatasetStats,
    MarkupFieldError,
    SchemaError,
    UnknownId,
    build_bench,
    load_bench,
    sample_to_record,
    stats,
    stats_report,
    write_bench,
)
from emphst.markup import TagDialect, ViolationKind, parse

from oracles import oracle_stats

MD = TagDialect.MARKDOWN


def record(i=1, **overrides):
    base = {
        "id": f"s{i:03d}",
        "src_text": "I didn't say **he** stole the money.",
        "src_audio": f"audio/s{i:03d}.wav",
        "audio_sec": 4.2,
        "tgt_text": "我没有说**他**偷了钱。",
        "verified": True,
    }
    base.update(overrides)
    return base


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def make_sample(i=1, **overrides):
    r = record(i, **overrides)
    return BenchSample(
        id=r["id"],
        src_text=parse(r["src_text"], MD),
        src_audio=r["src_audio"],
        audio_sec=r["audio_sec"],
        tgt_text=parse(r["tgt_text"], MD),
        verified=r["verified"],
    )


class TestLoadBench:
    def test_well_formed(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1), record(2)])
        samples = load_bench(path)
        assert len(samples) == 2
        assert samples[0].src_text.span_texts() == ["he"]
        assert samples[1].tgt_text.span_texts() == ["他"]

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        records = [record(1), record(2)]
        del records[1]["tgt_text"]
        write_jsonl(path, records)
        with pytest.raises(SchemaError) as exc_info:
            load_bench(path)
        assert exc_info.value.line == 2
        assert exc_info.value.field == "tgt_text"

    def test_markup_error_carries_line_and_violation(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1, tgt_text="****")])
        with pytest.raises(MarkupFieldError) as exc_info:
            load_bench(path)
        assert exc_info.value.line == 1
        assert exc_info.value.violation.kind is ViolationKind.EMPTY_SPAN

    def test_nonpositive_audio_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1, audio_sec=0)])
        with pytest.raises(SchemaError) as exc_info:
            load_bench(path)
        assert exc_info.value.field == "audio_sec"

    def test_source_without_emphasis_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1, src_text="no emphasis at all")])
        with pytest.raises(SchemaError) as exc_info:
            load_bench(path)
        assert exc_info.value.field == "src_text"

    def test_verified_needs_target_emphasis(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1, tgt_text="没有强调", verified=True)])
        with pytest.raises(SchemaError) as exc_info:
            load_bench(path)
        assert exc_info.value.field == "tgt_text"

    def test_unverified_target_may_lack_emphasis(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_jsonl(path, [record(1, tgt_text="没有强调", verified=False)])
        assert len(load_bench(path)) == 1

    def test_round_trip(self, tmp_path):
        samples = [make_sample(1), make_sample(2, audio_sec=3.0)]
        path = tmp_path / "bench.jsonl"
        write_bench(samples, path)
        assert load_bench(path) == samples
        # byte-stable: writing the loaded samples reproduces the file
        again = tmp_path / "again.jsonl"
        write_bench(load_bench(path), again)
        assert path.read_bytes() == again.read_bytes()

    def test_record_field_order(self):
        keys = list(sample_to_record(make_sample()))
        assert keys == ["id", "src_text", "src_audio", "audio_sec", "tgt_text", "verified"]


class TestStats:
    def test_two_sample_mean(self):
        samples = [make_sample(1, audio_sec=3.0), make_sample(2, audio_sec=5.3)]
        got = stats(samples)
        assert got.avg_audio_sec == pytest.approx(4.15, abs=1e-12)
        assert got.count == 2

    def test_empty(self):
        assert stats([]) == DatasetStats(0, 0.0, 0.0, 0.0)

    def test_word_and_character_units(self):
        sample = make_sample(
            1,
            src_text="say **it** loud",
            tgt_text="大声 说**它**啊",  # 大声说它啊 = 5 non-whitespace chars
        )
        got = stats([sample])
        assert got.avg_src_words == 3.0
        assert got.avg_tgt_chars == 5.0

    def test_matches_naive_recomputation(self):
        rng = random.Random(7)
        samples = [
            make_sample(
                i,
                audio_sec=rng.uniform(0.5, 12.0),
                src_text=("**word** " + " ".join("word" for _ in range(rng.randint(0, 6)))).strip(),
                tgt_text="**他**" + "词" * rng.randint(0, 9),
            )
            for i in range(25)
        ]
        got = stats(samples)
        count, audio, words, chars = oracle_stats(samples)
        assert got.count == count
        assert got.avg_audio_sec == pytest.approx(audio, abs=0)
        assert got.avg_src_words == pytest.approx(words, abs=0)
        assert got.avg_tgt_chars == pytest.approx(chars, abs=0)

    def test_display_rounding(self):
        report = stats_report(DatasetStats(3, 4.19123, 6.94992, 10.8651))
        assert report == {
            "count": 3,
            "avg_audio_sec": 4.19,
            "avg_src_words": 6.95,
            "avg_tgt_chars": 10.87,
        }


class TestBuildBench:
    def write_candidates(self, tmp_path, n=5):
        path = tmp_path / "candidates.jsonl"
        write_jsonl(path, [record(i) for i in range(1, n + 1)])
        return path

    def test_accept_reject_split(self, tmp_path):
        candidates = self.write_candidates(tmp_path)
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(
            decisions,
            [
                {"id": "s001", "decision": "accept"},
                {"id": "s002", "decision": "reject"},
                {"id": "s003", "decision": "accept"},
                {"id": "s004", "decision": "reject"},
                {"id": "s005", "decision": "accept"},
            ],
        )
        out = tmp_path / "bench.jsonl"
        audit = tmp_path / "audit.jsonl"
        kept, rejected = build_bench(candidates, decisions, out, audit)
        assert (kept, rejected) == (3, 2)
        samples = load_bench(out)
        assert [s.id for s in samples] == ["s001", "s003", "s005"]
        assert all(s.verified for s in samples)
        audit_ids = [json.loads(line)["id"] for line in audit.read_text().splitlines()]
        assert audit_ids == ["s002", "s004"]

    def test_edit_replaces_target(self, tmp_path):
        candidates = self.write_candidates(tmp_path, n=1)
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(decisions, [{"id": "s001", "decision": "edit", "tgt_text": "**好**吧"}])
        out = tmp_path / "bench.jsonl"
        build_bench(candidates, decisions, out, tmp_path / "audit.jsonl")
        (sample,) = load_bench(out)
        assert sample.tgt_text.plain == "好吧"
        assert sample.tgt_text.span_texts() == ["好"]

    def test_edit_markup_validated(self, tmp_path):
        candidates = self.write_candidates(tmp_path, n=1)
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(decisions, [{"id": "s001", "decision": "edit", "tgt_text": "**bad"}])
        with pytest.raises(MarkupFieldError) as exc_info:
            build_bench(candidates, decisions, tmp_path / "o.jsonl", tmp_path / "a.jsonl")
        assert exc_info.value.line == 1
        assert exc_info.value.violation.kind is ViolationKind.UNBALANCED_DELIMITER

    def test_unknown_id(self, tmp_path):
        candidates = self.write_candidates(tmp_path, n=1)
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(decisions, [{"id": "nope", "decision": "accept"}])
        with pytest.raises(UnknownId):
            build_bench(candidates, decisions, tmp_path / "o.jsonl", tmp_path / "a.jsonl")

    def test_later_decision_replaces_earlier(self, tmp_path):
        candidates = self.write_candidates(tmp_path, n=1)
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(
            decisions,
            [{"id": "s001", "decision": "reject"}, {"id": "s001", "decision": "accept"}],
        )
        out = tmp_path / "bench.jsonl"
        kept, rejected = build_bench(candidates, decisions, out, tmp_path / "a.jsonl")
        assert (kept, rejected) == (1, 0)

    def test_accept_without_audio_metadata_rejected(self, tmp_path):
        candidates = tmp_path / "candidates.jsonl"
        bad = record(1)
        del bad["src_audio"]
        write_jsonl(candidates, [bad])
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(decisions, [{"id": "s001", "decision": "accept"}])
        with pytest.raises(SchemaError) as exc_info:
            build_bench(candidates, decisions, tmp_path / "o.jsonl", tmp_path / "a.jsonl")
        assert exc_info.value.field == "src_audio"
