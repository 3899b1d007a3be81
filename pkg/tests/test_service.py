import json

import pytest
from fastapi.testclient import TestClient

from emphst.evaluation import SSRJudgment, agreement_report, majority_vote
from emphst.review.service import create_app
from emphst.review.store import ReviewStore, StoreError


def seed_store(tmp_path, n=3, judgments=None):
    root = tmp_path / "store"
    root.mkdir(exist_ok=True)
    with open(root / "samples.jsonl", "w", encoding="utf-8") as fh:
        for i in range(1, n + 1):
            fh.write(json.dumps({
                "id": f"s{i:03d}",
                "src_text": "I didn't say **he** stole the money.",
                "tgt_text": "我没有说**他**偷了钱。",
                "src_audio": f"audio/s{i:03d}.wav",
                "audio_sec": 4.0,
                "candidates": [{"expert_id": "e1", "text": "我没有说**他**偷了钱。", "valid": True}],
                "judge_rationale": "span count matches",
                "status": "selected",
            }, ensure_ascii=False) + "\n")
    if judgments:
        with open(root / "judgments.jsonl", "w", encoding="utf-8") as fh:
            for sample_id, verdict in judgments:
                fh.write(json.dumps({"id": sample_id, "verdict": verdict,
                                     "rationale": "", "judge_id": "exact"}) + "\n")
    return root


@pytest.fixture
def store_root(tmp_path):
    return seed_store(tmp_path)


@pytest.fixture
def client(store_root):
    return TestClient(create_app(ReviewStore(store_root)))


class TestSamplesApi:
    def test_list_all(self, client):
        got = client.get("/api/samples")
        assert got.status_code == 200
        samples = got.json()["samples"]
        assert [s["id"] for s in samples] == ["s001", "s002", "s003"]
        assert all(s["status"] == "pending" for s in samples)

    def test_status_filter(self, client):
        client.post("/api/samples/s001/decision", json={"decision": "accept"})
        pending = client.get("/api/samples", params={"status": "pending"}).json()["samples"]
        done = client.get("/api/samples", params={"status": "done"}).json()["samples"]
        assert [s["id"] for s in pending] == ["s002", "s003"]
        assert [s["id"] for s in done] == ["s001"]

    def test_task_view_includes_parsed_spans(self, client):
        view = client.get("/api/samples/s001").json()
        assert view["src_plain"] == "I didn't say he stole the money."
        assert view["src_spans"] == [[13, 15]]
        assert view["tgt_plain"] == "我没有说他偷了钱。"
        assert view["tgt_spans"] == [[4, 5]]
        assert view["candidates"][0]["expert_id"] == "e1"

    def test_unknown_sample_404(self, client):
        assert client.get("/api/samples/nope").status_code == 404


class TestAnnotations:
    def test_submit_and_read_back(self, client):
        posted = client.post(
            "/api/samples/s001/annotations",
            json={"annotator_id": "a1", "verdict": "match"},
        )
        assert posted.status_code == 200
        view = client.get("/api/samples/s001").json()
        assert len(view["annotations"]) == 1
        assert view["annotations"][0]["payload"] == {"verdict": "match"}

    def test_resubmission_replaces(self, client):
        for verdict in ("match", "no_match"):
            client.post("/api/samples/s001/annotations",
                        json={"annotator_id": "a1", "verdict": verdict})
        view = client.get("/api/samples/s001").json()
        assert len(view["annotations"]) == 1
        assert view["annotations"][0]["payload"] == {"verdict": "no_match"}

    def test_span_payload_validated(self, client):
        ok = client.post("/api/samples/s001/annotations",
                         json={"annotator_id": "a1", "spans": [[4, 5]]})
        assert ok.status_code == 200
        bad = client.post("/api/samples/s001/annotations",
                          json={"annotator_id": "a1", "spans": [[4, 99]]})
        assert bad.status_code == 422

    def test_empty_span_list_means_no_emphasis(self, client):
        got = client.post("/api/samples/s001/annotations",
                          json={"annotator_id": "a1", "spans": []})
        assert got.status_code == 200

    def test_unknown_sample_404(self, client):
        got = client.post("/api/samples/zzz/annotations",
                          json={"annotator_id": "a1", "verdict": "match"})
        assert got.status_code == 404

    def test_verdict_or_spans_required(self, client):
        got = client.post("/api/samples/s001/annotations", json={"annotator_id": "a1"})
        assert got.status_code == 422

    def test_durable_across_restart(self, store_root):
        client = TestClient(create_app(ReviewStore(store_root)))
        client.post("/api/samples/s001/annotations",
                    json={"annotator_id": "a1", "verdict": "match"})
        reopened = ReviewStore(store_root)
        assert ("s001", "a1") in reopened.annotations


class TestDecisions:
    def test_accept(self, client):
        got = client.post("/api/samples/s001/decision", json={"decision": "accept"})
        assert got.status_code == 200
        assert client.get("/api/samples/s001").json()["status"] == "done"

    def test_edit_validates_markup(self, client):
        bad = client.post("/api/samples/s001/decision",
                          json={"decision": "edit", "tgt_text": "**a"})
        assert bad.status_code == 422
        body = bad.json()
        assert body["violations"][0]["kind"] == "UnbalancedDelimiter"
        ok = client.post("/api/samples/s001/decision",
                         json={"decision": "edit", "tgt_text": "**好**吧"})
        assert ok.status_code == 200

    def test_unknown_decision_rejected(self, client):
        got = client.post("/api/samples/s001/decision", json={"decision": "shrug"})
        assert got.status_code == 422


class TestAgreementEndpoint:
    def test_requires_judge_file(self, client):
        assert client.get("/api/agreement").status_code == 404

    def test_matches_evaluation_module_exactly(self, tmp_path):
        judgments = [("s001", "match"), ("s002", "match"), ("s003", "no_match")]
        root = seed_store(tmp_path, n=3, judgments=judgments)
        client = TestClient(create_app(ReviewStore(root)))
        votes = {
            "s001": ["match", "match", "no_match"],
            "s002": ["no_match", "no_match", "match"],
            "s003": ["no_match", "no_match", "no_match"],
        }
        for sample_id, verdicts in votes.items():
            for i, verdict in enumerate(verdicts):
                client.post(f"/api/samples/{sample_id}/annotations",
                            json={"annotator_id": f"a{i}", "verdict": verdict})
        served = client.get("/api/agreement").json()
        want = agreement_report(
            [SSRJudgment(sid, v, "", "exact") for sid, v in judgments],
            majority_vote(votes),
        )
        assert served == want

    def test_no_consensus_yet(self, tmp_path):
        root = seed_store(tmp_path, n=1, judgments=[("s001", "match")])
        client = TestClient(create_app(ReviewStore(root)))
        assert client.get("/api/agreement").status_code == 422


class TestExport:
    def test_export_writes_files(self, tmp_path):
        root = seed_store(tmp_path, n=3)
        client = TestClient(create_app(ReviewStore(root)))
        client.post("/api/samples/s001/annotations",
                    json={"annotator_id": "a1", "verdict": "match"})
        client.post("/api/samples/s001/decision", json={"decision": "accept"})
        client.post("/api/samples/s002/decision", json={"decision": "reject"})
        client.post("/api/samples/s003/decision",
                    json={"decision": "edit", "tgt_text": "我没有说**他**偷了钱。"})
        paths = client.post("/api/export").json()
        bench_lines = [json.loads(l) for l in open(paths["benchmark"], encoding="utf-8")]
        assert [r["id"] for r in bench_lines] == ["s001", "s003"]
        assert all(r["verified"] for r in bench_lines)
        audit_lines = [json.loads(l) for l in open(paths["audit"], encoding="utf-8")]
        assert [r["id"] for r in audit_lines] == ["s002"]
        ann_lines = [json.loads(l) for l in open(paths["annotations"], encoding="utf-8")]
        assert ann_lines == [{"id": "s001", "annotator_id": "a1", "verdict": "match"}]


class TestStoreValidation:
    def test_missing_samples_file(self, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        with pytest.raises(StoreError):
            ReviewStore(empty)
