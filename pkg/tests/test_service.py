import json
import urllib.error
import urllib.request

import pytest

from identity_ner.alignment import (
    align_corpus,
    export_review_queue,
    LabeledSentence,
)
from identity_ner.service import ReviewService
from identity_ner.text import CategoryLabel

R, E, G = CategoryLabel.RELIGION, CategoryLabel.ETHNICITY, CategoryLabel.GENDER


def make_queue_file(trained_models, path):
    tagger, classifier = trained_models
    sentences = [
        LabeledSentence("s1", "they inflame muslim communities", frozenset({R})),
        LabeledSentence("s2", "attack black people online", frozenset({E})),
        LabeledSentence("s3", "mock women daily", frozenset({G})),
    ]
    examples, _ = align_corpus(sentences, tagger, classifier)
    assert examples, "fixture models must produce at least one aligned example"
    export_review_queue(examples, path)
    return examples


@pytest.fixture
def service(trained_models, tmp_path):
    queue_path = tmp_path / "queue.jsonl"
    decisions_path = tmp_path / "decisions.jsonl"
    examples = make_queue_file(trained_models, queue_path)
    svc = ReviewService(queue_path, decisions_path).start(port=0)
    yield svc, examples, queue_path, decisions_path
    svc.stop()


def request(svc, method, path, body=None):
    url = f"http://127.0.0.1:{svc.port}{path}"
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def decision_body(action, spans=None):
    body = {
        "action": action,
        "reviewer": "tester",
        "timestamp": "2026-02-01T09:00:00Z",
    }
    if spans is not None:
        body["edited_spans"] = spans
    return body


class TestEndpoints:
    def test_progress_on_fresh_queue(self, service):
        svc, examples, *_ = service
        status, body = request(svc, "GET", "/api/progress")
        assert status == 200
        assert json.loads(body) == {"decided": 0, "total": len(examples)}

    def test_list_items_paging(self, service):
        svc, examples, *_ = service
        status, body = request(svc, "GET", "/api/items?status=pending&offset=0&limit=1")
        assert status == 200
        payload = json.loads(body)
        assert payload["total"] == len(examples)
        assert len(payload["items"]) == 1
        item = payload["items"][0]
        assert {"id", "text", "spans", "provenance", "status"} <= set(item)

    def test_get_single_item(self, service):
        svc, examples, *_ = service
        status, body = request(svc, "GET", f"/api/items/{examples[0].id}")
        assert status == 200
        assert json.loads(body)["id"] == examples[0].id

    def test_unknown_item_404(self, service):
        svc, *_ = service
        status, _ = request(svc, "GET", "/api/items/ghost")
        assert status == 404

    def test_unknown_decision_404_and_log_unchanged(self, service):
        svc, _, _, decisions_path = service
        status, _ = request(
            svc, "POST", "/api/items/ghost/decision", decision_body("accept")
        )
        assert status == 404
        assert not decisions_path.exists() or decisions_path.read_text() == ""

    def test_malformed_decision_400(self, service):
        svc, examples, _, decisions_path = service
        status, _ = request(
            svc, "POST", f"/api/items/{examples[0].id}/decision", {"action": "accept"}
        )
        assert status == 400
        assert not decisions_path.exists() or decisions_path.read_text() == ""

    def test_accept_all_then_export_equals_queue(self, service):
        svc, examples, *_ = service
        for example in examples:
            status, _ = request(
                svc, "POST", f"/api/items/{example.id}/decision",
                decision_body("accept"),
            )
            assert status == 200
        status, body = request(svc, "GET", "/api/progress")
        assert json.loads(body) == {"decided": len(examples), "total": len(examples)}
        status, body = request(svc, "GET", "/api/export")
        assert status == 200
        lines = [json.loads(l) for l in body.decode().splitlines()]
        assert [l["id"] for l in lines] == [e.id for e in examples]
        for line, example in zip(lines, examples):
            assert len(line["spans"]) == len(example.spans)

    def test_conflicting_decision_409_both_retained(self, service):
        svc, examples, _, decisions_path = service
        item = examples[0].id
        status, _ = request(
            svc, "POST", f"/api/items/{item}/decision", decision_body("accept")
        )
        assert status == 200
        status, body = request(
            svc, "POST", f"/api/items/{item}/decision", decision_body("reject")
        )
        assert status == 409
        assert json.loads(body)["recorded"] is True
        logged = decisions_path.read_text().strip().splitlines()
        assert len(logged) == 2  # both retained
        status, body = request(svc, "GET", "/api/export")
        ids = [json.loads(l)["id"] for l in body.decode().splitlines()]
        assert item not in ids  # last write (reject) wins

    def test_edit_decision_applies_spans(self, service):
        svc, examples, *_ = service
        item = examples[0]
        span = item.spans[0]
        edited = [{"start": span.start, "end": span.start + 1, "label": "gender"}]
        status, _ = request(
            svc, "POST", f"/api/items/{item.id}/decision",
            decision_body("edit", spans=edited),
        )
        assert status == 200
        _, body = request(svc, "GET", "/api/export")
        line = next(
            json.loads(l) for l in body.decode().splitlines() if json.loads(l)["id"] == item.id
        )
        assert line["spans"] == edited

    def test_fallback_index_page(self, service):
        svc, *_ = service
        status, body = request(svc, "GET", "/")
        assert status == 200
        assert b"Review service" in body


class TestDurability:
    def test_crash_restart_preserves_acknowledged_decisions(
        self, trained_models, tmp_path
    ):
        queue_path = tmp_path / "queue.jsonl"
        decisions_path = tmp_path / "decisions.jsonl"
        examples = make_queue_file(trained_models, queue_path)

        first = ReviewService(queue_path, decisions_path).start(port=0)
        try:
            for example in examples:
                status, _ = request(
                    first, "POST", f"/api/items/{example.id}/decision",
                    decision_body("accept"),
                )
                assert status == 200
        finally:
            first.stop()  # abrupt: nothing else flushed or finalized

        second = ReviewService(queue_path, decisions_path).start(port=0)
        try:
            status, body = request(second, "GET", "/api/progress")
            assert json.loads(body) == {
                "decided": len(examples), "total": len(examples)
            }
            _, body = request(second, "GET", "/api/export")
            assert len(body.decode().splitlines()) == len(examples)
        finally:
            second.stop()


class TestStaticHosting:
    def test_serves_ui_bundle(self, trained_models, tmp_path):
        queue_path = tmp_path / "queue.jsonl"
        make_queue_file(trained_models, queue_path)
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>bundle</body></html>")
        (ui / "app.js").write_text("console.log('ok')")
        svc = ReviewService(queue_path, tmp_path / "d.jsonl", ui_dir=ui).start(port=0)
        try:
            status, body = request(svc, "GET", "/")
            assert status == 200 and b"bundle" in body
            status, body = request(svc, "GET", "/app.js")
            assert status == 200 and b"console" in body
            status, _ = request(svc, "GET", "/../secret")
            assert status == 404
        finally:
            svc.stop()
