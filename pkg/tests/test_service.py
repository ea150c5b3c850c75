import json
import os
import signal
import socket
import subprocess
import sys
import time

import pytest
from fastapi.testclient import TestClient

from oncoabstract import textproc as tp
from oncoabstract.corpus import GeneratorConfig, generate_corpus, write_corpus
from oncoabstract.model import Model, ModelConfig, save_checkpoint
from oncoabstract.service import (
    CurationStore,
    PredictionRecord,
    create_app,
    load_predictions,
    run_inference,
    save_predictions,
    validate_rationale_spans,
)


@pytest.fixture(scope="module")
def bundle():
    return generate_corpus(GeneratorConfig(n_cancer_patients=10, n_control_patients=3, seed=61))


@pytest.fixture(scope="module")
def vocab(bundle):
    texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
    return tp.learn_vocab(texts, target_size=320)


@pytest.fixture(scope="module")
def records(bundle, vocab):
    models = {}
    for attr in bundle.label_spaces:
        config = ModelConfig(vocab_size=len(vocab),
                             n_classes=bundle.label_spaces[attr].n_classes,
                             embed_dim=16, gru_hidden=8, word_attn_dim=8, sent_attn_dim=8,
                             dropout_rate=0.0, seed=3)
        models[attr] = Model(config, vocab.content_hash())
    recs = run_inference(bundle, vocab, models)
    validate_rationale_spans(bundle, recs)
    return recs


@pytest.fixture()
def client(bundle, records, tmp_path):
    store = CurationStore(bundle, records, str(tmp_path / "events.jsonl"))
    app = create_app(store)
    with TestClient(app, raise_server_exceptions=False) as c:
        c.store = store
        yield c


def test_inference_covers_every_patient_attribute(bundle, records):
    assert len(records) == 10 * 8


def test_queue_counts_fresh_corpus(client):
    resp = client.get("/api/queue")
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == 80
    assert resp.headers["X-Total-Count"] == "80"
    assert len(body["items"]) == 50  # page size
    resp2 = client.get("/api/queue", params={"page": 1})
    assert len(resp2.json()["items"]) == 30


def test_queue_stable_ordering(client):
    items = client.get("/api/queue").json()["items"]
    keys = [(i["patient_id"], i["attribute"]) for i in items]
    assert keys == sorted(keys)


def test_queue_accepted_empty_before_verdicts(client):
    resp = client.get("/api/queue", params={"status": "accepted"})
    assert resp.json()["total"] == 0
    assert resp.json()["items"] == []


def test_queue_page_beyond_end(client):
    resp = client.get("/api/queue", params={"page": 99})
    assert resp.json()["items"] == []
    assert resp.headers["X-Total-Count"] == "80"


def test_queue_unknown_attribute_400(client):
    resp = client.get("/api/queue", params={"attribute": "bogus"})
    assert resp.status_code == 400
    assert resp.json()["code"] == "unknown_attribute"


def test_patient_payload(client, bundle):
    pid = bundle.cancer_patients[0].patient_id
    resp = client.get(f"/api/patients/{pid}")
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["extractions"]) == 8
    docs = {d["doc_id"]: d["text"] for d in body["documents"]}
    for item in body["extractions"]:
        for entry in item["rationale"]["entries"]:
            text = docs[entry["doc_id"]]
            snippet = text[entry["char_start"]:entry["char_end"]]
            assert len(snippet) > 0


def test_patient_unknown_404(client):
    resp = client.get("/api/patients/NOPE")
    assert resp.status_code == 404
    assert set(resp.json()) == {"code", "message"}


def test_accept_verdict(client):
    item = client.get("/api/queue").json()["items"][0]
    resp = client.post(f"/api/extractions/{item['extraction_id']}/verdict",
                       json={"event_id": "e1", "verdict": "accept"},
                       headers={"X-Reviewer-Id": "alice"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "accepted"
    assert body["reviewer_id"] == "alice"


def test_correct_verdict_validates_label_space(client, bundle):
    items = client.get("/api/queue", params={"attribute": "site"}).json()["items"]
    eid = items[0]["extraction_id"]
    bad = client.post(f"/api/extractions/{eid}/verdict",
                      json={"event_id": "e2", "verdict": "correct",
                            "corrected_label": "Z99.9"})
    assert bad.status_code == 422
    still = client.get("/api/queue", params={"attribute": "site"}).json()["items"][0]
    assert still["status"] == "pending"
    good_label = bundle.label_spaces["site"].classes[1]
    ok = client.post(f"/api/extractions/{eid}/verdict",
                     json={"event_id": "e3", "verdict": "correct",
                           "corrected_label": good_label})
    assert ok.status_code == 200
    assert ok.json()["status"] == "corrected"
    assert ok.json()["corrected_class"] == good_label


def test_missing_corrected_label_422(client):
    item = client.get("/api/queue").json()["items"][5]
    resp = client.post(f"/api/extractions/{item['extraction_id']}/verdict",
                       json={"event_id": "e4", "verdict": "correct"})
    assert resp.status_code == 422


def test_unknown_extraction_404(client):
    resp = client.post("/api/extractions/NOPE:site/verdict",
                       json={"event_id": "e5", "verdict": "accept"})
    assert resp.status_code == 404


def test_duplicate_event_id_appends_once(client, tmp_path):
    item = client.get("/api/queue").json()["items"][2]
    payload = {"event_id": "dup-1", "verdict": "accept"}
    r1 = client.post(f"/api/extractions/{item['extraction_id']}/verdict", json=payload)
    log_path = client.store.log.path
    n_before = sum(1 for _ in open(log_path))
    r2 = client.post(f"/api/extractions/{item['extraction_id']}/verdict", json=payload)
    n_after = sum(1 for _ in open(log_path))
    assert r1.status_code == r2.status_code == 200
    assert n_after == n_before
    assert r1.json()["status"] == r2.json()["status"] == "accepted"


def test_stats_counts_and_replay_oracle(client, bundle):
    items = client.get("/api/queue").json()["items"]
    for i, item in enumerate(items[:3]):
        client.post(f"/api/extractions/{item['extraction_id']}/verdict",
                    json={"event_id": f"s{i}", "verdict": "accept"},
                    headers={"X-Reviewer-Id": "bob"})
    label = bundle.label_spaces[items[3]["attribute"]].classes[0]
    client.post(f"/api/extractions/{items[3]['extraction_id']}/verdict",
                json={"event_id": "s9", "verdict": "correct", "corrected_label": label},
                headers={"X-Reviewer-Id": "carol"})
    stats = client.get("/api/stats").json()
    assert stats["by_status"]["accepted"] == 3
    assert stats["by_status"]["corrected"] == 1
    assert stats["correction_rate"] == pytest.approx(0.25)
    assert stats["reviewer_throughput"] == {"bob": 3, "carol": 1}
    # replay oracle: rebuild from the log and compare
    rebuilt = CurationStore(client.store.bundle,
                            [PredictionRecord(i.patient_id, i.attribute, i.predicted_class,
                                              i.top5, i.rationale)
                             for i in client.store.items.values()],
                            client.store.log.path)
    assert rebuilt.stats() == stats


def test_stats_empty_log(bundle, records, tmp_path):
    store = CurationStore(bundle, records, str(tmp_path / "fresh.jsonl"))
    with TestClient(create_app(store)) as c:
        stats = c.get("/api/stats").json()
    assert stats["by_status"]["accepted"] == 0
    assert stats["by_status"]["corrected"] == 0
    assert stats["total_events"] == 0


def test_export_rows(client, bundle):
    resp = client.get("/api/export")
    assert resp.status_code == 200
    assert resp.text == ""  # nothing reviewed yet in this fresh store
    items = client.get("/api/queue").json()["items"]
    client.post(f"/api/extractions/{items[0]['extraction_id']}/verdict",
                json={"event_id": "x1", "verdict": "accept"})
    label = bundle.label_spaces[items[1]["attribute"]].classes[0]
    client.post(f"/api/extractions/{items[1]['extraction_id']}/verdict",
                json={"event_id": "x2", "verdict": "correct", "corrected_label": label})
    rows = [json.loads(line) for line in client.get("/api/export").text.splitlines()]
    assert len(rows) == 2
    corrected = [r for r in rows if r["source"] == "corrected"][0]
    assert corrected["final_label"] == label


def test_export_count_equals_reviewed(client):
    items = client.get("/api/queue").json()["items"]
    for i, item in enumerate(items[:4]):
        client.post(f"/api/extractions/{item['extraction_id']}/verdict",
                    json={"event_id": f"c{i}", "verdict": "accept"})
    rows = client.get("/api/export").text.splitlines()
    stats = client.get("/api/stats").json()
    assert len(rows) == stats["by_status"]["accepted"] + stats["by_status"]["corrected"]


def test_crash_replay_reconstructs_state(bundle, records, tmp_path):
    log_path = str(tmp_path / "crash.jsonl")
    store = CurationStore(bundle, records, log_path)
    app = create_app(store)
    with TestClient(app) as c:
        items = c.get("/api/queue").json()["items"]
        c.post(f"/api/extractions/{items[0]['extraction_id']}/verdict",
               json={"event_id": "k1", "verdict": "accept"})
        label = bundle.label_spaces[items[1]["attribute"]].classes[0]
        c.post(f"/api/extractions/{items[1]['extraction_id']}/verdict",
               json={"event_id": "k2", "verdict": "correct", "corrected_label": label})
        before = {i.extraction_id: (i.status, i.corrected_class)
                  for i in store.items.values()}
    # no clean shutdown: a new store must rebuild identical state from the log
    rebuilt = CurationStore(bundle, records, log_path)
    after = {i.extraction_id: (i.status, i.corrected_class) for i in rebuilt.items.values()}
    assert after == before


def test_event_suffix_replay_is_noop(bundle, records, tmp_path):
    log_path = str(tmp_path / "suffix.jsonl")
    store = CurationStore(bundle, records, log_path)
    item = list(store.items.values())[0]
    store.submit_verdict(item.extraction_id, "r1", "accept", None, "dave")
    with open(log_path) as fh:
        events = [json.loads(l) for l in fh]
    # append the same suffix again and rebuild
    with open(log_path, "a") as fh:
        for e in events:
            fh.write(json.dumps(e) + "\n")
    rebuilt = CurationStore(bundle, records, log_path)
    assert rebuilt.stats()["by_status"]["accepted"] == 1
    assert rebuilt.stats()["total_events"] == 1


def test_predictions_file_round_trip(tmp_path, records, bundle):
    path = str(tmp_path / "preds.jsonl")
    save_predictions(records, path)
    loaded = load_predictions(path)
    assert len(loaded) == len(records)
    validate_rationale_spans(bundle, loaded)
    assert {r.extraction_id for r in loaded} == {r.extraction_id for r in records}
