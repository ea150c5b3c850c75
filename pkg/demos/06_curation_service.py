"""The assisted-curation service end to end, in process: precompute
extractions, review a few, export corrected labels, replay the log.

Run:  python3 demos/06_curation_service.py
"""

import json
import tempfile

from fastapi.testclient import TestClient

from oncoabstract import textproc as tp
from oncoabstract.corpus import GeneratorConfig, generate_corpus
from oncoabstract.model import Model, ModelConfig
from oncoabstract.service import CurationStore, create_app, run_inference

bundle = generate_corpus(GeneratorConfig(n_cancer_patients=12, n_control_patients=3, seed=43))
texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
vocab = tp.learn_vocab(texts, target_size=400)

models = {}
for attribute, space in bundle.label_spaces.items():
    config = ModelConfig(vocab_size=len(vocab), n_classes=space.n_classes, embed_dim=16,
                         gru_hidden=12, word_attn_dim=8, sent_attn_dim=8,
                         dropout_rate=0.0, seed=2)
    models[attribute] = Model(config, vocab.content_hash())
records = run_inference(bundle, vocab, models)
print(f"precomputed {len(records)} extractions for {len(bundle.cancer_patients)} patients")

log_path = tempfile.mktemp(suffix=".jsonl")
store = CurationStore(bundle, records, log_path)
client = TestClient(create_app(store))

queue = client.get("/api/queue", params={"status": "pending"}).json()
print(f"queue: {queue['total']} pending items")

first = queue["items"][0]
print(f"\nreviewing {first['extraction_id']}: predicted {first['predicted_class']}")
accepted = client.post(f"/api/extractions/{first['extraction_id']}/verdict",
                       json={"event_id": "demo-1", "verdict": "accept"},
                       headers={"X-Reviewer-Id": "demo"}).json()
print("accepted ->", accepted["status"])

second = queue["items"][1]
space = bundle.label_spaces[second["attribute"]]
new_label = next(c for c in space.classes if c != second["predicted_class"])
corrected = client.post(f"/api/extractions/{second['extraction_id']}/verdict",
                        json={"event_id": "demo-2", "verdict": "correct",
                              "corrected_label": new_label},
                        headers={"X-Reviewer-Id": "demo"}).json()
print(f"corrected {second['predicted_class']} -> {corrected['corrected_class']}")

# idempotent retry: same event id, no double append
client.post(f"/api/extractions/{second['extraction_id']}/verdict",
            json={"event_id": "demo-2", "verdict": "correct",
                  "corrected_label": new_label})
print("log lines after duplicate retry:", sum(1 for _ in open(log_path)))

print("\nstats:", json.dumps(client.get("/api/stats").json()["by_status"]))
print("export:")
for line in client.get("/api/export").text.strip().splitlines():
    print(" ", line)

replayed = CurationStore(bundle, records, log_path)
print("\nreplay reconstructs identical state:",
      replayed.stats() == client.get("/api/stats").json())
