"""Batch inference for the curation service: precompute every extraction."""

from __future__ import annotations

import json
import os

import numpy as np

from ..corpus import AttributeKind, CorpusBundle
from ..model import Model
from ..rationale import extract_rationale
from ..textproc import EmptyWindowError, Vocab, assemble_input
from .store import PredictionRecord

RATIONALE_K = 3


def run_inference(bundle: CorpusBundle, vocab: Vocab, models: dict[str, Model],
                  window=(30, 30), kinds=("Pathology", "Radiology", "Operative"),
                  max_sentences: int = 256, batch_size: int = 64) -> list[PredictionRecord]:
    """Predictions plus rationales for every (registry patient, attribute)."""
    records: list[PredictionRecord] = []
    for attribute, model in sorted(models.items()):
        space = bundle.label_spaces[attribute]
        patients, sequences = [], []
        for p in bundle.cancer_patients:
            try:
                seq = assemble_input(p, window, p.registry.diagnosis_date, kinds, vocab,
                                     max_sentences=max_sentences, attribute=attribute)
            except EmptyWindowError:
                continue
            patients.append(p)
            sequences.append(seq)
        for start in range(0, len(sequences), batch_size):
            chunk = sequences[start:start + batch_size]
            preds = model.predict(chunk)
            for p, seq, pred in zip(patients[start:start + batch_size], chunk, preds):
                top = np.argsort(-pred.probs)[:5]
                rationale = extract_rationale(pred, seq, k=RATIONALE_K)
                records.append(PredictionRecord(
                    patient_id=p.patient_id,
                    attribute=attribute,
                    predicted_class=space.classes[pred.argmax],
                    top5=[(space.classes[i], float(pred.probs[i])) for i in top],
                    rationale=rationale.to_dict(),
                ))
    return records


def save_predictions(records: list[PredictionRecord], path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for r in sorted(records, key=lambda r: (r.patient_id, r.attribute)):
            fh.write(json.dumps({
                "patient_id": r.patient_id,
                "attribute": r.attribute,
                "predicted_class": r.predicted_class,
                "top5": [[label, prob] for label, prob in r.top5],
                "rationale": r.rationale,
            }, ensure_ascii=False, separators=(",", ":")) + "\n")


def load_predictions(path: str) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            records.append(PredictionRecord(
                patient_id=raw["patient_id"], attribute=raw["attribute"],
                predicted_class=raw["predicted_class"],
                top5=[(label, prob) for label, prob in raw["top5"]],
                rationale=raw["rationale"]))
    return records


def validate_rationale_spans(bundle: CorpusBundle, records: list[PredictionRecord]) -> None:
    """Server-side provenance check: every span must lie inside its document."""
    docs = {d.doc_id: d.text for p in bundle.patients for d in p.documents}
    for rec in records:
        for entry in rec.rationale.get("entries", []):
            text = docs.get(entry["doc_id"])
            if text is None:
                raise ValueError(f"rationale references unknown document {entry['doc_id']}")
            if not (0 <= entry["char_start"] <= entry["char_end"] <= len(text)):
                raise ValueError(
                    f"rationale span {entry['char_start']}:{entry['char_end']} outside "
                    f"document {entry['doc_id']} of length {len(text)}")
            for tok in entry.get("tokens", []):
                if not (0 <= tok["char_start"] <= tok["char_end"] <= len(docs[tok["doc_id"]])):
                    raise ValueError(f"token span outside document {tok['doc_id']}")


def checkpoint_models(checkpoint_dir: str, vocab_hash: str) -> dict[str, Model]:
    """Load `<attribute>.<encoder>.ckpt` files from a directory."""
    from ..model import load_checkpoint
    models: dict[str, Model] = {}
    if not os.path.isdir(checkpoint_dir):
        return models
    for name in sorted(os.listdir(checkpoint_dir)):
        if not name.endswith(".ckpt"):
            continue
        attribute = name.split(".")[0]
        try:
            AttributeKind(attribute)
        except ValueError:
            continue
        models[attribute] = load_checkpoint(os.path.join(checkpoint_dir, name),
                                            expect_vocab_hash=vocab_hash)
    return models
