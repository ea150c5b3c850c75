"""Corpus serialization: line-delimited JSON with a fixed key order.

Writers emit keys in the documented order below so identical bundles
serialize to identical bytes:

* corpus.jsonl     — one patient per line: patient_id, documents, registry
* labelspaces.json — attribute -> ordered class list
* lexicon.json     — attribute -> class code -> alias list
* evidence.jsonl   — doc_id, attribute, char_start, char_end, sentence_index
* pretrain_pool.jsonl — {"text": ...} per unlabeled document
"""

from __future__ import annotations

import hashlib
import json
import os

from .types import (
    AttributeKind,
    ClinicalDocument,
    CorpusBundle,
    EvidenceSpan,
    LabelSpace,
    Patient,
    RegistryRecord,
)

CORPUS_FILE = "corpus.jsonl"
LABELSPACES_FILE = "labelspaces.json"
LEXICON_FILE = "lexicon.json"
EVIDENCE_FILE = "evidence.jsonl"
PRETRAIN_FILE = "pretrain_pool.jsonl"


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def patient_to_json(p: Patient) -> str:
    registry = None
    if p.registry is not None:
        registry = {
            "patient_id": p.registry.patient_id,
            "diagnosis_date": p.registry.diagnosis_date,
            "labels": {a.value: p.registry.labels[a.value] for a in AttributeKind},
        }
    return _dumps({
        "patient_id": p.patient_id,
        "documents": [
            {"doc_id": d.doc_id, "patient_id": d.patient_id, "kind": d.kind,
             "date": d.date, "text": d.text}
            for d in p.documents
        ],
        "registry": registry,
    })


def patient_from_json(line: str) -> Patient:
    raw = json.loads(line)
    docs = [ClinicalDocument(**d) for d in raw["documents"]]
    registry = None
    if raw.get("registry") is not None:
        registry = RegistryRecord(**raw["registry"])
    return Patient(patient_id=raw["patient_id"], documents=docs, registry=registry)


def write_corpus(bundle: CorpusBundle, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CORPUS_FILE), "w", encoding="utf-8") as fh:
        for p in bundle.patients:
            fh.write(patient_to_json(p) + "\n")
    with open(os.path.join(out_dir, LABELSPACES_FILE), "w", encoding="utf-8") as fh:
        fh.write(_dumps({a.value: list(bundle.label_spaces[a.value].classes)
                         for a in AttributeKind}))
    with open(os.path.join(out_dir, LEXICON_FILE), "w", encoding="utf-8") as fh:
        fh.write(_dumps(bundle.lexicon))
    with open(os.path.join(out_dir, EVIDENCE_FILE), "w", encoding="utf-8") as fh:
        for e in bundle.evidence:
            fh.write(_dumps({"doc_id": e.doc_id, "attribute": e.attribute.value,
                             "char_start": e.char_start, "char_end": e.char_end,
                             "sentence_index": e.sentence_index}) + "\n")
    with open(os.path.join(out_dir, PRETRAIN_FILE), "w", encoding="utf-8") as fh:
        for text in bundle.pretrain_pool:
            fh.write(_dumps({"text": text}) + "\n")


def read_corpus(in_dir: str) -> CorpusBundle:
    """Load a serialized corpus; template plants are generation-time only."""
    patients = []
    with open(os.path.join(in_dir, CORPUS_FILE), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                patients.append(patient_from_json(line))
    with open(os.path.join(in_dir, LABELSPACES_FILE), encoding="utf-8") as fh:
        spaces_raw = json.load(fh)
    label_spaces = {name: LabelSpace(AttributeKind(name), tuple(classes))
                    for name, classes in spaces_raw.items()}
    with open(os.path.join(in_dir, LEXICON_FILE), encoding="utf-8") as fh:
        lexicon = json.load(fh)
    evidence = []
    with open(os.path.join(in_dir, EVIDENCE_FILE), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                raw = json.loads(line)
                raw["attribute"] = AttributeKind(raw["attribute"])
                evidence.append(EvidenceSpan(**raw))
    pool = []
    with open(os.path.join(in_dir, PRETRAIN_FILE), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pool.append(json.loads(line)["text"])
    return CorpusBundle(config=None, patients=patients, label_spaces=label_spaces,
                        lexicon=lexicon, evidence=evidence, pretrain_pool=pool)


def corpus_hash(bundle: CorpusBundle) -> str:
    """Content hash over the patient records (stable across reruns)."""
    h = hashlib.sha256()
    for p in bundle.patients:
        h.update(patient_to_json(p).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
