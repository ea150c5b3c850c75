"""Attention-derived rationales: ranked, provenance-linked evidence spans.

Weights are taken verbatim from the prediction's attention arrays (no
recomputation); sentence and token spans resolve byte-exactly against the
stored source documents.  Attention is presented as supporting evidence for
review, not as a guaranteed explanation of the model's decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Prediction
from .textproc import TokenSequence

TOP_TOKENS_PER_SENTENCE = 3


@dataclass
class RationaleToken:
    doc_id: str
    char_start: int
    char_end: int
    weight: float


@dataclass
class RationaleEntry:
    doc_id: str
    sentence_index: int
    char_start: int
    char_end: int
    weight: float
    tokens: list[RationaleToken] = field(default_factory=list)


@dataclass
class Rationale:
    k: int
    entries: list[RationaleEntry]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "entries": [
                {
                    "doc_id": e.doc_id, "sentence_index": e.sentence_index,
                    "char_start": e.char_start, "char_end": e.char_end,
                    "weight": e.weight,
                    "tokens": [
                        {"doc_id": t.doc_id, "char_start": t.char_start,
                         "char_end": t.char_end, "weight": t.weight}
                        for t in e.tokens
                    ],
                }
                for e in self.entries
            ],
        }


def extract_rationale(prediction: Prediction, sequence: TokenSequence, k: int) -> Rationale:
    """Top-k sentences by sentence attention, top tokens inside each.

    Ties break toward the earlier position.  Combined token weights are
    sentence weight times word weight, renormalized over all returned
    tokens.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(prediction.sentence_weights)
    if n != sequence.n_sentences:
        raise ValueError("prediction does not align with the token sequence")
    order = sorted(range(n), key=lambda i: (-prediction.sentence_weights[i], i))[:k]
    entries = []
    combined_weights = []
    for i in order:
        seg = sequence.sentences[i]
        word_w = prediction.word_weights[i]
        token_order = sorted(range(len(word_w)), key=lambda j: (-word_w[j], j))
        tokens = []
        for j in token_order[:TOP_TOKENS_PER_SENTENCE]:
            prov = sequence.provenance[seg.token_start + j]
            if prov is None:
                continue
            doc_id, a, b = prov
            weight = float(prediction.sentence_weights[i] * word_w[j])
            tokens.append(RationaleToken(doc_id, a, b, weight))
            combined_weights.append(weight)
        entries.append(RationaleEntry(
            doc_id=seg.doc_id, sentence_index=seg.sentence_index,
            char_start=seg.char_start, char_end=seg.char_end,
            weight=float(prediction.sentence_weights[i]), tokens=tokens))
    total = sum(combined_weights)
    if total > 0:
        for e in entries:
            for t in e.tokens:
                t.weight = t.weight / total
    return Rationale(k=k, entries=entries)


def evidence_hit(rationale: Rationale, evidence_spans) -> bool:
    """Does the top-ranked sentence coincide with a planted evidence span?"""
    if not rationale.entries:
        return False
    top = rationale.entries[0]
    for span in evidence_spans:
        if span.doc_id == top.doc_id and span.sentence_index == top.sentence_index:
            return True
    return False


def evidence_overlap_rate(predictions, sequences, examples, bundle, attribute=None) -> float:
    """Among correctly predicted examples, the rate at which the top-1
    attended sentence lands on a planted evidence span.

    With ``attribute=None`` a hit may land on evidence planted for any
    attribute: correlated evidence (a histology statement pinning down the
    organ, a staging line naming a metastatic site) is legitimate grounds
    for a site call, and the model is free to use it.
    """
    hits = 0
    correct = 0
    for pred, seq, ex in zip(predictions, sequences, examples):
        if pred.argmax != ex.label_index:
            continue
        correct += 1
        if attribute is None:
            doc_ids = {d.doc_id for d in bundle.patient(ex.patient_id).documents}
            spans = [e for e in bundle.evidence if e.doc_id in doc_ids]
        else:
            spans = bundle.evidence_for(ex.patient_id, attribute)
        if evidence_hit(extract_rationale(pred, seq, k=1), spans):
            hits += 1
    if correct == 0:
        return 0.0
    return hits / correct
