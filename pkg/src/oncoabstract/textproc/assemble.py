"""Chronological cross-document input assembly with provenance.

The assembled stream is ``[CLS]`` followed, per document in (date, doc_id)
order, by the document-kind marker and its sentences, each terminated by
``[SEP]``.  Sentence segments index the content tokens only; every content
token carries the (doc_id, char_start, char_end) span of its source text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .normalize import normalize, split_sentences
from .vocab import Vocab, tokenize

MAX_SENTENCES = 256
MAX_SENTENCE_TOKENS = 64


class EmptyWindowError(ValueError):
    """No documents fall inside the requested window."""


@dataclass(frozen=True)
class SentenceSegment:
    doc_id: str
    sentence_index: int
    token_start: int
    token_end: int
    char_start: int
    char_end: int
    date: int


@dataclass
class TokenSequence:
    """Subword ids plus everything needed to trace them back to source."""

    ids: np.ndarray
    sentences: list[SentenceSegment]
    provenance: list  # per token: (doc_id, char_start, char_end) or None
    window: tuple[int, int]
    attribute: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    def sentence_ids(self, i: int) -> np.ndarray:
        seg = self.sentences[i]
        return self.ids[seg.token_start:seg.token_end]

    def sentence_lengths(self) -> list[int]:
        return [s.token_end - s.token_start for s in self.sentences]


def assemble_input(patient, window: tuple[int, int], anchor_day: int, kinds,
                   vocab: Vocab, max_sentences: int = MAX_SENTENCES,
                   max_sentence_tokens: int = MAX_SENTENCE_TOKENS,
                   attribute: str | None = None) -> TokenSequence:
    """Select, order, tokenize, and concatenate a patient's documents.

    ``window`` is (days_before, days_after) around ``anchor_day``; ``kinds``
    is the set of document kinds to keep.  When the sentence budget
    overflows, the oldest sentences are dropped first and no sentence is
    ever split.
    """
    days_before, days_after = window
    lo, hi = anchor_day - days_before, anchor_day + days_after
    kinds = set(kinds)
    docs = [d for d in patient.documents if d.kind in kinds and lo <= d.date <= hi]
    docs.sort(key=lambda d: (d.date, d.doc_id))
    if not docs:
        raise EmptyWindowError(
            f"patient {patient.patient_id}: no documents of kinds {sorted(kinds)} "
            f"in days [{lo}, {hi}]")

    entries = []  # (doc, norm, sentence_span, tokens)
    for doc in docs:
        norm = normalize(doc.text)
        for span in split_sentences(norm.text, doc_id=doc.doc_id):
            toks = tokenize(vocab, norm.text[span.char_start:span.char_end])
            toks = toks[:max_sentence_tokens]
            if toks:
                entries.append((doc, norm, span, toks))
    if len(entries) > max_sentences:
        entries = entries[len(entries) - max_sentences:]

    ids: list[int] = []
    provenance: list = []
    segments: list[SentenceSegment] = []
    current_doc = None
    ids.append(vocab.cls_id)
    provenance.append(None)
    for doc, norm, span, toks in entries:
        if doc.doc_id != current_doc:
            ids.append(vocab.marker_id(doc.kind))
            provenance.append(None)
            current_doc = doc.doc_id
        token_start = len(ids)
        for tok in toks:
            ids.append(tok.id)
            src = norm.to_original(span.char_start + tok.start, span.char_start + tok.end)
            provenance.append((doc.doc_id, src[0], src[1]))
        orig_span = norm.to_original(span.char_start, span.char_end)
        segments.append(SentenceSegment(
            doc_id=doc.doc_id, sentence_index=span.sentence_index,
            token_start=token_start, token_end=len(ids),
            char_start=orig_span[0], char_end=orig_span[1], date=doc.date))
        ids.append(vocab.sep_id)
        provenance.append(None)

    return TokenSequence(
        ids=np.asarray(ids, dtype=np.int32),
        sentences=segments,
        provenance=provenance,
        window=(lo, hi),
        attribute=attribute,
    )
