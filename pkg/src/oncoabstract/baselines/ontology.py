"""Ontology-aware rule-based baseline: alias counting over in-window text."""

from __future__ import annotations

import re

import numpy as np

from ..corpus import NOT_DOCUMENTED, CorpusBundle, LabelSpace, Patient
from ..textproc import normalize


def _compile(lexicon: dict[str, list[str]]):
    """(pattern, code) pairs, longest alias first so substrings don't double count."""
    entries = []
    for code, aliases in lexicon.items():
        for alias in aliases:
            entries.append((alias.lower(), code))
    entries.sort(key=lambda e: len(e[0]), reverse=True)
    return [(re.compile(r"(?<!\w)" + re.escape(alias) + r"(?!\w)"), code)
            for alias, code in entries]


def count_alias_hits(lexicon: dict[str, list[str]], text: str) -> dict[str, int]:
    """Non-overlapping alias occurrence counts per class, longest match wins."""
    norm = normalize(text).text
    consumed = np.zeros(len(norm), dtype=bool)
    counts: dict[str, int] = {}
    for pattern, code in _compile(lexicon):
        for m in pattern.finditer(norm):
            if consumed[m.start():m.end()].any():
                continue
            consumed[m.start():m.end()] = True
            counts[code] = counts.get(code, 0) + 1
    return counts


def ontology_predict(lexicon: dict[str, list[str]], documents, space: LabelSpace) -> np.ndarray:
    """Alias-count distribution over the label space.

    Counts are pooled over the given documents and normalized; when nothing
    matches, all mass goes to the sentinel class.
    """
    if not lexicon:
        raise ValueError("empty lexicon")
    counts: dict[str, int] = {}
    for doc in documents:
        for code, n in count_alias_hits(lexicon, doc.text).items():
            counts[code] = counts.get(code, 0) + n
    scores = np.zeros(space.n_classes, dtype=np.float64)
    for code, n in counts.items():
        if code in space.classes:
            scores[space.index(code)] = n
    total = scores.sum()
    if total == 0:
        scores[space.index(NOT_DOCUMENTED)] = 1.0
        return scores
    return scores / total


def ontology_predict_patient(bundle: CorpusBundle, patient: Patient, attribute: str,
                             window=(30, 30), kinds=("Pathology", "Radiology", "Operative")) -> np.ndarray:
    anchor = patient.registry.diagnosis_date
    lo, hi = anchor - window[0], anchor + window[1]
    docs = [d for d in patient.documents if d.kind in set(kinds) and lo <= d.date <= hi]
    return ontology_predict(bundle.lexicon[attribute], docs, bundle.label_spaces[attribute])
