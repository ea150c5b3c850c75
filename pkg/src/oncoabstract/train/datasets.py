"""Dataset construction from patient-level supervision.

Abstraction: one example per registry patient, label taken straight from
the registry record (the sentinel class included), input assembled from the
window around diagnosis.

Case finding: binary day-level instances.  Positives are registry patients
on their diagnosis day.  The default scheme draws negatives from control
patients' document-bearing days; the hard-negative scheme additionally
samples registry patients' document days earlier than diagnosis minus a
cutoff.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass

from ..corpus import AttributeKind, CorpusBundle, Patient
from ..textproc import EmptyWindowError, TokenSequence, Vocab, assemble_input

log = logging.getLogger(__name__)

ALL_KINDS = ("Pathology", "Radiology", "Operative")


class DatasetError(ValueError):
    pass


@dataclass
class AbstractionExample:
    patient_id: str
    sequence: TokenSequence
    label_index: int
    attribute: AttributeKind


@dataclass
class CaseFindingExample:
    patient_id: str
    day: int
    sequence: TokenSequence
    label_index: int              # 1 positive, 0 negative
    negative_kind: str            # none | control | hard

    @property
    def label(self) -> str:
        return "positive" if self.label_index == 1 else "negative"


@dataclass(frozen=True)
class DefaultScheme:
    """Negatives from random (control patient, document-bearing day) pairs."""

    max_days_per_control: int = 2

    name = "default"


@dataclass(frozen=True)
class HardNegativeScheme(DefaultScheme):
    """Default negatives plus pre-diagnosis days of registry patients."""

    hard_cutoff_days: int = 30
    per_patient_max: int = 2

    name = "hard-negatives"


def build_abstraction_dataset(bundle: CorpusBundle, attribute: AttributeKind,
                              vocab: Vocab, window=(30, 30), kinds=ALL_KINDS,
                              max_sentences: int = 256,
                              patients: list[Patient] | None = None) -> list[AbstractionExample]:
    """One example per cancer patient; controls are excluded."""
    space = bundle.label_spaces[attribute.value]
    pool = patients if patients is not None else bundle.cancer_patients
    examples = []
    skipped = 0
    for p in pool:
        if p.registry is None:
            continue
        try:
            seq = assemble_input(p, window, p.registry.diagnosis_date, kinds, vocab,
                                 max_sentences=max_sentences, attribute=attribute.value)
        except EmptyWindowError:
            skipped += 1
            continue
        label = p.registry.labels[attribute.value]
        examples.append(AbstractionExample(
            patient_id=p.patient_id, sequence=seq,
            label_index=space.index(label), attribute=attribute))
    if skipped:
        log.info("abstraction dataset for %s: skipped %d patients with empty windows",
                 attribute.value, skipped)
    if not examples:
        raise DatasetError(f"no abstraction examples for {attribute.value}")
    return examples


def document_days(patient: Patient, kinds=ALL_KINDS) -> list[int]:
    wanted = set(kinds)
    return sorted({d.date for d in patient.documents if d.kind in wanted})


def _day_sequence(patient: Patient, day: int, vocab: Vocab, kinds,
                  max_sentences: int) -> TokenSequence:
    return assemble_input(patient, (0, 0), day, kinds, vocab, max_sentences=max_sentences)


def build_casefinding_dataset(bundle: CorpusBundle, scheme: DefaultScheme, vocab: Vocab,
                              seed: int, kinds=ALL_KINDS, max_sentences: int = 256,
                              patients: list[Patient] | None = None) -> list[CaseFindingExample]:
    """Day-level training instances under the given self-supervision scheme."""
    import random as _random
    rng = _random.Random(seed)
    pool = patients if patients is not None else bundle.patients
    examples = []
    n_pos = 0
    for p in pool:
        if p.registry is None:
            continue
        day = p.registry.diagnosis_date
        examples.append(CaseFindingExample(
            patient_id=p.patient_id, day=day,
            sequence=_day_sequence(p, day, vocab, kinds, max_sentences),
            label_index=1, negative_kind="none"))
        n_pos += 1
    controls = [p for p in pool if p.registry is None]
    n_control = 0
    for p in controls:
        days = document_days(p, kinds)
        if len(days) > scheme.max_days_per_control:
            days = sorted(rng.sample(days, scheme.max_days_per_control))
        for day in days:
            examples.append(CaseFindingExample(
                patient_id=p.patient_id, day=day,
                sequence=_day_sequence(p, day, vocab, kinds, max_sentences),
                label_index=0, negative_kind="control"))
            n_control += 1
    if n_control == 0:
        raise DatasetError(
            f"default negatives unavailable: {len(controls)} control patients, "
            f"0 eligible document days")
    n_hard = 0
    if isinstance(scheme, HardNegativeScheme):
        for p in pool:
            if p.registry is None:
                continue
            cutoff = p.registry.diagnosis_date - scheme.hard_cutoff_days
            eligible = [d for d in document_days(p, kinds) if d < cutoff]
            if len(eligible) > scheme.per_patient_max:
                eligible = sorted(rng.sample(eligible, scheme.per_patient_max))
            for day in eligible:
                examples.append(CaseFindingExample(
                    patient_id=p.patient_id, day=day,
                    sequence=_day_sequence(p, day, vocab, kinds, max_sentences),
                    label_index=0, negative_kind="hard"))
                n_hard += 1
        if n_hard == 0:
            raise DatasetError(
                f"hard-negative scheme found no eligible days before "
                f"diagnosis - {scheme.hard_cutoff_days} across {n_pos} registry patients")
    log.info("case-finding dataset: %d positive, %d control-negative, %d hard-negative",
             n_pos, n_control, n_hard)
    return examples


def casefinding_eval_days(patients: list[Patient], vocab: Vocab, kinds=ALL_KINDS,
                          max_sentences: int = 256):
    """Every document-bearing day per patient, for patient-level evaluation."""
    out = {}
    for p in patients:
        entries = []
        for day in document_days(p, kinds):
            entries.append((day, _day_sequence(p, day, vocab, kinds, max_sentences)))
        if entries:
            out[p.patient_id] = entries
    return out


def dataset_cache_key(corpus_hash: str, attribute: str, window, kinds,
                      vocab_hash: str, max_sentences: int) -> str:
    payload = json.dumps({
        "corpus": corpus_hash, "attribute": attribute,
        "window": list(window), "kinds": sorted(kinds),
        "vocab": vocab_hash, "max_sentences": max_sentences,
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def save_examples(path: str, examples: list[AbstractionExample]) -> None:
    import numpy as np
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({
                "patient_id": ex.patient_id,
                "label_index": ex.label_index,
                "attribute": ex.attribute.value,
                "ids": np.asarray(ex.sequence.ids).tolist(),
                "sentences": [[s.doc_id, s.sentence_index, s.token_start, s.token_end,
                               s.char_start, s.char_end, s.date] for s in ex.sequence.sentences],
                "window": list(ex.sequence.window),
            }, separators=(",", ":")) + "\n")


def load_examples(path: str) -> list[AbstractionExample]:
    import numpy as np

    from ..textproc import SentenceSegment
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            raw = json.loads(line)
            seq = TokenSequence(
                ids=np.asarray(raw["ids"], dtype=np.int32),
                sentences=[SentenceSegment(*s) for s in raw["sentences"]],
                provenance=[None] * len(raw["ids"]),
                window=tuple(raw["window"]),
                attribute=raw["attribute"],
            )
            out.append(AbstractionExample(
                patient_id=raw["patient_id"], sequence=seq,
                label_index=raw["label_index"],
                attribute=AttributeKind(raw["attribute"])))
    return out
