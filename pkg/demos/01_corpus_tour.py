"""A tour of the synthetic EMR corpus and its built-in ground-truth oracle.

Run:  python3 demos/01_corpus_tour.py
"""

from oncoabstract.corpus import (
    AttributeKind,
    GeneratorConfig,
    attribute_entailed,
    corpus_hash,
    corpus_stats,
    generate_corpus,
)

config = GeneratorConfig(n_cancer_patients=40, n_control_patients=12,
                         cross_doc_fraction=0.6, seed=7)
bundle = generate_corpus(config)

print("=== one cancer patient ===")
patient = bundle.cancer_patients[0]
print(f"{patient.patient_id}: diagnosed day {patient.registry.diagnosis_date}")
for attr, code in patient.registry.labels.items():
    print(f"  {attr:12s} -> {code}")
print()
for doc in patient.documents:
    print(f"--- {doc.doc_id} [{doc.kind}] day {doc.date}")
    print(doc.text[:240].replace("\n", " "))
    print()

print("=== evidence spans for this patient (the oracle) ===")
for attr in (AttributeKind.SITE, AttributeKind.HISTOLOGY):
    for span in bundle.evidence_for(patient.patient_id, attr):
        doc = next(d for d in patient.documents if d.doc_id == span.doc_id)
        print(f"  {attr.value:10s} {span.doc_id}#{span.sentence_index}: "
              f"{doc.text[span.char_start:span.char_end]!r}")

print()
print("=== cross-document entailment check ===")
cross_doc = next(
    p for p in bundle.cancer_patients
    if attribute_entailed(bundle, p.patient_id, AttributeKind.SITE)
    and not any(attribute_entailed(bundle, p.patient_id, AttributeKind.SITE,
                                   doc_ids=[d.doc_id]) for d in p.documents))
print(f"{cross_doc.patient_id}: no single document entails the tumor site,")
print("but the union of its imaging and pathology reports does.")

print()
print("=== corpus stats ===")
stats = corpus_stats(bundle)
print(f"patients: {stats['n_registry']} registry + {stats['n_controls']} control")
print(f"documents by kind: {stats['document_kind_counts']}")
print(f"median assembled window length: {stats['assembled_word_length_median']} words")
print()
print("determinism:", corpus_hash(bundle) == corpus_hash(generate_corpus(config)))
