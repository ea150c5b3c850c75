"""Rule-based and bag-of-words baselines next to the neural model, plus
attention rationales for a few predictions.

Run:  python3 demos/04_baselines_and_rationales.py
"""

import numpy as np

from oncoabstract import textproc as tp
from oncoabstract.baselines import BowConfig, bow_train, build_bow_dataset, ontology_predict_patient
from oncoabstract.corpus import AttributeKind, GeneratorConfig, fold_subset, generate_corpus, split_folds
from oncoabstract.evalx import evaluate_multiclass
from oncoabstract.model import ModelConfig
from oncoabstract.rationale import extract_rationale
from oncoabstract.train import TrainConfig, build_abstraction_dataset, train_model

bundle = generate_corpus(GeneratorConfig(n_cancer_patients=500, n_control_patients=80,
                                         cross_doc_fraction=0.5, seed=19))
texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
vocab = tp.learn_vocab(texts, target_size=600)
assignment = split_folds(bundle, 5, seed=1)
cancer = bundle.cancer_patients
train_p = fold_subset(cancer, assignment, (1, 2, 3))
dev_p = fold_subset(cancer, assignment, (4,))
test_p = fold_subset(cancer, assignment, (5,))
space = bundle.label_spaces["site"]

onto = np.stack([ontology_predict_patient(bundle, p, "site") for p in test_p])
labels = np.array([space.index(p.registry.labels["site"]) for p in test_p])
print(f"ontology alias matching : AUPRC {evaluate_multiclass(onto, labels).auprc:.3f}")

tx_train, y_train = build_bow_dataset(bundle, "site", train_p)
tx_test, y_test = build_bow_dataset(bundle, "site", test_p)
bow = bow_train(tx_train, y_train, space, BowConfig(epochs=300, seed=0))
print(f"bag-of-words regression : AUPRC {evaluate_multiclass(bow.predict_many(tx_test), y_test).auprc:.3f}")

ds_train = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab, patients=train_p)
ds_dev = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab, patients=dev_p)
ds_test = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab, patients=test_p)
mc = ModelConfig(vocab_size=len(vocab), n_classes=space.n_classes, embed_dim=64,
                 gru_hidden=64, word_attn_dim=64, sent_attn_dim=64, seed=3)
result = train_model(TrainConfig(epochs=14, batch_size=16, patience=3, seed=3),
                     mc, ds_train, ds_dev, vocab.content_hash())
from oncoabstract.train import predict_probs  # noqa: E402

probs = predict_probs(result.model, ds_test)
print(f"attention network       : AUPRC "
      f"{evaluate_multiclass(probs, np.array([e.label_index for e in ds_test])).auprc:.3f}")

print("\n=== rationales ===")
docs = {d.doc_id: d.text for p in bundle.patients for d in p.documents}
for ex in ds_test[:3]:
    pred = result.model.predict([ex.sequence])[0]
    rationale = extract_rationale(pred, ex.sequence, k=2)
    truth = space.classes[ex.label_index]
    guess = space.classes[pred.argmax]
    print(f"\n{ex.patient_id}: predicted {guess} (truth {truth})")
    for entry in rationale.entries:
        snippet = docs[entry.doc_id][entry.char_start:entry.char_end]
        print(f"  [{entry.weight:.3f}] {snippet}")
