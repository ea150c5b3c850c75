"""Train the site extractor from patient-level labels only (a few minutes).

Run:  python3 demos/03_train_site_extractor.py
"""

import numpy as np

from oncoabstract import textproc as tp
from oncoabstract.corpus import AttributeKind, GeneratorConfig, fold_subset, generate_corpus, split_folds
from oncoabstract.evalx import evaluate_multiclass
from oncoabstract.model import ModelConfig
from oncoabstract.train import TrainConfig, build_abstraction_dataset, predict_probs, train_model

bundle = generate_corpus(GeneratorConfig(n_cancer_patients=900, n_control_patients=120,
                                         cross_doc_fraction=0.5, seed=11))
texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
vocab = tp.learn_vocab(texts, target_size=600)

assignment = split_folds(bundle, 5, seed=1)
cancer = bundle.cancer_patients
datasets = {}
for part, folds in (("train", (1, 2, 3)), ("dev", (4,)), ("test", (5,))):
    patients = fold_subset(cancer, assignment, folds)
    datasets[part] = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab,
                                               patients=patients)
print({part: len(ds) for part, ds in datasets.items()})

model_config = ModelConfig(vocab_size=len(vocab),
                           n_classes=bundle.label_spaces["site"].n_classes,
                           embed_dim=64, gru_hidden=64, word_attn_dim=64,
                           sent_attn_dim=64, seed=5)
result = train_model(TrainConfig(epochs=26, batch_size=16, patience=4, seed=5),
                     model_config, datasets["train"], datasets["dev"], vocab.content_hash())
for h in result.history:
    print(f"epoch {h['epoch']:2d}: loss {h['train_loss']:.3f} dev AUPRC {h['dev_metric']:.3f}")

probs = predict_probs(result.model, datasets["test"])
labels = np.array([ex.label_index for ex in datasets["test"]])
report = evaluate_multiclass(probs, labels, class_names=list(bundle.label_spaces["site"].classes))
print(f"\ntest: macro AUPRC {report.auprc:.3f}, macro AUROC {report.auroc:.3f}, "
      f"accuracy {report.accuracy:.3f}")
worst = sorted(report.per_class.items(), key=lambda kv: kv[1]["auprc"])[:3]
print("hardest classes:", [(code, round(e["auprc"], 3)) for code, e in worst])
