"""Ablation harness: train and evaluate input variants under identical seeds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..corpus import AttributeKind, CorpusBundle, fold_subset, split_folds
from ..model import ModelConfig
from ..textproc import Vocab
from .metrics import MetricsReport, evaluate_multiclass

if TYPE_CHECKING:
    from ..train import TrainConfig


@dataclass(frozen=True)
class Variant:
    kinds: tuple[str, ...]
    window: tuple[int, int]

    @property
    def name(self) -> str:
        kinds = ",".join(k[:4].lower() for k in self.kinds)
        return f"{kinds}@[-{self.window[0]},{self.window[1]}]"


def run_ablation(bundle: CorpusBundle, variants: list[Variant], attribute: AttributeKind,
                 vocab: Vocab, model_config: ModelConfig, train_config: TrainConfig,
                 n_folds: int = 5, train_folds=(1, 2, 3), dev_folds=(4,), test_folds=(5,),
                 fold_seed: int = 0) -> dict:
    """Per-variant metrics plus pairwise AUPRC deltas, same folds and seeds."""
    from ..train import build_abstraction_dataset, predict_probs, train_model

    if len(variants) < 2:
        raise ValueError("ablation needs at least two variants")
    assignment = split_folds(bundle, n_folds, seed=fold_seed)
    cancer = bundle.cancer_patients
    splits = {
        "train": fold_subset(cancer, assignment, train_folds),
        "dev": fold_subset(cancer, assignment, dev_folds),
        "test": fold_subset(cancer, assignment, test_folds),
    }
    results: dict[str, MetricsReport] = {}
    for variant in variants:
        sets = {}
        for part, patients in splits.items():
            sets[part] = build_abstraction_dataset(
                bundle, attribute, vocab, window=variant.window, kinds=variant.kinds,
                max_sentences=train_config.max_sentences, patients=patients)
        result = train_model(train_config, model_config, sets["train"], sets["dev"],
                             vocab.content_hash())
        probs = predict_probs(result.model, sets["test"])
        labels = np.array([ex.label_index for ex in sets["test"]])
        space = bundle.label_spaces[attribute.value]
        results[variant.name] = evaluate_multiclass(probs, labels,
                                                    class_names=list(space.classes))
    deltas = []
    names = [v.name for v in variants]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            deltas.append({
                "from": names[i], "to": names[j],
                "auprc_delta": results[names[j]].auprc - results[names[i]].auprc,
            })
    return {"attribute": attribute.value,
            "variants": {name: report.to_dict() for name, report in results.items()},
            "deltas": deltas}


def ablation_tsv(result: dict) -> str:
    """Fixed-column TSV rendering of an ablation result."""
    lines = ["variant\tauroc\tauprc\taccuracy\tn"]
    for name, report in result["variants"].items():
        lines.append(f"{name}\t{report['auroc']:.4f}\t{report['auprc']:.4f}\t"
                     f"{report['accuracy']:.4f}\t{report['n_instances']}")
    lines.append("")
    lines.append("from\tto\tauprc_delta")
    for d in result["deltas"]:
        lines.append(f"{d['from']}\t{d['to']}\t{d['auprc_delta']:+.4f}")
    return "\n".join(lines) + "\n"
