"""Ranking metrics: AUROC (Mann-Whitney), average precision, macro one-vs-rest.

AUROC counts concordant pairs with half credit for ties.  Average precision
is the step-wise sum over positives of precision-at-rank; the default ranks
by descending score with stable input order on ties, and ``ties="block"``
uses the order-independent variant where each distinct score is one
threshold step (every positive in a tied block contributes the precision at
the end of the block).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UndefinedMetricError(ValueError):
    pass


def auroc_binary(scores, labels) -> float:
    """Probability a random positive outranks a random negative."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise UndefinedMetricError("auroc needs at least one positive and one negative")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # average rank, 1-based
        i = j + 1
    sum_pos = ranks[labels == 1].sum()
    p, n = len(pos), len(neg)
    return float((sum_pos - p * (p + 1) / 2.0) / (p * n))


def average_precision(scores, labels, ties: str = "stable") -> float:
    """Step-wise AP: sum over positives of precision at their rank, over P."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise UndefinedMetricError("average precision needs at least one positive")
    if ties == "stable":
        order = np.argsort(-scores, kind="stable")
        total = 0.0
        hits = 0
        for rank, idx in enumerate(order, start=1):
            if labels[idx] == 1:
                hits += 1
                total += hits / rank
        return total / n_pos
    if ties == "block":
        total = 0.0
        seen = 0
        hits = 0
        for value in np.unique(scores)[::-1]:
            in_block = scores == value
            seen += int(in_block.sum())
            block_pos = int(labels[in_block].sum())
            hits += block_pos
            total += block_pos * (hits / seen)
        return total / n_pos
    raise ValueError(f"unknown tie policy {ties!r}")


@dataclass
class MetricsReport:
    auroc: float
    auprc: float
    accuracy: float
    n_instances: int
    averaging: str
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "auroc": self.auroc,
            "auprc": self.auprc,
            "accuracy": self.accuracy,
            "n_instances": self.n_instances,
            "averaging": self.averaging,
            "per_class": self.per_class,
        }


def macro_ovr(metric, prob_matrix, labels) -> float:
    """One-vs-rest macro average over classes with at least one positive."""
    prob_matrix = np.asarray(prob_matrix, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if not np.allclose(prob_matrix.sum(axis=1), 1.0, atol=1e-4):
        raise ValueError("probability rows must sum to 1")
    values = []
    for c in range(prob_matrix.shape[1]):
        binary = (labels == c).astype(int)
        if binary.sum() == 0:
            continue
        try:
            values.append(metric(prob_matrix[:, c], binary))
        except UndefinedMetricError:
            continue
    if not values:
        raise UndefinedMetricError("no class has both positives and negatives")
    return float(np.mean(values))


def evaluate_multiclass(prob_matrix, labels, class_names=None) -> MetricsReport:
    """Macro AUROC/AUPRC plus accuracy and a per-class breakdown."""
    prob_matrix = np.asarray(prob_matrix, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    per_class = {}
    for c in range(prob_matrix.shape[1]):
        binary = (labels == c).astype(int)
        if binary.sum() == 0:
            continue
        name = class_names[c] if class_names else str(c)
        entry = {"n_positive": int(binary.sum())}
        try:
            entry["auroc"] = auroc_binary(prob_matrix[:, c], binary)
        except UndefinedMetricError:
            entry["auroc"] = None
        entry["auprc"] = average_precision(prob_matrix[:, c], binary)
        per_class[name] = entry
    aurocs = [e["auroc"] for e in per_class.values() if e["auroc"] is not None]
    auprcs = [e["auprc"] for e in per_class.values()]
    accuracy = float((prob_matrix.argmax(axis=1) == labels).mean())
    return MetricsReport(
        auroc=float(np.mean(aurocs)) if aurocs else 0.0,
        auprc=float(np.mean(auprcs)) if auprcs else 0.0,
        accuracy=accuracy,
        n_instances=len(labels),
        averaging="macro-ovr",
        per_class=per_class,
    )
