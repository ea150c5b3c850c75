"""Bag-of-words multinomial logistic regression baseline.

Features are whitespace-word counts over the in-window text, capped at 255
per word (no subwords).  Training is convex: cross-entropy plus L2 on the
weights, optimized with the shared Adam implementation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..corpus import NOT_DOCUMENTED, CorpusBundle, LabelSpace
from ..textproc import normalize

BOW_MAGIC = b"OABBOW01"
COUNT_CAP = 255


@dataclass
class BowConfig:
    epochs: int = 300
    lr: float = 0.05
    l2: float = 1e-4
    seed: int = 0


class BowModel:
    def __init__(self, words: list[str], space: LabelSpace,
                 weights: np.ndarray, bias: np.ndarray):
        self.words = words
        self.word_index = {w: i for i, w in enumerate(words)}
        self.space = space
        self.weights = weights  # (n_words, n_classes)
        self.bias = bias

    def featurize(self, text: str) -> np.ndarray:
        vec = np.zeros(len(self.words), dtype=np.float32)
        for word in normalize(text).text.split():
            idx = self.word_index.get(word)
            if idx is not None and vec[idx] < COUNT_CAP:
                vec[idx] += 1.0
        return vec

    def predict(self, text: str) -> np.ndarray:
        vec = self.featurize(text)
        if vec.sum() == 0:
            probs = np.zeros(self.space.n_classes, dtype=np.float64)
            probs[self.space.index(NOT_DOCUMENTED)] = 1.0
            return probs
        logits = vec @ self.weights + self.bias
        logits -= logits.max()
        e = np.exp(logits)
        return (e / e.sum()).astype(np.float64)

    def predict_many(self, texts) -> np.ndarray:
        return np.stack([self.predict(t) for t in texts])

    def save(self, path: str) -> None:
        header = json.dumps({
            "format": 1, "words": self.words, "classes": list(self.space.classes),
            "attribute": self.space.attribute.value,
            "shapes": {"weights": list(self.weights.shape), "bias": list(self.bias.shape)},
        }, sort_keys=True, separators=(",", ":")).encode("utf-8")
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(BOW_MAGIC)
            fh.write(len(header).to_bytes(8, "little"))
            fh.write(header)
            fh.write(self.weights.astype("<f4").tobytes())
            fh.write(self.bias.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str) -> "BowModel":
        from ..corpus import AttributeKind
        with open(path, "rb") as fh:
            if fh.read(len(BOW_MAGIC)) != BOW_MAGIC:
                raise ValueError(f"{path}: not a bag-of-words model file")
            n = int.from_bytes(fh.read(8), "little")
            header = json.loads(fh.read(n).decode("utf-8"))
            w_shape = header["shapes"]["weights"]
            b_shape = header["shapes"]["bias"]
            weights = np.frombuffer(fh.read(4 * int(np.prod(w_shape))),
                                    dtype="<f4").reshape(w_shape).copy()
            bias = np.frombuffer(fh.read(4 * int(np.prod(b_shape))),
                                 dtype="<f4").reshape(b_shape).copy()
        space = LabelSpace(AttributeKind(header["attribute"]), tuple(header["classes"]))
        return cls(header["words"], space, weights, bias)


def window_text(patient, window=(30, 30), kinds=("Pathology", "Radiology", "Operative")) -> str:
    anchor = patient.registry.diagnosis_date
    lo, hi = anchor - window[0], anchor + window[1]
    return " ".join(d.text for d in patient.documents
                    if d.kind in set(kinds) and lo <= d.date <= hi)


def build_bow_dataset(bundle: CorpusBundle, attribute: str, patients,
                      window=(30, 30), kinds=("Pathology", "Radiology", "Operative")):
    space = bundle.label_spaces[attribute]
    texts, labels = [], []
    for p in patients:
        if p.registry is None:
            continue
        texts.append(window_text(p, window, kinds))
        labels.append(space.index(p.registry.labels[attribute]))
    return texts, np.array(labels)


def bow_train(texts, labels, space: LabelSpace, config: BowConfig = BowConfig()) -> BowModel:
    """Fit the regression with full-batch Adam; returns the fitted model."""
    labels = np.asarray(labels)
    counts: dict[str, int] = {}
    for t in texts:
        for w in set(normalize(t).text.split()):
            counts[w] = counts.get(w, 0) + 1
    words = sorted(w for w, c in counts.items() if c >= 2)
    model = BowModel(words, space, np.zeros((len(words), space.n_classes), dtype=np.float32),
                     np.zeros(space.n_classes, dtype=np.float32))
    feats = np.stack([model.featurize(t) for t in texts])
    rng = np.random.default_rng(config.seed)
    w = nc.param(rng.normal(0.0, 0.01, (len(words), space.n_classes)).astype(np.float32))
    b = nc.param(np.zeros(space.n_classes, dtype=np.float32))
    params = {"w": w, "b": b}
    state = nc.AdamState(lr=config.lr)
    x = nc.constant(feats)
    for _ in range(config.epochs):
        logits = nc.add(nc.matmul(x, w), b)
        loss = nc.add(nc.cross_entropy(logits, labels),
                      nc.mul(nc.sum_(nc.mul(w, w)), config.l2))
        nc.zero_grads(params)
        nc.backward(loss)
        nc.adam_step(params, nc.collect_grads(params), state)
    model.weights = w.data.copy()
    model.bias = b.data.copy()
    return model


def bow_final_loss(model: BowModel, texts, labels, l2: float = 1e-4) -> float:
    feats = np.stack([model.featurize(t) for t in texts])
    logits = feats @ model.weights + model.bias
    m = logits.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(logits - m).sum(axis=1))
    nll = lse - logits[np.arange(len(labels)), labels]
    return float(nll.mean() + l2 * float((model.weights ** 2).sum()))
