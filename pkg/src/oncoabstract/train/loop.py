"""Deterministic training loops: supervised fine-tuning with early stopping
on dev macro AUPRC, and masked-LM pretraining of the sentence encoder."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import numcore as nc
from ..evalx.metrics import UndefinedMetricError, average_precision, macro_ovr
from ..model import Model, ModelConfig, TINY_TRANSFORMER, mlm_corrupt, mlm_loss
from ..textproc import Vocab, normalize, split_sentences, tokenize

log = logging.getLogger(__name__)


class LeakageError(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-3
    patience: int = 3
    dev_metric: str = "macro_auprc"
    seed: int = 0
    window: tuple[int, int] = (30, 30)
    kinds: tuple[str, ...] = ("Pathology", "Radiology", "Operative")
    max_sentences: int = 256


@dataclass
class TrainResult:
    model: Model
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = 0.0


def predict_probs(model: Model, examples, batch_size: int = 64) -> np.ndarray:
    """Probability matrix over examples, batched for speed."""
    rows = []
    for i in range(0, len(examples), batch_size):
        chunk = [ex.sequence for ex in examples[i:i + batch_size]]
        logits, _ = model.forward_batch(chunk, train=False)
        rows.append(nc.softmax(logits, axis=-1).data)
    return np.concatenate(rows, axis=0)


def dev_macro_auprc(model: Model, examples) -> float:
    probs = predict_probs(model, examples)
    labels = np.array([ex.label_index for ex in examples])
    try:
        return macro_ovr(average_precision, probs, labels)
    except UndefinedMetricError:
        return 0.0


def train_model(config: TrainConfig, model_config: ModelConfig, train_set, dev_set,
                vocab_hash: str, init_encoder: Model | None = None) -> TrainResult:
    """Mini-batch training with per-epoch dev evaluation and early stopping.

    Raises LeakageError when a patient id appears in both train and dev.
    Identical inputs and seed give a bit-identical best checkpoint.
    """
    overlap = {ex.patient_id for ex in train_set} & {ex.patient_id for ex in dev_set}
    if overlap:
        raise LeakageError(f"{len(overlap)} patient ids shared between train and dev, "
                           f"e.g. {sorted(overlap)[:3]}")
    if not train_set:
        raise ValueError("empty training set")
    model = Model(model_config, vocab_hash)
    if init_encoder is not None:
        model.load_encoder_from(init_encoder)
    state = nc.AdamState(lr=config.lr)
    rng = np.random.default_rng(config.seed)
    best_params = {k: t.data.copy() for k, t in model.params.items()}
    best_metric = -1.0
    best_epoch = 0
    stale = 0
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        total_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start:start + config.batch_size]]
            logits, _ = model.forward_batch([ex.sequence for ex in batch], train=True, rng=rng)
            loss = nc.cross_entropy(logits, np.array([ex.label_index for ex in batch]))
            nc.zero_grads(model.params)
            nc.backward(loss)
            nc.adam_step(model.params, nc.collect_grads(model.params), state)
            total_loss += float(loss.data)
            n_batches += 1
        metric = dev_macro_auprc(model, dev_set) if dev_set else 0.0
        history.append({"epoch": epoch, "train_loss": total_loss / max(n_batches, 1),
                        "dev_metric": metric})
        log.info("epoch %d: loss %.4f dev %.4f", epoch, total_loss / max(n_batches, 1), metric)
        if metric > best_metric:
            best_metric = metric
            best_epoch = epoch
            best_params = {k: t.data.copy() for k, t in model.params.items()}
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break
    for k, t in model.params.items():
        t.data = best_params[k]
    return TrainResult(model=model, history=history, best_epoch=best_epoch,
                       best_metric=best_metric)


# ---------------------------------------------------------------------------
# masked-LM pretraining
# ---------------------------------------------------------------------------

@dataclass
class PretrainConfig:
    steps: int = 2000
    batch_size: int = 64
    mask_rate: float = 0.15
    lr: float = 1e-3
    seed: int = 0
    min_sentence_tokens: int = 3
    log_every: int = 200


def pool_sentences(pool_texts, vocab: Vocab, max_tokens: int = 64,
                   min_tokens: int = 3) -> list[np.ndarray]:
    """Tokenized sentences from the unlabeled note pool."""
    sentences = []
    for text in pool_texts:
        norm = normalize(text)
        for span in split_sentences(norm.text):
            toks = tokenize(vocab, norm.text[span.char_start:span.char_end])[:max_tokens]
            if len(toks) >= min_tokens:
                sentences.append(np.array([t.id for t in toks], dtype=np.int64))
    return sentences


def pretrain_encoder(config: PretrainConfig, model_config: ModelConfig,
                     pool_texts, vocab: Vocab) -> tuple[Model, list[dict]]:
    """MLM training over the pool; returns the encoder model and history."""
    if model_config.encoder != TINY_TRANSFORMER:
        raise ValueError("pretraining requires the tiny-transformer encoder")
    sentences = pool_sentences(pool_texts, vocab,
                               max_tokens=model_config.max_sentence_tokens,
                               min_tokens=config.min_sentence_tokens)
    if not sentences:
        raise ValueError("unlabeled pool produced no sentences")
    model = Model(model_config, vocab.content_hash())
    state = nc.AdamState(lr=config.lr)
    rng = np.random.default_rng(config.seed)
    history = []
    for step in range(config.steps):
        idx = rng.integers(0, len(sentences), size=config.batch_size)
        batch = [sentences[i] for i in idx]
        t_max = max(len(s) for s in batch)
        ids = np.zeros((len(batch), t_max), dtype=np.int64)
        mask = np.zeros((len(batch), t_max), dtype=bool)
        for i, s in enumerate(batch):
            ids[i, :len(s)] = s
            mask[i, :len(s)] = True
        corrupted, positions, targets = mlm_corrupt(
            ids.reshape(-1), vocab, config.mask_rate,
            seed=int(rng.integers(0, 2**31)))
        corrupted = corrupted.reshape(ids.shape)
        flat_positions = positions[0]
        rows, cols = flat_positions // t_max, flat_positions % t_max
        keep = mask[rows, cols]
        rows, cols, targets = rows[keep], cols[keep], targets[keep]
        loss, count = mlm_loss(model, corrupted, mask, (rows, cols), targets,
                               train=True, rng=rng)
        if count:
            nc.zero_grads(model.params)
            nc.backward(loss)
            nc.adam_step(model.params, nc.collect_grads(model.params), state)
        if step % config.log_every == 0 or step == config.steps - 1:
            history.append({"step": step, "mlm_loss": float(loss.data), "targets": count})
            log.info("pretrain step %d: mlm loss %.4f", step, float(loss.data))
    return model, history
