"""Masked-language-model corruption and loss for encoder pretraining."""

from __future__ import annotations

import numpy as np

from .. import numcore as nc
from ..textproc import SPECIALS, Vocab
from .config import TINY_TRANSFORMER
from .network import Model


class UnsupportedEncoderError(ValueError):
    pass


def mlm_corrupt(ids: np.ndarray, vocab: Vocab, mask_rate: float, seed: int):
    """BERT-style corruption of a 1-D id sequence.

    Special tokens are never selected.  Of the selected positions, 80%
    become [MASK], 10% a random non-special token, 10% stay unchanged.
    Returns (corrupted ids, target positions, target ids); deterministic in
    the seed.
    """
    if not 0.0 < mask_rate < 1.0:
        raise ValueError("mask_rate must be in (0, 1)")
    ids = np.asarray(ids, dtype=np.int64)
    rng = np.random.default_rng(seed)
    select_roll = rng.random(ids.shape)
    action_roll = rng.random(ids.shape)
    random_ids = rng.integers(len(SPECIALS), len(vocab), size=ids.shape)
    selectable = ids >= len(SPECIALS)
    selected = (select_roll < mask_rate) & selectable
    corrupted = ids.copy()
    corrupted[selected & (action_roll < 0.8)] = vocab.mask_id
    swap = selected & (action_roll >= 0.8) & (action_roll < 0.9)
    corrupted[swap] = random_ids[swap]
    positions = np.nonzero(selected)
    return corrupted, positions, ids[selected]


def mlm_loss(model: Model, corrupted: np.ndarray, token_mask: np.ndarray,
             positions, target_ids: np.ndarray, train: bool = False,
             rng: np.random.Generator | None = None):
    """Cross-entropy over the vocabulary at target positions only.

    ``corrupted`` is a padded (n_sent, T) id block with ``token_mask``
    marking real tokens; ``positions`` is the (rows, cols) pair of target
    coordinates.  The output projection is tied to the input embeddings.
    Returns (loss, n_targets); the loss is 0 when there are no targets.
    """
    if model.config.encoder != TINY_TRANSFORMER:
        raise UnsupportedEncoderError(
            "masked-LM pretraining requires the tiny-transformer encoder")
    rows, cols = positions
    n_targets = len(target_ids)
    if n_targets == 0:
        return nc.constant(np.zeros(())), 0
    x = nc.lookup(model.params["embed.table"], np.asarray(corrupted, dtype=np.int64))
    x = nc.dropout(x, model.config.dropout_rate, rng, train)
    h = model._encode(x, token_mask, train, rng)
    t = h.shape[1]
    flat = nc.reshape(h, (h.shape[0] * t, h.shape[2]))
    picked = flat[np.asarray(rows) * t + np.asarray(cols)]
    logits = nc.add(nc.matmul(picked, nc.transpose2d(model.params["embed.table"])),
                    model.params["mlm.bias"])
    return nc.cross_entropy(logits, np.asarray(target_ids)), n_targets
