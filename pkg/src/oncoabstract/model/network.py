"""The abstraction network: embeddings, per-sentence encoding, word-level
attention, a (bi)GRU over sentence vectors, sentence-level attention, and a
linear softmax classifier.

The batched forward path packs every sentence of every example in the batch
into one padded block, so word-level work is a handful of large array ops
and only the sentence-level recurrence is sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..textproc import TokenSequence
from .config import CONTEXT_FREE, TINY_TRANSFORMER, ModelConfig


class EmptyInputError(ValueError):
    pass


class SentenceLengthError(ValueError):
    pass


@dataclass
class Prediction:
    """Class probabilities plus both attention levels for one example."""

    probs: np.ndarray                 # (n_classes,)
    sentence_weights: np.ndarray      # (n_sentences,)
    word_weights: list[np.ndarray]    # per sentence, (n_tokens,)
    argmax: int


def _uniform(rng, fan_in, fan_out, shape):
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return (rng.random(shape) * 2.0 - 1.0) * bound


class Model:
    """Parameter table plus forward passes; immutable at inference."""

    def __init__(self, config: ModelConfig, vocab_hash: str, params: dict | None = None):
        self.config = config
        self.vocab_hash = vocab_hash
        self.params = params if params is not None else self._init_params()

    # ------------------------------------------------------------------
    # parameters
    # ------------------------------------------------------------------

    def _init_params(self) -> dict[str, nc.Tensor]:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        dt = nc.default_dtype()
        p: dict[str, nc.Tensor] = {}

        def add(name, arr):
            p[name] = nc.param(np.asarray(arr, dtype=dt), name=name)

        def linear(name, fan_in, fan_out):
            add(f"{name}.w", _uniform(rng, fan_in, fan_out, (fan_in, fan_out)))
            add(f"{name}.b", np.zeros(fan_out))

        d = cfg.embed_dim
        add("embed.table", rng.normal(0.0, 0.02, (cfg.vocab_size, d)))
        if cfg.encoder == TINY_TRANSFORMER:
            add("pos.table", rng.normal(0.0, 0.02, (cfg.max_sentence_tokens, d)))
            for i in range(cfg.layers):
                for proj in ("wq", "wk", "wv", "wo"):
                    linear(f"enc{i}.{proj}", d, d)
                add(f"enc{i}.ln1.g", np.ones(d))
                add(f"enc{i}.ln1.b", np.zeros(d))
                linear(f"enc{i}.ff1", d, cfg.ff_dim)
                linear(f"enc{i}.ff2", cfg.ff_dim, d)
                add(f"enc{i}.ln2.g", np.ones(d))
                add(f"enc{i}.ln2.b", np.zeros(d))
            add("mlm.bias", np.zeros(cfg.vocab_size))
        linear("wattn", d, cfg.word_attn_dim)
        add("wattn.u", _uniform(rng, cfg.word_attn_dim, 1, (cfg.word_attn_dim, 1)))
        h = cfg.gru_hidden
        directions = ("f", "b") if cfg.bidirectional_sentence_gru else ("f",)
        for tag in directions:
            for gate in ("z", "r", "h"):
                add(f"sgru_{tag}.w{gate}", _uniform(rng, d, h, (d, h)))
                add(f"sgru_{tag}.u{gate}", _uniform(rng, h, h, (h, h)))
                add(f"sgru_{tag}.b{gate}", np.zeros(h))
        # sentence states are GRU outputs with their input vectors appended,
        # so attention can score undiffused sentence content directly
        sent_dim = h * len(directions) + d
        linear("sattn", sent_dim, cfg.sent_attn_dim)
        add("sattn.u", _uniform(rng, cfg.sent_attn_dim, 1, (cfg.sent_attn_dim, 1)))
        linear("cls", sent_dim, cfg.n_classes)
        return p

    def encoder_param_names(self) -> list[str]:
        """Parameters transferable from masked-LM pretraining."""
        names = ["embed.table"]
        if self.config.encoder == TINY_TRANSFORMER:
            names.append("pos.table")
            names.extend(n for n in self.params if n.startswith("enc"))
            names.append("mlm.bias")
        return names

    def load_encoder_from(self, other: "Model") -> None:
        for name in self.encoder_param_names():
            if name in other.params:
                src = other.params[name].data
                if src.shape != self.params[name].data.shape:
                    raise ValueError(f"encoder parameter {name} shape mismatch: "
                                     f"{src.shape} vs {self.params[name].data.shape}")
                self.params[name].data = src.copy()

    # ------------------------------------------------------------------
    # encoding
    # ------------------------------------------------------------------

    def _encode(self, x: nc.Tensor, mask: np.ndarray, train: bool, rng) -> nc.Tensor:
        """Per-sentence contextualization over (n_sent, T, d) blocks."""
        cfg = self.config
        if cfg.encoder == CONTEXT_FREE:
            return x
        n, t, d = x.shape
        if t > cfg.max_sentence_tokens:
            raise SentenceLengthError(
                f"sentence length {t} exceeds cap {cfg.max_sentence_tokens}")
        p = self.params
        x = nc.add(x, p["pos.table"][:t])
        heads, dh = cfg.heads, d // cfg.heads
        attn_mask = mask[:, None, None, :]
        for i in range(cfg.layers):
            q = nc.add(nc.matmul(x, p[f"enc{i}.wq.w"]), p[f"enc{i}.wq.b"])
            k = nc.add(nc.matmul(x, p[f"enc{i}.wk.w"]), p[f"enc{i}.wk.b"])
            v = nc.add(nc.matmul(x, p[f"enc{i}.wv.w"]), p[f"enc{i}.wv.b"])
            q = nc.swapaxes(nc.reshape(q, (n, t, heads, dh)), 1, 2)
            k = nc.swapaxes(nc.reshape(k, (n, t, heads, dh)), 1, 2)
            v = nc.swapaxes(nc.reshape(v, (n, t, heads, dh)), 1, 2)
            scores = nc.mul(nc.matmul(q, nc.swapaxes(k, 2, 3)), 1.0 / math.sqrt(dh))
            weights = nc.softmax(scores, axis=-1, mask=attn_mask)
            ctx = nc.matmul(weights, v)
            ctx = nc.reshape(nc.swapaxes(ctx, 1, 2), (n, t, d))
            ctx = nc.add(nc.matmul(ctx, p[f"enc{i}.wo.w"]), p[f"enc{i}.wo.b"])
            ctx = nc.dropout(ctx, self.config.dropout_rate, rng, train)
            x = nc.layer_norm(nc.add(x, ctx), p[f"enc{i}.ln1.g"], p[f"enc{i}.ln1.b"])
            ff = nc.relu(nc.add(nc.matmul(x, p[f"enc{i}.ff1.w"]), p[f"enc{i}.ff1.b"]))
            ff = nc.add(nc.matmul(ff, p[f"enc{i}.ff2.w"]), p[f"enc{i}.ff2.b"])
            ff = nc.dropout(ff, self.config.dropout_rate, rng, train)
            x = nc.layer_norm(nc.add(x, ff), p[f"enc{i}.ln2.g"], p[f"enc{i}.ln2.b"])
        return x

    def _attend(self, prefix: str, h: nc.Tensor, mask: np.ndarray):
        """Additive attention over axis 1 of (n, L, d); returns (vec, alpha)."""
        p = self.params
        scores = nc.matmul(nc.tanh(nc.add(nc.matmul(h, p[f"{prefix}.w"]), p[f"{prefix}.b"])),
                           p[f"{prefix}.u"])
        n, length = h.shape[0], h.shape[1]
        alpha = nc.softmax(nc.reshape(scores, (n, length)), axis=-1, mask=mask)
        vec = nc.reshape(nc.matmul(nc.reshape(alpha, (n, 1, length)), h), (n, h.shape[2]))
        return vec, alpha

    def _gru_direction(self, tag: str, x: nc.Tensor, mask: np.ndarray, reverse: bool):
        """Spec recurrence: h_t = (1 - z_t) * h_{t-1} + z_t * h~_t."""
        p = self.params
        b, s, _ = x.shape
        hdim = self.config.gru_hidden
        xz = nc.add(nc.matmul(x, p[f"sgru_{tag}.wz"]), p[f"sgru_{tag}.bz"])
        xr = nc.add(nc.matmul(x, p[f"sgru_{tag}.wr"]), p[f"sgru_{tag}.br"])
        xh = nc.add(nc.matmul(x, p[f"sgru_{tag}.wh"]), p[f"sgru_{tag}.bh"])
        h = nc.constant(np.zeros((b, hdim), dtype=x.dtype))
        steps = range(s - 1, -1, -1) if reverse else range(s)
        outputs: list[nc.Tensor | None] = [None] * s
        for t in steps:
            z = nc.sigmoid(nc.add(xz[:, t, :], nc.matmul(h, p[f"sgru_{tag}.uz"])))
            r = nc.sigmoid(nc.add(xr[:, t, :], nc.matmul(h, p[f"sgru_{tag}.ur"])))
            cand = nc.tanh(nc.add(xh[:, t, :], nc.matmul(nc.mul(r, h), p[f"sgru_{tag}.uh"])))
            new_h = nc.add(nc.mul(nc.add(1.0, nc.mul(z, -1.0)), h), nc.mul(z, cand))
            m = mask[:, t:t + 1].astype(x.dtype)
            h = nc.add(nc.mul(new_h, nc.constant(m)), nc.mul(h, nc.constant(1.0 - m)))
            outputs[t] = h
        return nc.stack(outputs, axis=1)

    # ------------------------------------------------------------------
    # forward
    # ------------------------------------------------------------------

    def forward_batch(self, sequences: list[TokenSequence], train: bool = False,
                      rng: np.random.Generator | None = None):
        """Logits for a batch; returns (logits, aux) with attention arrays."""
        if not sequences:
            raise EmptyInputError("empty batch")
        for seq in sequences:
            if seq.n_sentences == 0:
                raise EmptyInputError("sequence with no sentences")
        if train and rng is None:
            rng = np.random.default_rng(self.config.seed)
        cfg = self.config
        seg_lengths = [seq.n_sentences for seq in sequences]
        sent_ids = [seq.sentence_ids(i) for seq in sequences for i in range(seq.n_sentences)]
        n_sent = len(sent_ids)
        t_max = max(len(s) for s in sent_ids)
        ids = np.zeros((n_sent, t_max), dtype=np.int64)
        tok_mask = np.zeros((n_sent, t_max), dtype=bool)
        for i, s in enumerate(sent_ids):
            ids[i, :len(s)] = s
            tok_mask[i, :len(s)] = True

        x = nc.lookup(self.params["embed.table"], ids)
        x = nc.dropout(x, cfg.dropout_rate, rng, train)
        h = self._encode(x, tok_mask, train, rng)
        sent_vecs, word_alpha = self._attend("wattn", h, tok_mask)

        b, s_max = len(sequences), max(seg_lengths)
        packed = nc.pad_segments(sent_vecs, seg_lengths)
        sent_mask = np.zeros((b, s_max), dtype=bool)
        for i, n in enumerate(seg_lengths):
            sent_mask[i, :n] = True
        states = self._gru_direction("f", packed, sent_mask, reverse=False)
        if cfg.bidirectional_sentence_gru:
            back = self._gru_direction("b", packed, sent_mask, reverse=True)
            states = nc.concat([states, back], axis=2)
        # heavier dropout on the recurrent channel: the GRU spreads evidence
        # over every position, so without this the classifier can ignore the
        # attended content and the attention never learns to find evidence
        states = nc.dropout(states, min(3 * cfg.dropout_rate, 0.5), rng, train)
        states = nc.concat([states, packed], axis=2)
        context, sent_alpha = self._attend("sattn", states, sent_mask)
        context = nc.dropout(context, cfg.dropout_rate, rng, train)
        logits = nc.add(nc.matmul(context, self.params["cls.w"]), self.params["cls.b"])
        aux = {
            "word_alpha": word_alpha.data,
            "sent_alpha": sent_alpha.data,
            "seg_lengths": seg_lengths,
            "sent_token_lengths": [len(s) for s in sent_ids],
        }
        return logits, aux

    def predict(self, sequences: list[TokenSequence]) -> list[Prediction]:
        logits, aux = self.forward_batch(sequences, train=False)
        probs = nc.softmax(logits, axis=-1).data
        preds = []
        offset = 0
        for i, seq in enumerate(sequences):
            k = aux["seg_lengths"][i]
            sent_w = aux["sent_alpha"][i, :k].astype(np.float64)
            word_w = []
            for j in range(k):
                n_tok = aux["sent_token_lengths"][offset + j]
                word_w.append(aux["word_alpha"][offset + j, :n_tok].astype(np.float64))
            offset += k
            preds.append(Prediction(
                probs=probs[i].astype(np.float64),
                sentence_weights=sent_w,
                word_weights=word_w,
                argmax=int(np.argmax(probs[i])),
            ))
        return preds


def forward_abstraction(model: Model, sequence: TokenSequence) -> Prediction:
    """Single-example prediction carrying both attention levels."""
    return model.predict([sequence])[0]


# ---------------------------------------------------------------------------
# small public pieces, used directly by unit tests and probes
# ---------------------------------------------------------------------------

def encode_sentences(model: Model, ids: np.ndarray, mask: np.ndarray,
                     train: bool = False) -> nc.Tensor:
    """Contextualize (n_sent, T) padded token ids; identity in context-free mode."""
    x = nc.lookup(model.params["embed.table"], ids)
    return model._encode(x, mask, train, None if not train else np.random.default_rng(0))


def gru_sequence(model: Model, vectors: np.ndarray, tag: str = "f") -> np.ndarray:
    """Run the sentence GRU over one unbatched (S, d) sequence."""
    if len(vectors) == 0:
        raise EmptyInputError("empty sequence")
    x = nc.constant(vectors[None, :, :].astype(nc.default_dtype()))
    mask = np.ones((1, len(vectors)), dtype=bool)
    return model._gru_direction(tag, x, mask, reverse=False).data[0]


def attend(model: Model, prefix: str, hidden: np.ndarray):
    """Additive attention over one (L, d) block; returns (vector, weights)."""
    h = nc.constant(hidden[None, :, :].astype(nc.default_dtype()))
    mask = np.ones((1, len(hidden)), dtype=bool)
    vec, alpha = model._attend(prefix, h, mask)
    return vec.data[0], alpha.data[0]
