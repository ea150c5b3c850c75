"""Model configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass

CONTEXT_FREE = "context-free"
TINY_TRANSFORMER = "tiny-transformer"


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters for the abstraction/case-finding network.

    ``encoder`` selects per-sentence contextualization: ``context-free``
    passes embeddings through unchanged, ``tiny-transformer`` applies
    ``layers`` blocks of multi-head self-attention over each sentence.
    """

    vocab_size: int
    n_classes: int
    embed_dim: int = 128
    encoder: str = CONTEXT_FREE
    layers: int = 2
    heads: int = 4
    ff_dim: int = 256
    gru_hidden: int = 128
    word_attn_dim: int = 128
    sent_attn_dim: int = 128
    bidirectional_sentence_gru: bool = True
    dropout_rate: float = 0.1
    max_sentence_tokens: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.encoder not in (CONTEXT_FREE, TINY_TRANSFORMER):
            raise ValueError(f"unknown encoder kind {self.encoder!r}")
        if self.encoder == TINY_TRANSFORMER and self.embed_dim % self.heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelConfig":
        return cls(**raw)
