"""Neural abstraction model: HAN over GRU-contextualized sentence vectors,
with an optional tiny transformer sentence encoder and MLM pretraining."""

from .config import CONTEXT_FREE, TINY_TRANSFORMER, ModelConfig
from .network import (
    EmptyInputError,
    Model,
    Prediction,
    SentenceLengthError,
    attend,
    encode_sentences,
    forward_abstraction,
    gru_sequence,
)
from .mlm import UnsupportedEncoderError, mlm_corrupt, mlm_loss
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "CONTEXT_FREE", "TINY_TRANSFORMER", "ModelConfig", "EmptyInputError",
    "Model", "Prediction", "SentenceLengthError", "attend", "encode_sentences",
    "forward_abstraction", "gru_sequence", "UnsupportedEncoderError",
    "mlm_corrupt", "mlm_loss", "CheckpointError", "load_checkpoint",
    "save_checkpoint",
]
