"""Dataset construction from patient-level supervision and training loops."""

from .datasets import (
    ALL_KINDS,
    AbstractionExample,
    CaseFindingExample,
    DatasetError,
    DefaultScheme,
    HardNegativeScheme,
    build_abstraction_dataset,
    build_casefinding_dataset,
    casefinding_eval_days,
    dataset_cache_key,
    document_days,
    load_examples,
    save_examples,
)
from .loop import (
    LeakageError,
    PretrainConfig,
    TrainConfig,
    TrainResult,
    dev_macro_auprc,
    pool_sentences,
    predict_probs,
    pretrain_encoder,
    train_model,
)

__all__ = [
    "ALL_KINDS", "AbstractionExample", "CaseFindingExample", "DatasetError",
    "DefaultScheme", "HardNegativeScheme", "build_abstraction_dataset",
    "build_casefinding_dataset", "casefinding_eval_days", "dataset_cache_key",
    "document_days", "load_examples", "save_examples", "LeakageError",
    "PretrainConfig", "TrainConfig", "TrainResult", "dev_macro_auprc",
    "pool_sentences", "predict_probs", "pretrain_encoder", "train_model",
]
