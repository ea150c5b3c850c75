"""Assisted-curation HTTP service: event-sourced review state over
precomputed extractions."""

from .store import (
    STATUS_ACCEPTED,
    STATUS_CORRECTED,
    STATUS_PENDING,
    CurationItem,
    CurationStore,
    EventLog,
    InvalidVerdictError,
    PredictionRecord,
    UnknownItemError,
)
from .inference import (
    checkpoint_models,
    load_predictions,
    run_inference,
    save_predictions,
    validate_rationale_spans,
)
from .app import create_app

__all__ = [
    "STATUS_ACCEPTED", "STATUS_CORRECTED", "STATUS_PENDING", "CurationItem",
    "CurationStore", "EventLog", "InvalidVerdictError", "PredictionRecord",
    "UnknownItemError", "checkpoint_models", "load_predictions", "run_inference",
    "save_predictions", "validate_rationale_spans", "create_app",
]
