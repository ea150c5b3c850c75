"""Comparison systems: ontology rule matching and bag-of-words regression."""

from .ontology import count_alias_hits, ontology_predict, ontology_predict_patient
from .bow import (
    BowConfig,
    BowModel,
    bow_final_loss,
    bow_train,
    build_bow_dataset,
    window_text,
)

__all__ = [
    "count_alias_hits", "ontology_predict", "ontology_predict_patient",
    "BowConfig", "BowModel", "bow_final_loss", "bow_train",
    "build_bow_dataset", "window_text",
]
