"""Metrics, patient-level case-finding evaluation, and the ablation harness."""

from .metrics import (
    MetricsReport,
    UndefinedMetricError,
    auroc_binary,
    average_precision,
    evaluate_multiclass,
    macro_ovr,
)
from .casefind import (
    EARLY_DAYS,
    LATE_DAYS,
    CaseFindingOutcome,
    PatientVerdict,
    casefinding_patient_eval,
)
from .ablation import Variant, ablation_tsv, run_ablation

__all__ = [
    "MetricsReport", "UndefinedMetricError", "auroc_binary", "average_precision",
    "evaluate_multiclass", "macro_ovr", "EARLY_DAYS", "LATE_DAYS",
    "CaseFindingOutcome", "PatientVerdict", "casefinding_patient_eval",
    "Variant", "ablation_tsv", "run_ablation",
]
