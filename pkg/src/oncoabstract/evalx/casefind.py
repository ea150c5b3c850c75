"""Patient-level case-finding evaluation under the [-7, +30] day rule.

Per patient, the verdict hinges on the first day whose score clears the
threshold.  Registry patients are correct when that day falls within
[diagnosis - 7, diagnosis + 30]; a first positive before the window counts
as both a false positive and a false negative (the alarm was false AND the
timely detection was missed); no positive day, or a first positive after
the window, is a false negative.  Non-registry patients are correct only
when every day stays negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

EARLY_DAYS = 7
LATE_DAYS = 30


@dataclass
class PatientVerdict:
    patient_id: str
    category: str          # TP | FP | FN | TN | FP+FN
    correct: bool
    first_positive_day: int | None
    diagnosis_date: int | None


@dataclass
class CaseFindingOutcome:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    verdicts: list[PatientVerdict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
                "n_patients": len(self.verdicts)}


def casefinding_patient_eval(day_scores: dict[str, list[tuple[int, float]]],
                             diagnosis_dates: dict[str, int],
                             threshold: float = 0.5) -> CaseFindingOutcome:
    """``day_scores``: patient -> [(day, score)]; ``diagnosis_dates`` covers
    registry patients only.  Verdicts are per patient and independent of
    input order."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    tp = fp = fn = tn = 0
    verdicts = []
    for pid in sorted(day_scores):
        days = sorted(day_scores[pid])
        first_pos = next((day for day, score in days if score >= threshold), None)
        diagnosis = diagnosis_dates.get(pid)
        if diagnosis is not None:
            lo, hi = diagnosis - EARLY_DAYS, diagnosis + LATE_DAYS
            if first_pos is not None and lo <= first_pos <= hi:
                tp += 1
                verdicts.append(PatientVerdict(pid, "TP", True, first_pos, diagnosis))
            elif first_pos is not None and first_pos < lo:
                fp += 1
                fn += 1
                verdicts.append(PatientVerdict(pid, "FP+FN", False, first_pos, diagnosis))
            else:
                fn += 1
                verdicts.append(PatientVerdict(pid, "FN", False, first_pos, diagnosis))
        else:
            if first_pos is None:
                tn += 1
                verdicts.append(PatientVerdict(pid, "TN", True, None, None))
            else:
                fp += 1
                verdicts.append(PatientVerdict(pid, "FP", False, first_pos, None))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 / (1.0 / precision + 1.0 / recall) if precision > 0 and recall > 0 else 0.0
    return CaseFindingOutcome(precision=precision, recall=recall, f1=f1,
                              tp=tp, fp=fp, fn=fn, tn=tn, verdicts=verdicts)
