"""Domain types for the synthetic EMR + registry corpus."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class ConfigError(ValueError):
    """Invalid generator configuration; the message names the field."""


class AttributeKind(str, Enum):
    """The eight abstraction targets; each owns one label space."""

    SITE = "site"
    HISTOLOGY = "histology"
    CLINICAL_T = "clinical_t"
    CLINICAL_N = "clinical_n"
    CLINICAL_M = "clinical_m"
    PATH_T = "path_t"
    PATH_N = "path_n"
    PATH_M = "path_m"


NOT_DOCUMENTED = "not-documented"

SITE_CODE_RE = re.compile(r"^C\d\d(\.\d)?$")
HISTOLOGY_CODE_RE = re.compile(r"^\d{4}$")
T_CLASSES = ("Tis", "T0", "T1", "T2", "T3", "T4", NOT_DOCUMENTED)
N_CLASSES = ("N0", "N1+", NOT_DOCUMENTED)
M_CLASSES = ("M0", "M1", NOT_DOCUMENTED)

DOC_KINDS = ("Pathology", "Radiology", "Operative")


@dataclass(frozen=True)
class LabelSpace:
    """Ordered class codes for one attribute, sentinel included."""

    attribute: AttributeKind
    classes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ConfigError(f"label space for {self.attribute.value} has duplicate codes")
        if NOT_DOCUMENTED not in self.classes:
            raise ConfigError(f"label space for {self.attribute.value} lacks the sentinel class")
        codes = [c for c in self.classes if c != NOT_DOCUMENTED]
        if self.attribute is AttributeKind.SITE:
            bad = [c for c in codes if not SITE_CODE_RE.match(c)]
        elif self.attribute is AttributeKind.HISTOLOGY:
            bad = [c for c in codes if not HISTOLOGY_CODE_RE.match(c)]
        elif self.attribute in (AttributeKind.CLINICAL_T, AttributeKind.PATH_T):
            bad = [c for c in codes if c not in T_CLASSES]
        elif self.attribute in (AttributeKind.CLINICAL_N, AttributeKind.PATH_N):
            bad = [c for c in codes if c not in N_CLASSES]
        else:
            bad = [c for c in codes if c not in M_CLASSES]
        if bad:
            raise ConfigError(f"label space for {self.attribute.value} has invalid codes {bad}")

    def index(self, code: str) -> int:
        return self.classes.index(code)

    @property
    def n_classes(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class ClinicalDocument:
    doc_id: str
    patient_id: str
    kind: str
    date: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ConfigError(f"document {self.doc_id} has empty text")
        if self.kind not in DOC_KINDS:
            raise ConfigError(f"document {self.doc_id} has unknown kind {self.kind}")
        if self.date < 0:
            raise ConfigError(f"document {self.doc_id} has negative date")


@dataclass(frozen=True)
class RegistryRecord:
    patient_id: str
    diagnosis_date: int
    labels: dict  # AttributeKind.value -> class code


@dataclass
class Patient:
    patient_id: str
    documents: list[ClinicalDocument]
    registry: RegistryRecord | None = None

    @property
    def is_cancer(self) -> bool:
        return self.registry is not None


@dataclass(frozen=True)
class EvidenceSpan:
    """A planted span whose text entails the label under template semantics."""

    doc_id: str
    attribute: AttributeKind
    char_start: int
    char_end: int
    sentence_index: int


@dataclass(frozen=True)
class GeneratorConfig:
    n_cancer_patients: int = 200
    n_control_patients: int = 50
    n_site_classes: int = 12
    n_histology_classes: int = 10
    cross_doc_fraction: float = 0.35
    negation_rate: float = 0.7
    variation_rate: float = 0.5
    docs_per_patient: tuple[int, int] = (3, 7)
    pre_diagnosis_history_days: tuple[int, int] = (40, 120)
    seed: int = 0

    def validate(self, max_sites: int, max_histologies: int) -> None:
        for name in ("n_cancer_patients", "n_control_patients"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 1 <= self.n_site_classes <= max_sites:
            raise ConfigError(f"n_site_classes must be in [1, {max_sites}]")
        if not 1 <= self.n_histology_classes <= max_histologies:
            raise ConfigError(f"n_histology_classes must be in [1, {max_histologies}]")
        for name in ("cross_doc_fraction", "negation_rate", "variation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        lo, hi = self.docs_per_patient
        if lo < 1 or hi < lo:
            raise ConfigError("docs_per_patient must satisfy 1 <= min <= max")
        lo, hi = self.pre_diagnosis_history_days
        if lo < 1 or hi < lo:
            raise ConfigError("pre_diagnosis_history_days must satisfy 1 <= min <= max")


@dataclass
class CorpusBundle:
    """A generated corpus plus its ground-truth oracle artifacts.

    ``plants`` (doc_id -> per-sentence template metadata) powers the
    template-entailment oracle and is not serialized.
    """

    config: GeneratorConfig | None
    patients: list[Patient]
    label_spaces: dict[str, LabelSpace]
    lexicon: dict[str, dict[str, list[str]]]
    evidence: list[EvidenceSpan]
    pretrain_pool: list[str]
    plants: dict = field(default_factory=dict, repr=False)
    doc_sentence_counts: dict = field(default_factory=dict, repr=False)

    @property
    def cancer_patients(self) -> list[Patient]:
        return [p for p in self.patients if p.is_cancer]

    @property
    def control_patients(self) -> list[Patient]:
        return [p for p in self.patients if not p.is_cancer]

    def patient(self, patient_id: str) -> Patient:
        for p in self.patients:
            if p.patient_id == patient_id:
                return p
        raise KeyError(patient_id)

    def evidence_for(self, patient_id: str, attribute: AttributeKind) -> list[EvidenceSpan]:
        doc_ids = {d.doc_id for p in self.patients if p.patient_id == patient_id
                   for d in p.documents}
        return [e for e in self.evidence if e.doc_id in doc_ids and e.attribute is attribute]
