"""Deterministic synthetic EMR + registry generator.

Every planted sentence carries template metadata (attribute + role), so the
generator doubles as the ground-truth oracle: evidence spans, a template
entailment check, and per-document sentence counts all come from the same
plan that produced the text.

Linguistic phenomena planted on purpose:

* cross-document site evidence: the malignancy confirmation sits in a
  pathology report while the location only appears in an imaging report;
* order-sensitive site sentences naming a true site and a same-organ
  distractor whose meaning flips with word order;
* clock-position breast phrasing where laterality and hour jointly select
  the quadrant;
* negated / benign distractor mentions reusing the same site vocabulary,
  in cancer patients and controls alike;
* hedged pre-diagnosis findings that resemble diagnosis-day language.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import lexicon as lx
from .types import (
    NOT_DOCUMENTED,
    AttributeKind,
    ClinicalDocument,
    ConfigError,
    CorpusBundle,
    EvidenceSpan,
    GeneratorConfig,
    LabelSpace,
    M_CLASSES,
    N_CLASSES,
    Patient,
    RegistryRecord,
    T_CLASSES,
)

# evidence roles: which sentences count as entailing which attribute
ROLE_FULL = "full"            # site (or site+histology) stated with malignancy
ROLE_LOCATION = "location"    # site named, malignancy not confirmed (imaging)
ROLE_CONFIRM = "confirm"      # malignancy confirmed, site deferred to imaging
ROLE_STAGING = "staging"      # a TNM statement
ROLE_HEDGE = "hedge"
ROLE_DISTRACTOR = "distractor"
ROLE_BENIGN = "benign"
ROLE_BOILERPLATE = "boilerplate"
ROLE_MET = "met"

EVIDENCE_ROLES = {ROLE_FULL, ROLE_LOCATION, ROLE_CONFIRM, ROLE_STAGING}

# plant-mix constants (probabilities per patient unless noted)
ORDER_SENSITIVE_RATE = 0.30   # site sentence uses the order-critical template
CLINICAL_UNDOCUMENTED_RATE = 0.15
RESECTION_RATE = 0.75
PATH_M_DOCUMENTED_RATE = 0.3  # of resected patients
INCONCLUSIVE_BIOPSY_RATE = 0.12   # history-doc roll below this: non-diagnostic biopsy
HEDGE_HISTORY_RATE = 0.65         # roll below this (and above the biopsy band): hedged imaging
STRONG_HEDGE_RATE = 0.3           # per hedged imaging document
CANONICAL_DISTRACTOR_RATE = 0.85
SIBLING_DISTRACTOR_RATE = 0.5
MET_RATE = 0.12
FOLLOWUP_REMENTION_RATE = 0.5
RESECTION_DELAY_RANGE = (10, 90)
WORKUP_OFFSET_RANGE = (0, 6)

_MASS_WORDS = ("mass", "lesion", "nodule")
_BENIGN_DENSITY = ("density", "opacity", "area of architectural distortion")
_MODALITIES = ("ct", "mri", "ultrasound", "pet-ct")

_RADIOLOGY_BOILERPLATE = (
    "clinical history was reviewed prior to interpretation",
    "comparison was made to available prior studies",
    "technical quality of the study is adequate",
    "correlation with clinical findings is recommended",
    "the report was reviewed and electronically signed",
    "no prior comparable examination is available",
    "remaining visualized structures are unremarkable",
)

_PATHOLOGY_BOILERPLATE = (
    "the specimen was received in formalin and serially sectioned",
    "relevant laboratory values were reviewed",
    "the case was discussed at the multidisciplinary conference",
    "gross description is included in the supplemental report",
    "the report was reviewed and electronically signed",
    "representative sections were submitted for examination",
    "clinical history was reviewed prior to interpretation",
)

_OPERATIVE_BOILERPLATE = (
    "the patient tolerated the procedure well",
    "estimated blood loss was minimal",
    "the operative field was irrigated and closed in layers",
    "instrument and sponge counts were correct",
    "anesthesia was general with no complications",
)


@dataclass(frozen=True)
class PlantedSentence:
    """One generated sentence plus its oracle metadata."""

    text: str
    tags: tuple  # tuple of (AttributeKind, role) pairs; empty for filler


@dataclass
class _DocPlan:
    kind: str
    date: int
    sentences: list[PlantedSentence]


def _maybe_capitalize(rng: random.Random, text: str) -> str:
    if rng.random() < 0.5:
        return text[0].upper() + text[1:]
    return text


def _cap_sentences(rng: random.Random, sentences: list[PlantedSentence]) -> list[PlantedSentence]:
    return [PlantedSentence(_maybe_capitalize(rng, s.text), s.tags) for s in sentences]


class _SitePhrases:
    """Renders surface forms for a site, canonical or variant."""

    def __init__(self, entry: lx.SiteEntry, laterality: str | None):
        self.entry = entry
        self.laterality = laterality

    def canonical(self, rng: random.Random) -> str:
        alias = rng.choice(self.entry.aliases)
        if self.entry.organ == "breast":
            return f"the {alias} of the {self.laterality} breast"
        if self.entry.organ == "lung":
            return f"the {alias} of the {self.laterality} lung"
        if self.entry.organ in lx.LATERAL_ORGANS and self.laterality:
            return f"the {self.laterality} {alias}"
        return f"the {alias}"

    def variant(self, rng: random.Random) -> str:
        if self.entry.organ == "breast":
            hours = lx.CLOCK_HOURS_BY_SITE[self.entry.code][self.laterality]
            hour = rng.choice(hours)
            return f"the {self.laterality} breast at the {hour} o'clock position"
        phrase = rng.choice(self.entry.variants)
        if self.entry.organ in lx.LATERAL_ORGANS and self.laterality and rng.random() < 0.5:
            return f"the {self.laterality} {phrase}"
        return f"the {phrase}"

    def render(self, rng: random.Random, variation_rate: float) -> str:
        if rng.random() < variation_rate:
            return self.variant(rng)
        return self.canonical(rng)

    def organ_level(self) -> str:
        organ = self.entry.organ
        if organ in lx.LATERAL_ORGANS and self.laterality:
            return f"the {self.laterality} {organ}"
        return f"the {organ}"


@dataclass
class _PatientPlan:
    site: lx.SiteEntry
    histology: lx.HistologyEntry
    laterality: str | None
    labels: dict
    diagnosis_day: int
    cross_doc: bool
    order_sensitive: bool
    resection_day: int | None


def _pick_laterality(rng: random.Random, organ: str) -> str | None:
    if organ in lx.LATERAL_ORGANS:
        return rng.choice(("left", "right"))
    return None


def _pick_distractor(rng: random.Random, sites: list[lx.SiteEntry],
                     true: lx.SiteEntry, sibling_only=False) -> lx.SiteEntry:
    siblings = [s for s in sites if s.organ == true.organ and s.code != true.code]
    if siblings and (sibling_only or rng.random() < SIBLING_DISTRACTOR_RATE):
        return rng.choice(siblings)
    others = [s for s in sites if s.code != true.code]
    return rng.choice(others)


def _distractor_phrase(rng: random.Random, sites, true: lx.SiteEntry,
                       laterality_pool: random.Random | None = None) -> str:
    entry = _pick_distractor(rng, sites, true)
    phr = _SitePhrases(entry, _pick_laterality(rng, entry.organ))
    if rng.random() < CANONICAL_DISTRACTOR_RATE:
        return phr.canonical(rng)
    return phr.variant(rng)


def _staging_sentences(rng: random.Random, labels: dict, clinical: bool,
                       documented_m: bool = True) -> list[PlantedSentence]:
    prefix = "c" if clinical else "p"
    t_key = AttributeKind.CLINICAL_T if clinical else AttributeKind.PATH_T
    n_key = AttributeKind.CLINICAL_N if clinical else AttributeKind.PATH_N
    m_key = AttributeKind.CLINICAL_M if clinical else AttributeKind.PATH_M
    out = []
    t = labels[t_key.value]
    if t != NOT_DOCUMENTED:
        code = f"{prefix}{t.lower()}"
        size = {"Tis": 0.4, "T0": 0.0, "T1": rng.uniform(0.5, 1.9), "T2": rng.uniform(2.0, 4.9),
                "T3": rng.uniform(5.0, 9.5), "T4": rng.uniform(6.0, 14.0)}[t]
        if clinical:
            tmpl = rng.choice((
                f"the dominant lesion measures {size:.1f} cm, consistent with clinical stage {code} disease",
                f"clinical tumor category is assessed as {code}",
                f"imaging findings support a {code} designation",
            ))
        else:
            tmpl = rng.choice((
                f"gross examination reveals a {size:.1f} cm tumor, pathologic stage {code}",
                f"the resected tumor measures {size:.1f} cm, {code}",
                f"pathologic tumor category: {code}",
            ))
        out.append(PlantedSentence(tmpl, ((t_key, ROLE_STAGING),)))
    n = labels[n_key.value]
    if n != NOT_DOCUMENTED:
        code = f"{prefix}n0" if n == "N0" else f"{prefix}n1"
        if n == "N0":
            tmpl = rng.choice((
                f"no pathologically enlarged regional lymph nodes are identified, {code}",
                f"regional nodes are negative, {code}",
                f"all sampled lymph nodes are free of tumor, {code}",
            )) if not clinical else rng.choice((
                f"no pathologically enlarged regional lymph nodes are identified, {code}",
                f"regional nodal stations are within normal limits, {code}",
            ))
        else:
            tmpl = rng.choice((
                f"enlarged regional lymph nodes are concerning for nodal involvement, {code}",
                f"regional lymph node involvement is present, {code}",
            )) if clinical else rng.choice((
                f"{rng.randint(1, 4)} of {rng.randint(5, 18)} lymph nodes contain metastatic carcinoma, {code}",
                f"nodal metastasis is identified in the resection specimen, {code}",
            ))
        out.append(PlantedSentence(tmpl, ((n_key, ROLE_STAGING),)))
    m = labels[m_key.value]
    if m != NOT_DOCUMENTED and documented_m:
        code = f"{prefix}m0" if m == "M0" else f"{prefix}m1"
        if m == "M0":
            tmpl = rng.choice((
                f"there is no evidence of distant metastatic disease, {code}",
                f"staging workup shows no distant spread, {code}",
            ))
            out.append(PlantedSentence(tmpl, ((m_key, ROLE_STAGING),)))
        else:
            met_organ = rng.choice(("liver", "lung", "bone", "adrenal gland"))
            tmpl = rng.choice((
                f"there are lesions in the {met_organ} compatible with metastatic disease, {code}",
                f"distant metastatic deposits are present in the {met_organ}, {code}",
            ))
            out.append(PlantedSentence(tmpl, ((m_key, ROLE_STAGING), (m_key, ROLE_MET))))
    return out


def _pad_boilerplate(rng: random.Random, sentences: list[PlantedSentence],
                     bank=_RADIOLOGY_BOILERPLATE, minimum: int = 5) -> list[PlantedSentence]:
    fill = list(bank)
    rng.shuffle(fill)
    i = 0
    while len(sentences) < minimum and i < len(fill):
        sentences.append(PlantedSentence(fill[i], ()))
        i += 1
    return sentences


class _Generator:
    def __init__(self, config: GeneratorConfig):
        config.validate(lx.MAX_SITE_CLASSES, lx.MAX_HISTOLOGY_CLASSES)
        self.config = config
        self.rng = random.Random(config.seed)
        self.sites = lx.site_entries(config.n_site_classes)
        self.histologies = lx.histology_entries(config.n_histology_classes)
        self.site_by_code = {s.code: s for s in self.sites}

    # ------------------------------------------------------------------
    # labels
    # ------------------------------------------------------------------

    def _draw_labels(self, rng: random.Random, site: lx.SiteEntry,
                     histology: lx.HistologyEntry, resected: bool, path_m_doc: bool) -> dict:
        labels = {}
        labels[AttributeKind.SITE.value] = site.code
        labels[AttributeKind.HISTOLOGY.value] = histology.code
        if rng.random() < CLINICAL_UNDOCUMENTED_RATE:
            ct = cn = cm = NOT_DOCUMENTED
        else:
            ct = rng.choices(("Tis", "T1", "T2", "T3", "T4"), weights=(5, 30, 35, 20, 10))[0]
            cn = rng.choices(("N0", "N1+"), weights=(60, 40))[0]
            cm = rng.choices(("M0", "M1"), weights=(100 - int(MET_RATE * 100), int(MET_RATE * 100)))[0]
        labels[AttributeKind.CLINICAL_T.value] = ct
        labels[AttributeKind.CLINICAL_N.value] = cn
        labels[AttributeKind.CLINICAL_M.value] = cm
        if resected:
            base = ct if ct not in (NOT_DOCUMENTED, "Tis") else "T2"
            shift = rng.choices((-1, 0, 1), weights=(15, 60, 25))[0]
            order = ["T1", "T2", "T3", "T4"]
            idx = min(max(order.index(base) + shift, 0), 3) if base in order else 1
            labels[AttributeKind.PATH_T.value] = order[idx]
            labels[AttributeKind.PATH_N.value] = rng.choices(("N0", "N1+"), weights=(55, 45))[0]
            labels[AttributeKind.PATH_M.value] = (
                rng.choices(("M0", "M1"), weights=(92, 8))[0] if path_m_doc else NOT_DOCUMENTED)
        else:
            labels[AttributeKind.PATH_T.value] = NOT_DOCUMENTED
            labels[AttributeKind.PATH_N.value] = NOT_DOCUMENTED
            labels[AttributeKind.PATH_M.value] = NOT_DOCUMENTED
        return labels

    # ------------------------------------------------------------------
    # document builders (cancer)
    # ------------------------------------------------------------------

    def _site_full_sentence(self, rng, plan: _PatientPlan, phrases: _SitePhrases,
                            resection=False) -> PlantedSentence:
        h = plan.histology.name
        sp = phrases.render(rng, self.config.variation_rate)
        if plan.order_sensitive:
            sibling = _pick_distractor(rng, self.sites, plan.site, sibling_only=True)
            dp = _SitePhrases(sibling, phrases.laterality if sibling.organ == plan.site.organ
                              else _pick_laterality(rng, sibling.organ)).render(rng, self.config.variation_rate)
            text = rng.choice((
                f"there is {h} centered in {sp}, extending toward but not involving {dp}",
                f"{h} involves {sp} with changes abutting but sparing {dp}",
            ))
        elif resection:
            text = rng.choice((
                f"residual {h} involving {sp} is present",
                f"the resection specimen shows {h} of {sp}",
            ))
        else:
            text = rng.choice((
                f"there is {h} involving {sp}",
                f"{h} arising in {sp} is identified",
                f"biopsy confirms {h} of {sp}",
            ))
        return PlantedSentence(text, ((AttributeKind.SITE, ROLE_FULL),
                                      (AttributeKind.HISTOLOGY, ROLE_FULL)))

    def _diagnosis_pathology(self, rng, plan: _PatientPlan, phrases: _SitePhrases) -> _DocPlan:
        h = plan.histology.name
        sentences = [PlantedSentence(
            rng.choice(("specimen: needle core biopsy", "specimen: excisional biopsy",
                        "specimen: image guided core biopsy")), ())]
        hist_text = rng.choice((
            f"microscopic examination reveals {h}",
            f"final diagnosis: {h}",
            f"histologic sections demonstrate {h}",
        ))
        sentences.append(PlantedSentence(hist_text, ((AttributeKind.HISTOLOGY, ROLE_FULL),)))
        if plan.cross_doc:
            text = rng.choice((
                f"needle core biopsy, site as designated by imaging: {h}, consistent with malignancy",
                f"targeted biopsy of the imaging abnormality reveals {h}",
                f"the sampled lesion localized on imaging shows {h}",
            ))
            sentences.append(PlantedSentence(text, ((AttributeKind.SITE, ROLE_CONFIRM),)))
        else:
            sentences.append(self._site_full_sentence(rng, plan, phrases))
        if rng.random() < 0.6:
            sentences.append(PlantedSentence(
                rng.choice(("immunohistochemical stains support the diagnosis",
                            "the findings are reviewed with the attending pathologist")), ()))
        _pad_boilerplate(rng, sentences, bank=_PATHOLOGY_BOILERPLATE, minimum=5)
        return _DocPlan("Pathology", plan.diagnosis_day, _cap_sentences(rng, sentences))

    def _workup_radiology(self, rng, plan: _PatientPlan, phrases: _SitePhrases) -> _DocPlan:
        modality = rng.choice(_MODALITIES)
        sentences = [PlantedSentence(
            f"{modality} examination of the {rng.choice(('chest', 'abdomen and pelvis', 'chest abdomen and pelvis'))} was performed", ())]
        if plan.cross_doc:
            sp = phrases.render(rng, self.config.variation_rate)
            mass = rng.choice(_MASS_WORDS)
            text = rng.choice((
                f"there is a suspicious {mass} in {sp}",
                f"imaging demonstrates a {mass} within {sp}, tissue sampling is recommended",
            ))
            sentences.append(PlantedSentence(text, ((AttributeKind.SITE, ROLE_LOCATION),)))
        elif not plan.order_sensitive and rng.random() < 0.5:
            sp = phrases.render(rng, self.config.variation_rate)
            sentences.append(PlantedSentence(
                f"a {rng.choice(_MASS_WORDS)} is again demonstrated in {sp}",
                ((AttributeKind.SITE, ROLE_LOCATION),)))
        elif plan.order_sensitive:
            sentences.append(PlantedSentence(
                f"a dominant {rng.choice(_MASS_WORDS)} is identified, "
                f"see pathology for site designation", ()))
        sentences.extend(_staging_sentences(rng, plan.labels, clinical=True))
        n_distract = 0
        if rng.random() < self.config.negation_rate:
            n_distract = rng.randint(1, 3)
        for _ in range(n_distract):
            dp = _distractor_phrase(rng, self.sites, plan.site)
            text = rng.choice((
                f"{dp} is unremarkable",
                f"no suspicious abnormality is identified in {dp}",
                f"there is no evidence of malignancy involving {dp}",
                f"a benign appearing {rng.choice(lx.BENIGN_FINDINGS)} is noted in {dp}",
            ))
            sentences.append(PlantedSentence(text, ((AttributeKind.SITE, ROLE_DISTRACTOR),)))
        _pad_boilerplate(rng, sentences, minimum=5)
        return _DocPlan("Radiology", plan.diagnosis_day - rng.randint(*WORKUP_OFFSET_RANGE),
                        _cap_sentences(rng, sentences))

    def _resection_pathology(self, rng, plan: _PatientPlan, phrases: _SitePhrases) -> _DocPlan:
        sentences = [PlantedSentence(
            rng.choice(("specimen: surgical resection, oriented and inked",
                        "specimen: resection specimen received fresh")), ())]
        path_m_doc = plan.labels[AttributeKind.PATH_M.value] != NOT_DOCUMENTED
        sentences.extend(_staging_sentences(rng, plan.labels, clinical=False,
                                            documented_m=path_m_doc))
        if (not plan.cross_doc and not plan.order_sensitive
                and rng.random() < FOLLOWUP_REMENTION_RATE):
            sentences.append(self._site_full_sentence(rng, plan, phrases, resection=True))
        else:
            sentences.append(PlantedSentence(
                "the specimen includes tumor consistent with the known primary malignancy", ()))
        sentences.append(PlantedSentence(
            rng.choice(("surgical margins are free of tumor",
                        "the closest margin is uninvolved")), ()))
        _pad_boilerplate(rng, sentences, bank=_PATHOLOGY_BOILERPLATE, minimum=5)
        return _DocPlan("Pathology", plan.resection_day, _cap_sentences(rng, sentences))

    def _operative_note(self, rng, plan: _PatientPlan) -> _DocPlan:
        procedure = rng.choice(("open surgical resection", "minimally invasive resection",
                                "wide local excision", "segmental resection"))
        sentences = [PlantedSentence(f"procedure performed: {procedure}", ()),
                     PlantedSentence(
                         "the operative target was exposed and resected without complication", ())]
        _pad_boilerplate(rng, sentences, bank=_OPERATIVE_BOILERPLATE, minimum=5)
        return _DocPlan("Operative", plan.resection_day, _cap_sentences(rng, sentences))

    def _history_doc(self, rng, plan: _PatientPlan, phrases: _SitePhrases) -> _DocPlan:
        day = plan.diagnosis_day - rng.randint(*self.config.pre_diagnosis_history_days)
        roll = rng.random()
        if roll < INCONCLUSIVE_BIOPSY_RATE:
            # a non-diagnostic biopsy: structurally a pathology report with
            # malignancy-adjacent wording, but it precedes the diagnosis.
            # These days are what the hard-negative scheme exists for.
            word = rng.choice(("carcinoma", "adenocarcinoma", "malignancy"))
            sentences = [
                PlantedSentence(rng.choice(("specimen: needle core biopsy",
                                            "specimen: fine needle aspiration")), ()),
                PlantedSentence(
                    f"microscopic sections show atypical cells, suspicious for {word}",
                    ((AttributeKind.SITE, ROLE_HEDGE),)),
                PlantedSentence(
                    rng.choice(("findings are not definitive for malignancy, repeat sampling is recommended",
                                "a definitive diagnosis is deferred pending additional tissue")),
                    ((AttributeKind.SITE, ROLE_HEDGE),)),
            ]
            kind = "Pathology"
        elif roll < HEDGE_HISTORY_RATE:
            modality = rng.choice(("screening mammogram", "surveillance ct", "screening ultrasound"))
            where = (phrases.organ_level() if plan.order_sensitive or rng.random() < 0.5
                     else phrases.render(rng, self.config.variation_rate))
            sentences = [PlantedSentence(
                f"{modality} identifies an indeterminate {rng.choice(_BENIGN_DENSITY)} in {where}",
                ((AttributeKind.SITE, ROLE_HEDGE),))]
            if rng.random() < STRONG_HEDGE_RATE:
                word = rng.choice(("carcinoma", "adenocarcinoma", "malignancy"))
                sentences.append(PlantedSentence(
                    rng.choice((f"findings are suspicious for {word}, tissue sampling is recommended",
                                f"{word} cannot be excluded on the basis of imaging alone")),
                    ((AttributeKind.SITE, ROLE_HEDGE),)))
            else:
                sentences.append(PlantedSentence(
                    "short interval follow-up imaging is recommended", ()))
            kind = "Radiology"
        else:
            other = _pick_distractor(rng, self.sites, plan.site)
            op = _SitePhrases(other, _pick_laterality(rng, other.organ))
            sentences = [PlantedSentence(
                f"biopsy of {op.canonical(rng)}: benign {rng.choice(lx.BENIGN_FINDINGS)}",
                ((AttributeKind.SITE, ROLE_BENIGN),))]
            kind = "Pathology"
        bank = _PATHOLOGY_BOILERPLATE if kind == "Pathology" else _RADIOLOGY_BOILERPLATE
        _pad_boilerplate(rng, sentences, bank=bank, minimum=5)
        return _DocPlan(kind, max(day, 0), _cap_sentences(rng, sentences))

    def _followup_doc(self, rng, plan: _PatientPlan, phrases: _SitePhrases) -> _DocPlan:
        day = plan.diagnosis_day + rng.randint(5, 40)
        if not plan.cross_doc and not plan.order_sensitive and rng.random() < FOLLOWUP_REMENTION_RATE:
            sp = phrases.render(rng, self.config.variation_rate)
            sentences = [PlantedSentence(
                f"known {plan.histology.name} involving {sp}, interval decrease in size",
                ((AttributeKind.SITE, ROLE_FULL), (AttributeKind.HISTOLOGY, ROLE_FULL)))]
        else:
            sentences = [PlantedSentence(
                "known treated malignancy, stable post-treatment appearance", ())]
        _pad_boilerplate(rng, sentences, minimum=5)
        return _DocPlan("Radiology", day, _cap_sentences(rng, sentences))

    # ------------------------------------------------------------------
    # patients
    # ------------------------------------------------------------------

    def _cancer_patient(self, pid: str, rng: random.Random):
        cfg = self.config
        site = rng.choice(self.sites)
        histology = rng.choice(lx.compatible_histologies(site.organ, self.histologies))
        laterality = _pick_laterality(rng, site.organ)
        n_docs = rng.randint(*cfg.docs_per_patient)
        hist_min, _ = cfg.pre_diagnosis_history_days
        diagnosis_day = rng.randint(cfg.pre_diagnosis_history_days[1] + 10,
                                    cfg.pre_diagnosis_history_days[1] + 410)
        capacity = max(n_docs - 2, 0)
        resected = rng.random() < RESECTION_RATE and capacity >= 1
        with_op_note = resected and capacity >= 2 and rng.random() < 0.5
        path_m_doc = resected and rng.random() < PATH_M_DOCUMENTED_RATE
        labels = self._draw_labels(rng, site, histology, resected, path_m_doc)
        cross_doc = rng.random() < cfg.cross_doc_fraction
        order_sensitive = (not cross_doc) and rng.random() < ORDER_SENSITIVE_RATE
        plan = _PatientPlan(
            site=site, histology=histology, laterality=laterality, labels=labels,
            diagnosis_day=diagnosis_day, cross_doc=cross_doc,
            order_sensitive=order_sensitive,
            resection_day=diagnosis_day + rng.randint(*RESECTION_DELAY_RANGE) if resected else None)
        phrases = _SitePhrases(site, laterality)

        docs = [self._workup_radiology(rng, plan, phrases),
                self._diagnosis_pathology(rng, plan, phrases)]
        used = 2
        if resected:
            docs.append(self._resection_pathology(rng, plan, phrases))
            used += 1
            if with_op_note:
                docs.append(self._operative_note(rng, plan))
                used += 1
        while used < n_docs:
            if rng.random() < 0.6:
                docs.append(self._history_doc(rng, plan, phrases))
            else:
                docs.append(self._followup_doc(rng, plan, phrases))
            used += 1
        registry = RegistryRecord(patient_id=pid, diagnosis_date=diagnosis_day, labels=labels)
        return docs, registry

    def _control_patient(self, pid: str, rng: random.Random):
        cfg = self.config
        n_docs = rng.randint(*cfg.docs_per_patient)
        docs = []
        has_pathology = False
        for i in range(n_docs):
            day = rng.randint(0, 700)
            entry = rng.choice(self.sites)
            phr = _SitePhrases(entry, _pick_laterality(rng, entry.organ))
            sp = phr.canonical(rng) if rng.random() < 0.7 else phr.variant(rng)
            roll = rng.random()
            if roll < 0.45 and (has_pathology or i < n_docs - 1):
                kind = "Radiology"
                text = rng.choice((
                    f"{sp} is unremarkable",
                    f"no abnormality is identified in {sp}",
                    f"a benign {rng.choice(lx.BENIGN_FINDINGS)} is noted in {sp}, stable from prior",
                    "findings are within normal limits",
                ))
            elif roll < 0.9 or not has_pathology:
                kind = "Pathology"
                has_pathology = True
                text = rng.choice((
                    f"biopsy of {sp}: benign {rng.choice(lx.BENIGN_FINDINGS)}",
                    f"excision of {sp} shows benign {rng.choice(lx.BENIGN_FINDINGS)}",
                ))
            else:
                kind = "Operative"
                text = "elective excision of a benign skin lesion was performed"
            sentences = [PlantedSentence(text, ((AttributeKind.SITE, ROLE_BENIGN),))]
            bank = {"Operative": _OPERATIVE_BOILERPLATE, "Pathology": _PATHOLOGY_BOILERPLATE,
                    "Radiology": _RADIOLOGY_BOILERPLATE}[kind]
            _pad_boilerplate(rng, sentences, bank=bank, minimum=5)
            docs.append(_DocPlan(kind, day, _cap_sentences(rng, sentences)))
        return docs

    # ------------------------------------------------------------------
    # realization
    # ------------------------------------------------------------------

    def _realize(self, pid: str, plans: list[_DocPlan], bundle_rng: random.Random):
        plans.sort(key=lambda d: d.date)
        documents = []
        evidence = []
        plants = {}
        sentence_counts = {}
        for i, dp in enumerate(plans):
            doc_id = f"{pid}-d{i:02d}"
            parts = []
            offset = 0
            spans = []
            for j, sent in enumerate(dp.sentences):
                text = sent.text + "."
                spans.append((offset, offset + len(text)))
                parts.append(text)
                sep = bundle_rng.choices((" ", "  ", "\n"), weights=(75, 15, 10))[0]
                if j < len(dp.sentences) - 1:
                    parts.append(sep)
                    offset += len(text) + len(sep)
            full_text = "".join(parts)
            documents.append(ClinicalDocument(doc_id=doc_id, patient_id=pid,
                                              kind=dp.kind, date=dp.date, text=full_text))
            plants[doc_id] = [s.tags for s in dp.sentences]
            sentence_counts[doc_id] = len(dp.sentences)
            for j, (sent, (a, b)) in enumerate(zip(dp.sentences, spans)):
                for attr, role in sent.tags:
                    if role in EVIDENCE_ROLES:
                        evidence.append(EvidenceSpan(doc_id=doc_id, attribute=attr,
                                                     char_start=a, char_end=b, sentence_index=j))
        return documents, evidence, plants, sentence_counts

    def run(self) -> CorpusBundle:
        cfg = self.config
        width = max(6, len(str(cfg.n_cancer_patients + cfg.n_control_patients)))
        patients = []
        evidence = []
        plants = {}
        sentence_counts = {}
        pool = []
        for i in range(cfg.n_cancer_patients):
            pid = f"P{i:0{width}d}"
            rng = random.Random((cfg.seed * 2_654_435_761 + i * 2) & 0xFFFFFFFFFFFFFFFF)
            plans, registry = self._cancer_patient(pid, rng)
            docs, ev, pl, sc = self._realize(pid, plans, rng)
            patients.append(Patient(patient_id=pid, documents=docs, registry=registry))
            evidence.extend(ev)
            plants.update(pl)
            sentence_counts.update(sc)
            pool.extend(d.text for d in docs)
        for i in range(cfg.n_control_patients):
            pid = f"P{cfg.n_cancer_patients + i:0{width}d}"
            rng = random.Random((cfg.seed * 2_654_435_761 + i * 2 + 1) & 0xFFFFFFFFFFFFFFFF)
            plans = self._control_patient(pid, rng)
            docs, ev, pl, sc = self._realize(pid, plans, rng)
            patients.append(Patient(patient_id=pid, documents=docs, registry=None))
            plants.update(pl)
            sentence_counts.update(sc)
            pool.extend(d.text for d in docs)

        return CorpusBundle(
            config=cfg,
            patients=patients,
            label_spaces=build_label_spaces(cfg.n_site_classes, cfg.n_histology_classes),
            lexicon=build_lexicon(cfg.n_site_classes, cfg.n_histology_classes),
            evidence=evidence,
            pretrain_pool=pool,
            plants=plants,
            doc_sentence_counts=sentence_counts,
        )


def build_label_spaces(n_sites: int, n_histologies: int) -> dict[str, LabelSpace]:
    sites = tuple(s.code for s in lx.site_entries(n_sites)) + (NOT_DOCUMENTED,)
    hists = tuple(h.code for h in lx.histology_entries(n_histologies)) + (NOT_DOCUMENTED,)
    return {
        AttributeKind.SITE.value: LabelSpace(AttributeKind.SITE, sites),
        AttributeKind.HISTOLOGY.value: LabelSpace(AttributeKind.HISTOLOGY, hists),
        AttributeKind.CLINICAL_T.value: LabelSpace(AttributeKind.CLINICAL_T, T_CLASSES),
        AttributeKind.CLINICAL_N.value: LabelSpace(AttributeKind.CLINICAL_N, N_CLASSES),
        AttributeKind.CLINICAL_M.value: LabelSpace(AttributeKind.CLINICAL_M, M_CLASSES),
        AttributeKind.PATH_T.value: LabelSpace(AttributeKind.PATH_T, T_CLASSES),
        AttributeKind.PATH_N.value: LabelSpace(AttributeKind.PATH_N, N_CLASSES),
        AttributeKind.PATH_M.value: LabelSpace(AttributeKind.PATH_M, M_CLASSES),
    }


def build_lexicon(n_sites: int, n_histologies: int) -> dict[str, dict[str, list[str]]]:
    """Class code -> known surface aliases, per attribute (all lowercase)."""
    site_aliases = {s.code: [a.lower() for a in s.aliases] for s in lx.site_entries(n_sites)}
    hist_aliases = {h.code: [h.name.lower(), *[n.lower() for n in h.extra_names]]
                    for h in lx.histology_entries(n_histologies)}
    tnm = {}
    for prefix, attr in (("c", AttributeKind.CLINICAL_T), ("p", AttributeKind.PATH_T)):
        tnm[attr.value] = {t: [f"{prefix}{t.lower()}"] for t in T_CLASSES if t != NOT_DOCUMENTED}
    for prefix, attr in (("c", AttributeKind.CLINICAL_N), ("p", AttributeKind.PATH_N)):
        tnm[attr.value] = {"N0": [f"{prefix}n0"], "N1+": [f"{prefix}n1"]}
    for prefix, attr in (("c", AttributeKind.CLINICAL_M), ("p", AttributeKind.PATH_M)):
        tnm[attr.value] = {"M0": [f"{prefix}m0"], "M1": [f"{prefix}m1"]}
    return {
        AttributeKind.SITE.value: site_aliases,
        AttributeKind.HISTOLOGY.value: hist_aliases,
        **tnm,
    }


def generate_corpus(config: GeneratorConfig) -> CorpusBundle:
    """Generate the full corpus bundle; a pure function of the config."""
    return _Generator(config).run()


# ---------------------------------------------------------------------------
# oracle: template entailment replay
# ---------------------------------------------------------------------------

def attribute_entailed(bundle: CorpusBundle, patient_id: str, attribute: AttributeKind,
                       doc_ids=None) -> bool:
    """Replay template roles: do the given documents entail the label?

    Site is entailed by a full statement, or by a location plus a
    malignancy confirmation (possibly in different documents).  Other
    attributes are entailed by any planted evidence sentence.  For a
    sentinel label the check is vacuous (no evidence may exist).
    """
    patient = bundle.patient(patient_id)
    docs = patient.documents if doc_ids is None else [
        d for d in patient.documents if d.doc_id in set(doc_ids)]
    roles = set()
    for d in docs:
        for tags in bundle.plants.get(d.doc_id, ()):
            for attr, role in tags:
                if attr is attribute:
                    roles.add(role)
    if patient.registry is not None and patient.registry.labels[attribute.value] == NOT_DOCUMENTED:
        return not (roles & EVIDENCE_ROLES)
    if attribute is AttributeKind.SITE:
        return ROLE_FULL in roles or (ROLE_LOCATION in roles and ROLE_CONFIRM in roles)
    return bool(roles & EVIDENCE_ROLES)


# ---------------------------------------------------------------------------
# folds and stats
# ---------------------------------------------------------------------------

def split_folds(bundle_or_patients, n_folds: int, seed: int) -> dict[str, int]:
    """Patient-level fold assignment, folds numbered 1..n_folds."""
    patients = bundle_or_patients.patients if isinstance(bundle_or_patients, CorpusBundle) \
        else list(bundle_or_patients)
    if n_folds < 2:
        raise ConfigError("n_folds must be >= 2")
    ids = [p.patient_id for p in patients]
    if n_folds > len(ids):
        raise ConfigError(f"n_folds {n_folds} exceeds patient count {len(ids)}")
    rng = random.Random(seed)
    order = sorted(ids)
    rng.shuffle(order)
    return {pid: (i % n_folds) + 1 for i, pid in enumerate(order)}


def fold_subset(patients, assignment: dict[str, int], folds) -> list[Patient]:
    wanted = set(folds)
    return [p for p in patients if assignment[p.patient_id] in wanted]


def corpus_stats(bundle: CorpusBundle, window: tuple[int, int] = (30, 30)) -> dict:
    """Histograms, document-kind counts, and assembled-input length stats."""
    if not bundle.patients:
        raise ConfigError("corpus is empty")
    label_hist: dict[str, dict[str, int]] = {a.value: {} for a in AttributeKind}
    for p in bundle.cancer_patients:
        for attr, code in p.registry.labels.items():
            label_hist[attr][code] = label_hist[attr].get(code, 0) + 1
    kind_counts = {k: 0 for k in ("Pathology", "Radiology", "Operative")}
    for p in bundle.patients:
        for d in p.documents:
            kind_counts[d.kind] += 1
    lengths = []
    before, after = window
    for p in bundle.cancer_patients:
        anchor = p.registry.diagnosis_date
        text = " ".join(d.text for d in p.documents
                        if anchor - before <= d.date <= anchor + after)
        lengths.append(len(text.split()))
    lengths.sort()
    median = lengths[len(lengths) // 2] if lengths else 0
    return {
        "n_patients": len(bundle.patients),
        "n_registry": len(bundle.cancer_patients),
        "n_controls": len(bundle.control_patients),
        "label_histograms": label_hist,
        "document_kind_counts": kind_counts,
        "assembled_word_length_median": median,
        "assembled_word_length_min": lengths[0] if lengths else 0,
        "assembled_word_length_max": lengths[-1] if lengths else 0,
    }
