"""Site and histology catalogs backing the synthetic corpus.

Each site class carries canonical surface forms (these become the alias
lexicon handed to the rule-based baseline) and paraphrase variants that are
deliberately left out of the lexicon.  Breast subsites additionally render
as laterality + clock positions, whose meaning depends on the combination
of words rather than any single one.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SiteEntry:
    code: str
    organ: str
    aliases: tuple[str, ...]   # in the lexicon
    variants: tuple[str, ...]  # not in the lexicon


# Order matters: a config with n_site_classes=k uses the first k entries.
# Breast variants are rendered as clock positions in code, so their variant
# tuples stay empty here.
SITE_CATALOG: tuple[SiteEntry, ...] = (
    SiteEntry("C50.4", "breast", ("upper outer quadrant",), ()),
    SiteEntry("C50.2", "breast", ("upper inner quadrant",), ()),
    SiteEntry("C50.5", "breast", ("lower outer quadrant",), ()),
    SiteEntry("C50.3", "breast", ("lower inner quadrant",), ()),
    SiteEntry("C34.1", "lung", ("upper lobe",),
              ("apical lung segment", "upper lung zone")),
    SiteEntry("C34.3", "lung", ("lower lobe",),
              ("basal lung segment", "lower lung zone")),
    SiteEntry("C18.2", "colon", ("ascending colon",),
              ("right colon", "proximal colon")),
    SiteEntry("C18.7", "colon", ("sigmoid colon",),
              ("distal colon", "sigmoid segment of the colon")),
    SiteEntry("C16.0", "stomach", ("gastric cardia",),
              ("cardia of the stomach", "gastroesophageal junction")),
    SiteEntry("C22.0", "liver", ("liver",),
              ("hepatic parenchyma", "right hepatic lobe")),
    SiteEntry("C22.1", "liver", ("intrahepatic bile duct",),
              ("intrahepatic biliary tree", "intrahepatic duct")),
    SiteEntry("C23.9", "liver", ("gallbladder",),
              ("gallbladder fundus", "gall bladder")),
    SiteEntry("C25.0", "pancreas", ("head of the pancreas",),
              ("pancreatic head",)),
    SiteEntry("C61.9", "prostate", ("prostate",),
              ("prostate gland", "prostatic tissue")),
    SiteEntry("C73.9", "thyroid", ("thyroid",),
              ("thyroid gland", "thyroid lobe")),
    SiteEntry("C64.9", "kidney", ("kidney",),
              ("renal parenchyma", "renal cortex")),
    SiteEntry("C67.9", "bladder", ("urinary bladder",),
              ("bladder wall", "bladder dome")),
    SiteEntry("C15.4", "esophagus", ("middle third of the esophagus",),
              ("mid esophagus", "midesophageal segment")),
    SiteEntry("C20.9", "rectum", ("rectum",),
              ("rectal ampulla", "rectal wall")),
    SiteEntry("C56.9", "ovary", ("ovary",),
              ("adnexal mass region", "ovarian parenchyma")),
    SiteEntry("C54.1", "uterus", ("endometrium",),
              ("endometrial cavity", "uterine lining")),
    SiteEntry("C62.9", "testis", ("testis",),
              ("testicle", "testicular parenchyma")),
    SiteEntry("C71.1", "brain", ("frontal lobe of the brain",),
              ("frontal lobe", "frontal region of the brain")),
    SiteEntry("C44.5", "skin", ("skin of the trunk",),
              ("truncal skin", "skin of the back")),
)

MAX_SITE_CLASSES = len(SITE_CATALOG)  # documented ceiling is 310; catalog is the evidenced subset

BREAST_QUADRANT_BY_CLOCK = {
    # (laterality, clock hour) -> quadrant code; hours 3/6/9/12 are skipped
    # as ambiguous.  The mapping mirrors between sides, so the quadrant is
    # a joint function of both words.
    "left": {1: "C50.2", 2: "C50.2", 4: "C50.3", 5: "C50.3",
             7: "C50.5", 8: "C50.5", 10: "C50.4", 11: "C50.4"},
    "right": {1: "C50.4", 2: "C50.4", 4: "C50.5", 5: "C50.5",
              7: "C50.3", 8: "C50.3", 10: "C50.2", 11: "C50.2"},
}

CLOCK_HOURS_BY_SITE: dict[str, dict[str, list[int]]] = {}
for _lat, _table in BREAST_QUADRANT_BY_CLOCK.items():
    for _hour, _code in _table.items():
        CLOCK_HOURS_BY_SITE.setdefault(_code, {}).setdefault(_lat, []).append(_hour)

LATERAL_ORGANS = {"breast", "lung", "kidney", "ovary", "testis"}


@dataclass(frozen=True)
class HistologyEntry:
    code: str
    name: str
    organs: tuple[str, ...]
    extra_names: tuple[str, ...] = ()


# Order matters for the same reason as SITE_CATALOG.  Generic entries come
# first so small label spaces still cover every organ.
HISTOLOGY_CATALOG: tuple[HistologyEntry, ...] = (
    HistologyEntry("8140", "adenocarcinoma",
                   ("lung", "colon", "stomach", "pancreas", "prostate", "esophagus",
                    "rectum", "uterus", "liver")),
    HistologyEntry("8070", "squamous cell carcinoma",
                   ("lung", "esophagus", "skin", "bladder")),
    HistologyEntry("8500", "invasive ductal carcinoma", ("breast",),
                   ("infiltrating ductal carcinoma",)),
    HistologyEntry("8480", "mucinous adenocarcinoma",
                   ("breast", "colon", "stomach", "pancreas", "ovary", "rectum")),
    HistologyEntry("8170", "hepatocellular carcinoma", ("liver",)),
    HistologyEntry("8160", "cholangiocarcinoma", ("liver",)),
    HistologyEntry("8490", "signet ring cell carcinoma", ("stomach", "colon")),
    HistologyEntry("8041", "small cell carcinoma", ("lung",)),
    HistologyEntry("8520", "invasive lobular carcinoma", ("breast",),
                   ("infiltrating lobular carcinoma",)),
    HistologyEntry("8046", "non-small cell carcinoma", ("lung",)),
    HistologyEntry("8246", "neuroendocrine carcinoma", ("pancreas", "lung", "stomach")),
    HistologyEntry("8312", "renal cell carcinoma", ("kidney",)),
    HistologyEntry("8120", "urothelial carcinoma", ("bladder", "kidney")),
    HistologyEntry("8380", "endometrioid adenocarcinoma", ("uterus", "ovary")),
    HistologyEntry("8050", "papillary carcinoma", ("thyroid", "bladder")),
    HistologyEntry("9061", "seminoma", ("testis",)),
    HistologyEntry("8720", "malignant melanoma", ("skin",)),
    HistologyEntry("8010", "carcinoma nos",
                   ("breast", "lung", "colon", "stomach", "pancreas", "prostate",
                    "thyroid", "esophagus", "brain")),
    HistologyEntry("8260", "papillary adenocarcinoma", ("thyroid", "kidney", "lung")),
    HistologyEntry("8211", "tubular adenocarcinoma", ("colon", "stomach", "breast")),
    HistologyEntry("8255", "adenocarcinoma with mixed subtypes",
                   ("lung", "colon", "stomach", "uterus")),
    HistologyEntry("8012", "large cell carcinoma", ("lung",)),
    HistologyEntry("8090", "basal cell carcinoma", ("skin",)),
    HistologyEntry("8440", "cystadenocarcinoma", ("ovary", "pancreas")),
    HistologyEntry("8936", "gastrointestinal stromal tumor", ("stomach", "colon")),
    HistologyEntry("9440", "glioblastoma", ("brain",)),
    HistologyEntry("9382", "mixed glioma", ("brain",)),
    HistologyEntry("8575", "metaplastic carcinoma", ("breast",)),
    HistologyEntry("8244", "mixed adenoneuroendocrine carcinoma", ("colon", "stomach")),
    HistologyEntry("8051", "verrucous carcinoma", ("skin", "esophagus")),
)

MAX_HISTOLOGY_CLASSES = len(HISTOLOGY_CATALOG)  # documented ceiling is 556

BENIGN_FINDINGS = (
    "simple cyst", "calcification", "fibroadenoma", "hamartoma", "lipoma",
    "hyperplastic polyp", "scar tissue", "fibrotic change", "hemangioma",
    "adenomatous change",
)

def site_entries(n: int) -> list[SiteEntry]:
    return list(SITE_CATALOG[:n])


def histology_entries(n: int) -> list[HistologyEntry]:
    return list(HISTOLOGY_CATALOG[:n])


def compatible_histologies(organ: str, entries: list[HistologyEntry]) -> list[HistologyEntry]:
    found = [h for h in entries if organ in h.organs]
    return found or [h for h in entries if "carcinoma" in h.name][:1] or entries[:1]
