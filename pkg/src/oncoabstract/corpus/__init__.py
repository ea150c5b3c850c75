"""Synthetic EMR + cancer-registry corpus: generator, oracle, folds, stats."""

from .types import (
    NOT_DOCUMENTED,
    AttributeKind,
    ClinicalDocument,
    ConfigError,
    CorpusBundle,
    EvidenceSpan,
    GeneratorConfig,
    LabelSpace,
    Patient,
    RegistryRecord,
)
from .generate import (
    attribute_entailed,
    build_label_spaces,
    build_lexicon,
    corpus_stats,
    fold_subset,
    generate_corpus,
    split_folds,
)
from .io import corpus_hash, read_corpus, write_corpus

__all__ = [
    "NOT_DOCUMENTED", "AttributeKind", "ClinicalDocument", "ConfigError",
    "CorpusBundle", "EvidenceSpan", "GeneratorConfig", "LabelSpace", "Patient",
    "RegistryRecord", "attribute_entailed", "build_label_spaces", "build_lexicon",
    "corpus_stats", "fold_subset", "generate_corpus", "split_folds",
    "corpus_hash", "read_corpus", "write_corpus",
]
