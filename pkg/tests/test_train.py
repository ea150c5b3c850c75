import numpy as np
import pytest

from oncoabstract import textproc as tp
from oncoabstract.corpus import (
    AttributeKind,
    ClinicalDocument,
    CorpusBundle,
    GeneratorConfig,
    NOT_DOCUMENTED,
    Patient,
    RegistryRecord,
    build_label_spaces,
    build_lexicon,
    generate_corpus,
)
from oncoabstract.model import ModelConfig, TINY_TRANSFORMER, save_checkpoint
from oncoabstract.train import (
    DatasetError,
    DefaultScheme,
    HardNegativeScheme,
    LeakageError,
    PretrainConfig,
    TrainConfig,
    build_abstraction_dataset,
    build_casefinding_dataset,
    dataset_cache_key,
    load_examples,
    pretrain_encoder,
    save_examples,
    train_model,
)


@pytest.fixture(scope="module")
def bundle():
    return generate_corpus(GeneratorConfig(n_cancer_patients=40, n_control_patients=15, seed=51))


@pytest.fixture(scope="module")
def vocab(bundle):
    texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
    return tp.learn_vocab(texts, target_size=400)


def tiny_model(vocab, n_classes, **kw):
    defaults = dict(vocab_size=len(vocab), n_classes=n_classes, embed_dim=16, gru_hidden=12,
                    word_attn_dim=10, sent_attn_dim=10, dropout_rate=0.1, seed=2)
    defaults.update(kw)
    return ModelConfig(**defaults)


# ---------------------------------------------------------------------------
# abstraction dataset
# ---------------------------------------------------------------------------

def test_one_example_per_cancer_patient(bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)
    assert len(examples) == 40  # controls excluded
    ids = {ex.patient_id for ex in examples}
    assert all(bundle.patient(pid).registry is not None for pid in ids)


def test_labels_match_registry_oracle(bundle, vocab):
    space = bundle.label_spaces["site"]
    for ex in build_abstraction_dataset(bundle, AttributeKind.SITE, vocab):
        truth = bundle.patient(ex.patient_id).registry.labels["site"]
        assert space.classes[ex.label_index] == truth


def test_wider_window_never_shrinks_inputs(bundle, vocab):
    narrow = build_abstraction_dataset(bundle, AttributeKind.PATH_T, vocab, window=(30, 30))
    wide = build_abstraction_dataset(bundle, AttributeKind.PATH_T, vocab, window=(30, 90))
    narrow_len = {ex.patient_id: len(ex.sequence.ids) for ex in narrow}
    for ex in wide:
        assert len(ex.sequence.ids) >= narrow_len[ex.patient_id]


def test_empty_dataset_errors(vocab):
    labels = {a.value: NOT_DOCUMENTED for a in AttributeKind}
    control = Patient("c", [ClinicalDocument("c-d0", "c", "Radiology", 3, "Normal study.")])
    empty = CorpusBundle(config=None, patients=[control],
                         label_spaces=build_label_spaces(12, 10),
                         lexicon=build_lexicon(12, 10), evidence=[], pretrain_pool=[])
    with pytest.raises(DatasetError):
        build_abstraction_dataset(empty, AttributeKind.SITE, vocab)


# ---------------------------------------------------------------------------
# case-finding dataset
# ---------------------------------------------------------------------------

def test_positives_are_diagnosis_days(bundle, vocab):
    examples = build_casefinding_dataset(bundle, DefaultScheme(), vocab, seed=1)
    for ex in examples:
        if ex.label_index == 1:
            assert ex.day == bundle.patient(ex.patient_id).registry.diagnosis_date
            assert ex.negative_kind == "none"


def test_hard_negatives_strictly_before_cutoff(bundle, vocab):
    scheme = HardNegativeScheme(hard_cutoff_days=30, per_patient_max=2)
    examples = build_casefinding_dataset(bundle, scheme, vocab, seed=1)
    for ex in examples:
        if ex.negative_kind == "hard":
            diagnosis = bundle.patient(ex.patient_id).registry.diagnosis_date
            assert ex.day < diagnosis - 30


def test_hard_negative_count_on_handmade_corpus(vocab):
    # 50 registry patients, each with exactly two eligible pre-diagnosis
    # pathology days beyond the cutoff; per_patient_max=1 -> 50 hard negatives
    spaces = build_label_spaces(12, 10)
    labels = {a.value: NOT_DOCUMENTED for a in AttributeKind}
    labels["site"] = "C50.4"
    patients = []
    for i in range(50):
        pid = f"H{i:03d}"
        docs = [
            ClinicalDocument(f"{pid}-d0", pid, "Pathology", 10, "Early benign biopsy."),
            ClinicalDocument(f"{pid}-d1", pid, "Pathology", 30, "Another benign biopsy."),
            ClinicalDocument(f"{pid}-d2", pid, "Pathology", 100, "Carcinoma found."),
        ]
        patients.append(Patient(pid, docs, RegistryRecord(pid, 100, dict(labels))))
    patients.append(Patient("CTRL", [
        ClinicalDocument("CTRL-d0", "CTRL", "Pathology", 5, "Benign tissue.")]))
    handmade = CorpusBundle(config=None, patients=patients, label_spaces=spaces,
                            lexicon=build_lexicon(12, 10), evidence=[], pretrain_pool=[])
    scheme = HardNegativeScheme(hard_cutoff_days=30, per_patient_max=1)
    examples = build_casefinding_dataset(handmade, scheme, vocab, seed=9)
    hard = [ex for ex in examples if ex.negative_kind == "hard"]
    assert len(hard) == 50
    assert all(ex.day in (10, 30) for ex in hard)


def test_default_scheme_without_controls_errors(bundle, vocab):
    cancer_only = CorpusBundle(config=None, patients=bundle.cancer_patients,
                               label_spaces=bundle.label_spaces, lexicon=bundle.lexicon,
                               evidence=[], pretrain_pool=[])
    with pytest.raises(DatasetError):
        build_casefinding_dataset(cancer_only, DefaultScheme(), vocab, seed=1)


def test_casefinding_dataset_deterministic(bundle, vocab):
    a = build_casefinding_dataset(bundle, HardNegativeScheme(), vocab, seed=5)
    b = build_casefinding_dataset(bundle, HardNegativeScheme(), vocab, seed=5)
    assert [(e.patient_id, e.day, e.label_index) for e in a] == \
           [(e.patient_id, e.day, e.label_index) for e in b]


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def split(examples, n_dev):
    return examples[n_dev:], examples[:n_dev]


def test_leakage_guard(bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)
    config = TrainConfig(epochs=1, seed=0)
    with pytest.raises(LeakageError):
        train_model(config, tiny_model(vocab, 13), examples, examples[:3], vocab.content_hash())


def test_patience_zero_stops_on_first_non_improvement(bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)
    train_set, dev_set = split(examples, 8)
    config = TrainConfig(epochs=30, batch_size=8, patience=0, seed=1)
    result = train_model(config, tiny_model(vocab, 13), train_set, dev_set, vocab.content_hash())
    metrics = [h["dev_metric"] for h in result.history]
    # ran until the first epoch that failed to improve, then stopped
    assert len(metrics) <= 30
    if len(metrics) < 30:
        assert metrics[-1] <= max(metrics[:-1])
        for i in range(1, len(metrics) - 1):
            assert metrics[i] > max(metrics[:i])


def test_same_seed_identical_checkpoint_bytes(tmp_path, bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)
    train_set, dev_set = split(examples, 8)
    config = TrainConfig(epochs=2, batch_size=8, patience=3, seed=7)
    paths = []
    for run in range(2):
        result = train_model(config, tiny_model(vocab, 13), train_set, dev_set,
                             vocab.content_hash())
        path = tmp_path / f"run{run}.ckpt"
        save_checkpoint(result.model, str(path))
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_history_records_every_epoch(bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)
    train_set, dev_set = split(examples, 8)
    config = TrainConfig(epochs=3, batch_size=8, patience=10, seed=2)
    result = train_model(config, tiny_model(vocab, 13), train_set, dev_set, vocab.content_hash())
    assert [h["epoch"] for h in result.history] == [1, 2, 3]
    assert all("train_loss" in h and "dev_metric" in h for h in result.history)


# ---------------------------------------------------------------------------
# pretraining
# ---------------------------------------------------------------------------

def test_pretrain_initial_loss_near_log_vocab_and_decreases(bundle, vocab):
    config = PretrainConfig(steps=200, batch_size=16, seed=3, log_every=40)
    model_config = tiny_model(vocab, 2, encoder=TINY_TRANSFORMER, heads=2, ff_dim=24,
                              embed_dim=16)
    model, history = pretrain_encoder(config, model_config, bundle.pretrain_pool[:200], vocab)
    first, last = history[0]["mlm_loss"], history[-1]["mlm_loss"]
    assert abs(first - np.log(len(vocab))) / np.log(len(vocab)) < 0.10
    assert last < first


def test_pretrain_requires_transformer(bundle, vocab):
    with pytest.raises(ValueError):
        pretrain_encoder(PretrainConfig(steps=1), tiny_model(vocab, 2), ["text."], vocab)


def test_pretrain_empty_pool_errors(vocab):
    config = PretrainConfig(steps=1)
    model_config = tiny_model(vocab, 2, encoder=TINY_TRANSFORMER, heads=2, ff_dim=24,
                              embed_dim=16)
    with pytest.raises(ValueError):
        pretrain_encoder(config, model_config, [], vocab)


# ---------------------------------------------------------------------------
# example cache
# ---------------------------------------------------------------------------

def test_example_cache_round_trip(tmp_path, bundle, vocab):
    examples = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab)[:5]
    path = tmp_path / "cache.jsonl"
    save_examples(str(path), examples)
    loaded = load_examples(str(path))
    assert len(loaded) == 5
    for a, b in zip(examples, loaded):
        assert a.patient_id == b.patient_id
        assert a.label_index == b.label_index
        assert np.array_equal(a.sequence.ids, b.sequence.ids)
        assert [s.token_start for s in a.sequence.sentences] == \
               [s.token_start for s in b.sequence.sentences]


def test_cache_key_sensitive_to_inputs():
    base = dataset_cache_key("c1", "site", (30, 30), ("Pathology",), "v1", 256)
    assert base != dataset_cache_key("c2", "site", (30, 30), ("Pathology",), "v1", 256)
    assert base != dataset_cache_key("c1", "site", (30, 90), ("Pathology",), "v1", 256)
    assert base != dataset_cache_key("c1", "site", (30, 30), ("Pathology",), "v2", 256)
    assert base == dataset_cache_key("c1", "site", (30, 30), ("Pathology",), "v1", 256)


@pytest.mark.slow
def test_pretrained_init_no_worse_than_random_on_site_dev():
    from oncoabstract.corpus import fold_subset, generate_corpus, split_folds
    from oncoabstract.train import pretrain_encoder as pe

    bundle = generate_corpus(GeneratorConfig(n_cancer_patients=400, n_control_patients=60,
                                             cross_doc_fraction=0.5, seed=61))
    texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
    vocab = tp.learn_vocab(texts, target_size=500)
    assignment = split_folds(bundle, 5, seed=1)
    cancer = bundle.cancer_patients
    sets = {}
    for part, folds in (("train", (1, 2, 3)), ("dev", (4,))):
        sets[part] = build_abstraction_dataset(bundle, AttributeKind.SITE, vocab,
                                               patients=fold_subset(cancer, assignment, folds))
    config = ModelConfig(vocab_size=len(vocab), n_classes=13, embed_dim=48, heads=4,
                         layers=2, ff_dim=96, gru_hidden=48, word_attn_dim=48,
                         sent_attn_dim=48, encoder=TINY_TRANSFORMER, seed=3)
    encoder, _ = pe(PretrainConfig(steps=600, batch_size=48, seed=9), config,
                    bundle.pretrain_pool, vocab)
    tc = TrainConfig(epochs=8, batch_size=16, patience=8, seed=3)
    pretrained = train_model(tc, config, sets["train"], sets["dev"], vocab.content_hash(),
                             init_encoder=encoder)
    random_init = train_model(tc, config, sets["train"], sets["dev"], vocab.content_hash())
    assert pretrained.best_metric >= random_init.best_metric
