import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oncoabstract.evalx import (
    CaseFindingOutcome,
    UndefinedMetricError,
    auroc_binary,
    average_precision,
    casefinding_patient_eval,
    evaluate_multiclass,
    macro_ovr,
)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

def auroc_pairwise(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def ap_rank_by_rank(scores, labels):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits, total = 0, 0.0
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            hits += 1
            total += hits / rank
    return total / sum(labels)


def ap_block(scores, labels):
    values = sorted(set(scores), reverse=True)
    seen = hits = 0
    total = 0.0
    for v in values:
        idx = [i for i, s in enumerate(scores) if s == v]
        seen += len(idx)
        block_pos = sum(labels[i] for i in idx)
        hits += block_pos
        total += block_pos * hits / seen
    return total / sum(labels)


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------

def test_auroc_worked_example():
    assert auroc_binary([0.9, 0.8, 0.3, 0.2], [1, 0, 1, 0]) == pytest.approx(0.75, abs=1e-12)


def test_auroc_perfect_separation():
    assert auroc_binary([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_auroc_all_tied_is_half():
    assert auroc_binary([0.5] * 6, [1, 0, 1, 0, 1, 0]) == pytest.approx(0.5)


def test_auroc_single_class_errors():
    with pytest.raises(UndefinedMetricError):
        auroc_binary([0.1, 0.2], [1, 1])


def test_ap_worked_example():
    got = average_precision([0.9, 0.8, 0.3, 0.2], [1, 0, 1, 0])
    assert got == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3), abs=1e-12)


def test_ap_all_positives_on_top():
    assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_ap_single_positive_ranked_last():
    assert average_precision([0.9, 0.8, 0.7, 0.1], [0, 0, 0, 1]) == pytest.approx(0.25)


def test_ap_zero_positives_errors():
    with pytest.raises(UndefinedMetricError):
        average_precision([0.5, 0.4], [0, 0])


# ---------------------------------------------------------------------------
# randomized oracle agreement (ties included)
# ---------------------------------------------------------------------------

def test_auroc_matches_pairwise_oracle_500_cases():
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = rng.integers(4, 30)
        scores = rng.choice([0.1, 0.25, 0.5, 0.5, 0.75, 0.9], size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0], labels[-1] = 1, 0
        got = auroc_binary(scores, labels)
        want = auroc_pairwise(list(scores), list(labels))
        assert abs(got - want) <= 1e-12


def test_ap_matches_rank_oracle_500_cases():
    rng = np.random.default_rng(8)
    for _ in range(500):
        n = rng.integers(3, 30)
        scores = rng.choice([0.1, 0.2, 0.5, 0.5, 0.8, 0.9], size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() == 0:
            labels[0] = 1
        got = average_precision(scores, labels)
        want = ap_rank_by_rank(list(scores), list(labels))
        assert abs(got - want) <= 1e-12
        got_block = average_precision(scores, labels, ties="block")
        want_block = ap_block(list(scores), list(labels))
        assert abs(got_block - want_block) <= 1e-12


def test_ap_block_variant_is_order_independent():
    scores = [0.5, 0.5, 0.5, 0.2]
    labels = [1, 0, 1, 0]
    a = average_precision(scores, labels, ties="block")
    b = average_precision(scores[::-1], labels[::-1], ties="block")
    assert a == pytest.approx(b, abs=1e-12)


# ---------------------------------------------------------------------------
# macro one-vs-rest
# ---------------------------------------------------------------------------

def test_macro_two_class_reduces_to_mean_of_binary():
    probs = np.array([[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.4, 0.6]])
    labels = np.array([0, 1, 0, 1])
    got = macro_ovr(average_precision, probs, labels)
    a = average_precision(probs[:, 0], (labels == 0).astype(int))
    b = average_precision(probs[:, 1], (labels == 1).astype(int))
    assert got == pytest.approx((a + b) / 2)


def test_macro_excludes_absent_classes():
    probs = np.array([[0.6, 0.3, 0.1], [0.2, 0.7, 0.1], [0.5, 0.4, 0.1]])
    labels = np.array([0, 1, 0])  # class 2 never appears
    got = macro_ovr(average_precision, probs, labels)
    a = average_precision(probs[:, 0], (labels == 0).astype(int))
    b = average_precision(probs[:, 1], (labels == 1).astype(int))
    assert got == pytest.approx((a + b) / 2)


def test_macro_matches_per_class_oracle_three_classes():
    rng = np.random.default_rng(9)
    logits = rng.standard_normal((30, 3))
    probs = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    labels = rng.integers(0, 3, size=30)
    got = macro_ovr(average_precision, probs, labels)
    expected = np.mean([ap_rank_by_rank(list(probs[:, c]), list((labels == c).astype(int)))
                        for c in range(3) if (labels == c).sum() > 0])
    assert got == pytest.approx(expected, abs=1e-12)


def test_macro_requires_valid_probability_rows():
    with pytest.raises(ValueError):
        macro_ovr(average_precision, np.array([[0.9, 0.9]]), np.array([0]))


def test_evaluate_multiclass_report_fields():
    rng = np.random.default_rng(10)
    logits = rng.standard_normal((40, 4))
    probs = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    labels = rng.integers(0, 4, size=40)
    report = evaluate_multiclass(probs, labels, class_names=list("abcd"))
    assert 0.0 <= report.auprc <= 1.0
    assert 0.0 <= report.auroc <= 1.0
    assert 0.0 <= report.accuracy <= 1.0
    assert report.n_instances == 40
    assert set(report.per_class) <= set("abcd")
    for name, entry in report.per_class.items():
        assert entry["n_positive"] >= 1


# ---------------------------------------------------------------------------
# case-finding patient-level evaluation
# ---------------------------------------------------------------------------

def test_casefinding_early_grace_window():
    out = casefinding_patient_eval({"p": [(95, 0.9), (100, 0.9)]}, {"p": 100})
    assert out.tp == 1 and out.fp == 0 and out.fn == 0


def test_casefinding_eight_days_early_is_double_counted():
    out = casefinding_patient_eval({"p": [(92, 0.9), (100, 0.9)]}, {"p": 100})
    assert out.tp == 0 and out.fp == 1 and out.fn == 1
    assert out.verdicts[0].category == "FP+FN"


def test_casefinding_negative_control_correct():
    out = casefinding_patient_eval({"c": [(10, 0.1), (50, 0.2)]}, {})
    assert out.tn == 1 and out.fp == 0


def test_casefinding_control_flagged_is_fp():
    out = casefinding_patient_eval({"c": [(10, 0.9)]}, {})
    assert out.fp == 1 and out.tn == 0


def test_casefinding_late_positive_is_fn_only():
    out = casefinding_patient_eval({"p": [(140, 0.9)]}, {"p": 100})
    assert out.fn == 1 and out.fp == 0


def test_casefinding_boundaries():
    assert casefinding_patient_eval({"p": [(93, 0.9)]}, {"p": 100}).tp == 1
    assert casefinding_patient_eval({"p": [(130, 0.9)]}, {"p": 100}).tp == 1
    assert casefinding_patient_eval({"p": [(131, 0.9)]}, {"p": 100}).fn == 1


def test_casefinding_f1_formula():
    out = casefinding_patient_eval(
        {"a": [(100, 0.9)], "b": [(50, 0.9), (100, 0.9)], "c": [(5, 0.1)]},
        {"a": 100, "b": 100})
    assert out.precision == pytest.approx(out.tp / (out.tp + out.fp))
    assert out.recall == pytest.approx(out.tp / (out.tp + out.fn))
    assert out.f1 == pytest.approx(2 / (1 / out.precision + 1 / out.recall))


def test_casefinding_zero_precision_gives_zero_f1():
    out = casefinding_patient_eval({"c": [(10, 0.9)]}, {})
    assert out.f1 == 0.0


def test_casefinding_order_invariance():
    scores = {"a": [(100, 0.9), (90, 0.1)], "b": [(10, 0.2)], "c": [(60, 0.8)]}
    diag = {"a": 100, "c": 100}
    a = casefinding_patient_eval(scores, diag)
    shuffled = {k: list(reversed(v)) for k, v in reversed(list(scores.items()))}
    b = casefinding_patient_eval(shuffled, diag)
    assert a.to_dict() == b.to_dict()
    assert [v.patient_id for v in a.verdicts] == [v.patient_id for v in b.verdicts]


@given(st.lists(st.tuples(st.integers(0, 200), st.floats(0.0, 1.0)), min_size=1, max_size=8),
       st.floats(0.05, 0.9), st.floats(0.05, 0.9))
@settings(max_examples=150)
def test_day_level_recall_never_increases_with_threshold(days, t1, t2):
    # monotonicity holds at the day level: raising the threshold can only
    # shrink the set of flagged days
    lo, hi = min(t1, t2), max(t1, t2)
    flagged_lo = {d for d, s in days if s >= lo}
    flagged_hi = {d for d, s in days if s >= hi}
    assert flagged_hi <= flagged_lo


@pytest.mark.slow
def test_ablation_identical_variants_identical_metrics():
    from oncoabstract import textproc as tp
    from oncoabstract.corpus import GeneratorConfig, generate_corpus
    from oncoabstract.evalx import Variant, run_ablation
    from oncoabstract.model import ModelConfig
    from oncoabstract.train import TrainConfig
    from oncoabstract.corpus import AttributeKind

    bundle = generate_corpus(GeneratorConfig(n_cancer_patients=50, n_control_patients=10,
                                             seed=91))
    texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]
    vocab = tp.learn_vocab(texts, target_size=400)
    mc = ModelConfig(vocab_size=len(vocab), n_classes=13, embed_dim=16, gru_hidden=12,
                     word_attn_dim=8, sent_attn_dim=8, seed=4)
    tc = TrainConfig(epochs=2, batch_size=8, patience=2, seed=4)
    variant = Variant(kinds=("Pathology", "Radiology"), window=(30, 30))
    result = run_ablation(bundle, [variant, variant], AttributeKind.SITE, vocab, mc, tc,
                          n_folds=5, fold_seed=1)
    reports = list(result["variants"].values())
    assert len(reports) == 1 or reports[0] == reports[1]
    a = run_ablation(bundle, [variant, Variant(kinds=("Pathology",), window=(30, 30))],
                     AttributeKind.SITE, vocab, mc, tc, n_folds=5, fold_seed=1)
    b = run_ablation(bundle, [variant, Variant(kinds=("Pathology",), window=(30, 30))],
                     AttributeKind.SITE, vocab, mc, tc, n_folds=5, fold_seed=1)
    assert a["variants"] == b["variants"]
