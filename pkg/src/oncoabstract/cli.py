"""Command-line pipeline: corpus generation through serving.

Every artifact-producing subcommand writes a manifest next to its outputs
(resolved config, input hashes, output paths, wall clock, seed).  Exit
codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
import time

import click
import numpy as np

from .corpus import (
    AttributeKind,
    ConfigError,
    GeneratorConfig,
    corpus_hash,
    corpus_stats,
    fold_subset,
    generate_corpus,
    read_corpus,
    split_folds,
    write_corpus,
)
from .evalx import Variant, ablation_tsv, casefinding_patient_eval, evaluate_multiclass, run_ablation
from .model import (
    CONTEXT_FREE,
    TINY_TRANSFORMER,
    CheckpointError,
    ModelConfig,
    load_checkpoint,
    save_checkpoint,
)
from .textproc import Vocab, learn_vocab, normalize
from .train import (
    DefaultScheme,
    HardNegativeScheme,
    PretrainConfig,
    TrainConfig,
    build_abstraction_dataset,
    build_casefinding_dataset,
    casefinding_eval_days,
    predict_probs,
    pretrain_encoder,
    train_model,
)

KIND_CODES = {"path": "Pathology", "rad": "Radiology", "op": "Operative"}
ATTRIBUTE_CODES = {
    "site": AttributeKind.SITE, "histology": AttributeKind.HISTOLOGY,
    "clinical-t": AttributeKind.CLINICAL_T, "clinical-n": AttributeKind.CLINICAL_N,
    "clinical-m": AttributeKind.CLINICAL_M, "path-t": AttributeKind.PATH_T,
    "path-n": AttributeKind.PATH_N, "path-m": AttributeKind.PATH_M,
}


class ValidationFailure(click.ClickException):
    exit_code = 1


def pipeline_command(fn):
    """Map our error classes onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationFailure, click.ClickException):
            raise
        except (ConfigError, CheckpointError, FileNotFoundError, ValueError) as exc:
            raise ValidationFailure(str(exc))
        except Exception as exc:  # runtime failure
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def parse_window(text: str) -> tuple[int, int]:
    """'-30:30' -> (30, 30): days before and after the anchor."""
    try:
        left, right = text.split(":")
        return abs(int(left)), int(right)
    except Exception:
        raise ValidationFailure(f"bad window {text!r}; expected '-<before>:<after>'")


def parse_kinds(text: str) -> tuple[str, ...]:
    out = []
    for code in text.split(","):
        code = code.strip().lower()
        if code not in KIND_CODES:
            raise ValidationFailure(f"unknown document kind {code!r}; use path,rad,op")
        out.append(KIND_CODES[code])
    return tuple(out)


def parse_attribute(text: str) -> AttributeKind:
    key = text.strip().lower().replace("_", "-")
    if key not in ATTRIBUTE_CODES:
        raise ValidationFailure(f"unknown attribute {text!r}; one of {sorted(ATTRIBUTE_CODES)}")
    return ATTRIBUTE_CODES[key]


def parse_folds(text: str) -> tuple[int, ...]:
    """'1-6' or '7,8' or '9-10' -> tuple of fold numbers."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValidationFailure(f"empty fold list {text!r}")
    return tuple(out)


def file_hash(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: str, subcommand: str, config: dict, input_hashes: dict,
                   outputs: list[str], seed, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "input_hashes": input_hashes,
        "outputs": sorted(outputs),
        "wall_clock_seconds": round(time.time() - started, 3),
        "seed": seed,
    }
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def need(path: str, producer: str) -> str:
    if not os.path.exists(path):
        raise ValidationFailure(f"missing artifact {path!r}: produce it with `{producer}` first")
    return path


def load_corpus_dir(path: str):
    need(os.path.join(path, "corpus.jsonl"), "oncoabstract gen-corpus")
    return read_corpus(path)


def load_vocab_file(path: str) -> Vocab:
    need(path, "oncoabstract build-vocab")
    return Vocab.load(path)


@click.group()
def main():
    """Oncology abstraction pipeline on a synthetic EMR corpus."""


# ---------------------------------------------------------------------------
# gen-corpus
# ---------------------------------------------------------------------------

@main.command("gen-corpus")
@click.option("--seed", type=int, required=True)
@click.option("--cancer", type=int, default=200, show_default=True)
@click.option("--control", type=int, default=50, show_default=True)
@click.option("--site-classes", type=int, default=12, show_default=True)
@click.option("--histology-classes", type=int, default=10, show_default=True)
@click.option("--cross-doc-fraction", type=float, default=0.35, show_default=True)
@click.option("--negation-rate", type=float, default=0.7, show_default=True)
@click.option("--variation-rate", type=float, default=0.5, show_default=True)
@click.option("--docs-min", type=int, default=3, show_default=True)
@click.option("--docs-max", type=int, default=7, show_default=True)
@click.option("--history-min", type=int, default=40, show_default=True)
@click.option("--history-max", type=int, default=120, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@pipeline_command
def gen_corpus(seed, cancer, control, site_classes, histology_classes, cross_doc_fraction,
               negation_rate, variation_rate, docs_min, docs_max, history_min,
               history_max, out_dir):
    """Generate the synthetic corpus and its companion files."""
    started = time.time()
    config = GeneratorConfig(
        n_cancer_patients=cancer, n_control_patients=control,
        n_site_classes=site_classes, n_histology_classes=histology_classes,
        cross_doc_fraction=cross_doc_fraction, negation_rate=negation_rate,
        variation_rate=variation_rate, docs_per_patient=(docs_min, docs_max),
        pre_diagnosis_history_days=(history_min, history_max), seed=seed)
    bundle = generate_corpus(config)
    write_corpus(bundle, out_dir)
    stats = corpus_stats(bundle)
    with open(os.path.join(out_dir, "stats.json"), "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = [os.path.join(out_dir, n) for n in
               ("corpus.jsonl", "labelspaces.json", "lexicon.json", "evidence.jsonl",
                "pretrain_pool.jsonl", "stats.json")]
    write_manifest(out_dir, "gen-corpus", config.__dict__ | {
        "docs_per_patient": list(config.docs_per_patient),
        "pre_diagnosis_history_days": list(config.pre_diagnosis_history_days)},
        {}, outputs, seed, started)
    click.echo(f"corpus: {stats['n_registry']} registry + {stats['n_controls']} control "
               f"patients -> {out_dir} (hash {corpus_hash(bundle)[:12]})")


# ---------------------------------------------------------------------------
# build-vocab
# ---------------------------------------------------------------------------

@main.command("build-vocab")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--target-size", type=int, default=768, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@pipeline_command
def build_vocab(corpus_dir, target_size, out_path):
    """Learn the subword vocabulary from every corpus document."""
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    texts = [normalize(d.text).text for p in bundle.patients for d in p.documents]
    vocab = learn_vocab(texts, target_size=target_size)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    vocab.save(out_path)
    write_manifest(os.path.dirname(os.path.abspath(out_path)), "build-vocab",
                   {"target_size": target_size, "corpus": corpus_dir},
                   {"corpus.jsonl": file_hash(os.path.join(corpus_dir, "corpus.jsonl"))},
                   [out_path], None, started)
    click.echo(f"vocab: {len(vocab)} units, {len(vocab.merges)} merges -> {out_path}")


# ---------------------------------------------------------------------------
# pretrain
# ---------------------------------------------------------------------------

@main.command("pretrain")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--steps", type=int, default=2000, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--mask-rate", type=float, default=0.15, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--embed-dim", type=int, default=64, show_default=True)
@click.option("--layers", type=int, default=2, show_default=True)
@click.option("--heads", type=int, default=4, show_default=True)
@click.option("--ff-dim", type=int, default=128, show_default=True)
@pipeline_command
def pretrain(corpus_dir, vocab_path, out_path, steps, batch_size, mask_rate, lr, seed,
             embed_dim, layers, heads, ff_dim):
    """Masked-LM pretraining of the sentence encoder on the unlabeled pool."""
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    model_config = ModelConfig(
        vocab_size=len(vocab), n_classes=2, embed_dim=embed_dim, encoder=TINY_TRANSFORMER,
        layers=layers, heads=heads, ff_dim=ff_dim, seed=seed)
    config = PretrainConfig(steps=steps, batch_size=batch_size, mask_rate=mask_rate,
                            lr=lr, seed=seed)
    model, history = pretrain_encoder(config, model_config, bundle.pretrain_pool, vocab)
    save_checkpoint(model, out_path)
    out_dir = os.path.dirname(os.path.abspath(out_path))
    with open(os.path.join(out_dir, "pretrain_history.json"), "w", encoding="utf-8") as fh:
        json.dump(history, fh, indent=2)
        fh.write("\n")
    write_manifest(out_dir, "pretrain", config.__dict__ | model_config.to_dict(),
                   {"vocab": file_hash(vocab_path)}, [out_path], seed, started)
    click.echo(f"pretrained encoder -> {out_path} "
               f"(mlm loss {history[0]['mlm_loss']:.3f} -> {history[-1]['mlm_loss']:.3f})")


# ---------------------------------------------------------------------------
# train / eval
# ---------------------------------------------------------------------------

def _model_config(vocab, encoder, n_classes, embed_dim, gru_hidden, word_attn_dim,
                  sent_attn_dim, layers, heads, ff_dim, dropout, seed):
    return ModelConfig(
        vocab_size=len(vocab), n_classes=n_classes, embed_dim=embed_dim,
        encoder=encoder, layers=layers, heads=heads, ff_dim=ff_dim,
        gru_hidden=gru_hidden, word_attn_dim=word_attn_dim,
        sent_attn_dim=sent_attn_dim, dropout_rate=dropout, seed=seed)


def _train_options(fn):
    for deco in reversed([
        click.option("--corpus", "corpus_dir", type=click.Path(), required=True),
        click.option("--vocab", "vocab_path", type=click.Path(), required=True),
        click.option("--window", default="-30:30", show_default=True),
        click.option("--kinds", default="path,rad,op", show_default=True),
        click.option("--epochs", type=int, default=30, show_default=True),
        click.option("--batch-size", type=int, default=16, show_default=True),
        click.option("--lr", type=float, default=1e-3, show_default=True),
        click.option("--patience", type=int, default=3, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--n-folds", type=int, default=10, show_default=True),
        click.option("--train-folds", default="1-6", show_default=True),
        click.option("--dev-folds", default="7-8", show_default=True),
        click.option("--fold-seed", type=int, default=0, show_default=True),
        click.option("--embed-dim", type=int, default=64, show_default=True),
        click.option("--gru-hidden", type=int, default=64, show_default=True),
        click.option("--word-attn-dim", type=int, default=64, show_default=True),
        click.option("--sent-attn-dim", type=int, default=64, show_default=True),
        click.option("--layers", type=int, default=2, show_default=True),
        click.option("--heads", type=int, default=4, show_default=True),
        click.option("--ff-dim", type=int, default=128, show_default=True),
        click.option("--dropout", type=float, default=0.1, show_default=True),
        click.option("--max-sentences", type=int, default=256, show_default=True),
    ]):
        fn = deco(fn)
    return fn


@main.command("train")
@click.option("--attribute", required=True)
@click.option("--encoder", type=click.Choice([CONTEXT_FREE, TINY_TRANSFORMER]),
              default=CONTEXT_FREE, show_default=True)
@click.option("--init-encoder", "init_encoder_path", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_train_options
@pipeline_command
def train(attribute, encoder, init_encoder_path, out_dir, corpus_dir, vocab_path, window,
          kinds, epochs, batch_size, lr, patience, seed, n_folds, train_folds, dev_folds,
          fold_seed, embed_dim, gru_hidden, word_attn_dim, sent_attn_dim, layers, heads,
          ff_dim, dropout, max_sentences):
    """Train an abstraction model for one attribute."""
    started = time.time()
    attr = parse_attribute(attribute)
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    win, kind_set = parse_window(window), parse_kinds(kinds)
    assignment = split_folds(bundle, n_folds, seed=fold_seed)
    cancer = bundle.cancer_patients
    train_pat = fold_subset(cancer, assignment, parse_folds(train_folds))
    dev_pat = fold_subset(cancer, assignment, parse_folds(dev_folds))

    from .corpus import corpus_hash
    from .train import dataset_cache_key, load_examples, save_examples
    cache_dir = os.path.join(corpus_dir, "cache")
    os.makedirs(cache_dir, exist_ok=True)
    key = dataset_cache_key(corpus_hash(bundle), attr.value, win, kind_set,
                            vocab.content_hash(), max_sentences)
    cache_path = os.path.join(cache_dir, f"{key}.jsonl")
    if os.path.exists(cache_path):
        by_patient = {}
        for ex in load_examples(cache_path):
            by_patient[ex.patient_id] = ex
        train_set = [by_patient[p.patient_id] for p in train_pat
                     if p.patient_id in by_patient]
        dev_set = [by_patient[p.patient_id] for p in dev_pat if p.patient_id in by_patient]
        click.echo(f"dataset cache hit: {os.path.basename(cache_path)}")
    else:
        all_examples = build_abstraction_dataset(bundle, attr, vocab, win, kind_set,
                                                 max_sentences)
        save_examples(cache_path, all_examples)
        by_patient = {ex.patient_id: ex for ex in all_examples}
        train_set = [by_patient[p.patient_id] for p in train_pat
                     if p.patient_id in by_patient]
        dev_set = [by_patient[p.patient_id] for p in dev_pat if p.patient_id in by_patient]
    if not train_set:
        raise ValidationFailure("no training examples in the selected folds")
    space = bundle.label_spaces[attr.value]
    model_config = _model_config(vocab, encoder, space.n_classes, embed_dim, gru_hidden,
                                 word_attn_dim, sent_attn_dim, layers, heads, ff_dim,
                                 dropout, seed)
    init_encoder = None
    if init_encoder_path:
        init_encoder = load_checkpoint(need(init_encoder_path, "oncoabstract pretrain"),
                                       expect_vocab_hash=vocab.content_hash())
    train_config = TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                               patience=patience, seed=seed, window=win,
                               kinds=kind_set, max_sentences=max_sentences)
    result = train_model(train_config, model_config, train_set, dev_set,
                         vocab.content_hash(), init_encoder=init_encoder)
    ckpt_path = os.path.join(out_dir, f"{attr.value}.{encoder}.ckpt")
    save_checkpoint(result.model, ckpt_path)
    with open(os.path.join(out_dir, "history.json"), "w", encoding="utf-8") as fh:
        json.dump({"history": result.history, "best_epoch": result.best_epoch,
                   "best_dev_metric": result.best_metric}, fh, indent=2)
        fh.write("\n")
    write_manifest(out_dir, "train", {
        "attribute": attr.value, "encoder": encoder, "window": list(win),
        "kinds": list(kind_set), **train_config.__dict__,
        "window_days": list(win), "model": model_config.to_dict()},
        {"vocab": file_hash(vocab_path),
         "corpus.jsonl": file_hash(os.path.join(corpus_dir, "corpus.jsonl"))},
        [ckpt_path], seed, started)
    click.echo(f"trained {attr.value} ({encoder}): best dev {result.best_metric:.4f} "
               f"at epoch {result.best_epoch} -> {ckpt_path}")


@main.command("eval")
@click.option("--checkpoint", "ckpt_path", type=click.Path(), required=True)
@click.option("--folds", default="9-10", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_train_options
@pipeline_command
def eval_cmd(ckpt_path, folds, out_path, corpus_dir, vocab_path, window, kinds, epochs,
             batch_size, lr, patience, seed, n_folds, train_folds, dev_folds, fold_seed,
             embed_dim, gru_hidden, word_attn_dim, sent_attn_dim, layers, heads, ff_dim,
             dropout, max_sentences):
    """Evaluate an abstraction checkpoint on held-out folds."""
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    model = load_checkpoint(need(ckpt_path, "oncoabstract train"),
                            expect_vocab_hash=vocab.content_hash())
    attr = AttributeKind(os.path.basename(ckpt_path).split(".")[0])
    win, kind_set = parse_window(window), parse_kinds(kinds)
    assignment = split_folds(bundle, n_folds, seed=fold_seed)
    patients = fold_subset(bundle.cancer_patients, assignment, parse_folds(folds))
    examples = build_abstraction_dataset(bundle, attr, vocab, win, kind_set,
                                         max_sentences, patients=patients)
    probs = predict_probs(model, examples)
    labels = np.array([ex.label_index for ex in examples])
    space = bundle.label_spaces[attr.value]
    report = evaluate_multiclass(probs, labels, class_names=list(space.classes))
    payload = {"kind": "abstraction", "attribute": attr.value, "folds": folds,
               "window": list(win), "kinds": list(kind_set), **report.to_dict()}
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(os.path.dirname(os.path.abspath(out_path)), "eval",
                   {"folds": folds, "window": list(win), "kinds": list(kind_set)},
                   {"checkpoint": file_hash(ckpt_path)}, [out_path], seed, started)
    click.echo(f"{attr.value}: AUROC {report.auroc:.4f} AUPRC {report.auprc:.4f} "
               f"accuracy {report.accuracy:.4f} (n={report.n_instances}) -> {out_path}")


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------

@main.command("ablate")
@click.option("--attribute", required=True)
@click.option("--variant", "variants", multiple=True, required=True,
              help="kinds@window, e.g. path,rad@-30:30 (repeat at least twice)")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_train_options
@pipeline_command
def ablate(attribute, variants, out_dir, corpus_dir, vocab_path, window, kinds, epochs,
           batch_size, lr, patience, seed, n_folds, train_folds, dev_folds, fold_seed,
           embed_dim, gru_hidden, word_attn_dim, sent_attn_dim, layers, heads, ff_dim,
           dropout, max_sentences):
    """Train and compare input variants under identical seeds and folds."""
    started = time.time()
    attr = parse_attribute(attribute)
    if len(variants) < 2:
        raise ValidationFailure("provide at least two --variant values")
    parsed = []
    for v in variants:
        try:
            kinds_part, window_part = v.split("@")
        except ValueError:
            raise ValidationFailure(f"bad variant {v!r}; expected kinds@window")
        parsed.append(Variant(kinds=parse_kinds(kinds_part), window=parse_window(window_part)))
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    space = bundle.label_spaces[attr.value]
    model_config = _model_config(vocab, CONTEXT_FREE, space.n_classes, embed_dim,
                                 gru_hidden, word_attn_dim, sent_attn_dim, layers,
                                 heads, ff_dim, dropout, seed)
    train_config = TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                               patience=patience, seed=seed, max_sentences=max_sentences)
    result = run_ablation(bundle, parsed, attr, vocab, model_config, train_config,
                          n_folds=max(n_folds, 5), fold_seed=fold_seed)
    os.makedirs(out_dir, exist_ok=True)
    tsv_path = os.path.join(out_dir, "ablation.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write(ablation_tsv(result))
    json_path = os.path.join(out_dir, "metrics.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"kind": "ablation", **result}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out_dir, "ablate", {"attribute": attr.value,
                                       "variants": [v.name for v in parsed]},
                   {"vocab": file_hash(vocab_path)}, [tsv_path, json_path], seed, started)
    click.echo(open(tsv_path).read())


# ---------------------------------------------------------------------------
# case-find
# ---------------------------------------------------------------------------

@main.group("case-find")
def case_find():
    """Case-finding: train a day-level classifier, evaluate patient-level."""


@case_find.command("train")
@click.option("--scheme", type=click.Choice(["default", "hard-negatives"]),
              default="default", show_default=True)
@click.option("--hard-cutoff", type=int, default=30, show_default=True)
@click.option("--per-patient-max", type=int, default=2, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_train_options
@pipeline_command
def case_find_train(scheme, hard_cutoff, per_patient_max, out_dir, corpus_dir, vocab_path,
                    window, kinds, epochs, batch_size, lr, patience, seed, n_folds,
                    train_folds, dev_folds, fold_seed, embed_dim, gru_hidden, word_attn_dim,
                    sent_attn_dim, layers, heads, ff_dim, dropout, max_sentences):
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    kind_set = parse_kinds(kinds)
    scheme_obj = (HardNegativeScheme(hard_cutoff_days=hard_cutoff,
                                     per_patient_max=per_patient_max)
                  if scheme == "hard-negatives" else DefaultScheme())
    assignment = split_folds(bundle, n_folds, seed=fold_seed)
    train_pat = fold_subset(bundle.patients, assignment, parse_folds(train_folds))
    dev_pat = fold_subset(bundle.patients, assignment, parse_folds(dev_folds))
    train_set = build_casefinding_dataset(bundle, scheme_obj, vocab, seed=seed,
                                          kinds=kind_set, max_sentences=max_sentences,
                                          patients=train_pat)
    dev_set = build_casefinding_dataset(bundle, scheme_obj, vocab, seed=seed + 1,
                                        kinds=kind_set, max_sentences=max_sentences,
                                        patients=dev_pat)
    model_config = _model_config(vocab, CONTEXT_FREE, 2, embed_dim, gru_hidden,
                                 word_attn_dim, sent_attn_dim, layers, heads, ff_dim,
                                 dropout, seed)
    train_config = TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                               patience=patience, seed=seed, kinds=kind_set,
                               max_sentences=max_sentences)
    result = train_model(train_config, model_config, train_set, dev_set, vocab.content_hash())
    ckpt_path = os.path.join(out_dir, f"casefinding.{scheme}.ckpt")
    save_checkpoint(result.model, ckpt_path)
    with open(os.path.join(out_dir, "history.json"), "w", encoding="utf-8") as fh:
        json.dump({"history": result.history, "best_epoch": result.best_epoch}, fh, indent=2)
        fh.write("\n")
    write_manifest(out_dir, "case-find train", {"scheme": scheme,
                                                "hard_cutoff": hard_cutoff,
                                                "per_patient_max": per_patient_max},
                   {"vocab": file_hash(vocab_path)}, [ckpt_path], seed, started)
    click.echo(f"case-finding model ({scheme}) -> {ckpt_path}")


@case_find.command("eval")
@click.option("--checkpoint", "ckpt_path", type=click.Path(), required=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--folds", default="9-10", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_train_options
@pipeline_command
def case_find_eval(ckpt_path, threshold, folds, out_path, corpus_dir, vocab_path, window,
                   kinds, epochs, batch_size, lr, patience, seed, n_folds, train_folds,
                   dev_folds, fold_seed, embed_dim, gru_hidden, word_attn_dim,
                   sent_attn_dim, layers, heads, ff_dim, dropout, max_sentences):
    """Patient-level evaluation: first positive day within [-7, +30] of diagnosis."""
    from . import numcore as nc
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    model = load_checkpoint(need(ckpt_path, "oncoabstract case-find train"),
                            expect_vocab_hash=vocab.content_hash())
    kind_set = parse_kinds(kinds)
    assignment = split_folds(bundle, n_folds, seed=fold_seed)
    patients = fold_subset(bundle.patients, assignment, parse_folds(folds))
    eval_days = casefinding_eval_days(patients, vocab, kinds=kind_set,
                                      max_sentences=max_sentences)
    flat = [(pid, day, seq) for pid, entries in eval_days.items() for day, seq in entries]
    day_scores: dict[str, list] = {}
    for i in range(0, len(flat), 64):
        chunk = flat[i:i + 64]
        logits, _ = model.forward_batch([seq for _, _, seq in chunk])
        probs = nc.softmax(logits, axis=-1).data
        for (pid, day, _), p in zip(chunk, probs):
            day_scores.setdefault(pid, []).append((day, float(p[1])))
    diagnosis = {p.patient_id: p.registry.diagnosis_date for p in patients if p.registry}
    outcome = casefinding_patient_eval(day_scores, diagnosis, threshold=threshold)
    payload = {"kind": "casefinding", "checkpoint": os.path.basename(ckpt_path),
               "threshold": threshold, "folds": folds, **outcome.to_dict()}
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(os.path.dirname(os.path.abspath(out_path)), "case-find eval",
                   {"threshold": threshold, "folds": folds},
                   {"checkpoint": file_hash(ckpt_path)}, [out_path], seed, started)
    click.echo(f"case finding: F1 {outcome.f1:.4f} precision {outcome.precision:.4f} "
               f"recall {outcome.recall:.4f} (TP {outcome.tp} FP {outcome.fp} "
               f"FN {outcome.fn} TN {outcome.tn}) -> {out_path}")


# ---------------------------------------------------------------------------
# infer / explain / serve / report
# ---------------------------------------------------------------------------

@main.command("infer")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--checkpoints", "ckpt_dir", type=click.Path(), required=True)
@click.option("--window", default="-30:30", show_default=True)
@click.option("--kinds", default="path,rad,op", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@pipeline_command
def infer(corpus_dir, vocab_path, ckpt_dir, window, kinds, out_path):
    """Precompute predictions and rationales for every registry patient."""
    from .service import run_inference, save_predictions, validate_rationale_spans
    from .service.inference import checkpoint_models
    started = time.time()
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    models = checkpoint_models(need(ckpt_dir, "oncoabstract train"), vocab.content_hash())
    if not models:
        raise ValidationFailure(
            f"no attribute checkpoints in {ckpt_dir!r}: produce them with `oncoabstract train`")
    records = run_inference(bundle, vocab, models, window=parse_window(window),
                            kinds=parse_kinds(kinds))
    validate_rationale_spans(bundle, records)
    save_predictions(records, out_path)
    write_manifest(os.path.dirname(os.path.abspath(out_path)), "infer",
                   {"attributes": sorted(models), "window": window, "kinds": kinds},
                   {"vocab": file_hash(vocab_path)}, [out_path], None, started)
    click.echo(f"{len(records)} extractions ({len(models)} attributes) -> {out_path}")


@main.command("explain")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--checkpoint", "ckpt_path", type=click.Path(), required=True)
@click.option("--patient", "patient_id", required=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--window", default="-30:30", show_default=True)
@click.option("--kinds", default="path,rad,op", show_default=True)
@click.option("--json", "as_json", is_flag=True, default=False)
@pipeline_command
def explain(corpus_dir, vocab_path, ckpt_path, patient_id, k, window, kinds, as_json):
    """Print the attention rationale for one patient."""
    from .model import forward_abstraction
    from .rationale import extract_rationale
    from .textproc import assemble_input
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    model = load_checkpoint(need(ckpt_path, "oncoabstract train"),
                            expect_vocab_hash=vocab.content_hash())
    attr = AttributeKind(os.path.basename(ckpt_path).split(".")[0])
    try:
        patient = bundle.patient(patient_id)
    except KeyError:
        raise ValidationFailure(f"unknown patient {patient_id!r}")
    if patient.registry is None:
        raise ValidationFailure(f"patient {patient_id} has no registry record")
    seq = assemble_input(patient, parse_window(window), patient.registry.diagnosis_date,
                         parse_kinds(kinds), vocab, attribute=attr.value)
    pred = forward_abstraction(model, seq)
    rationale = extract_rationale(pred, seq, k=k)
    space = bundle.label_spaces[attr.value]
    docs = {d.doc_id: d.text for d in patient.documents}
    if as_json:
        click.echo(json.dumps({
            "patient_id": patient_id, "attribute": attr.value,
            "predicted": space.classes[pred.argmax],
            "truth": patient.registry.labels[attr.value],
            "rationale": rationale.to_dict(),
        }, indent=2))
        return
    click.echo(f"patient {patient_id} | {attr.value}: predicted "
               f"{space.classes[pred.argmax]} (truth {patient.registry.labels[attr.value]})")
    for entry in rationale.entries:
        snippet = docs[entry.doc_id][entry.char_start:entry.char_end]
        click.echo(f"  [{entry.weight:.3f}] {entry.doc_id}#{entry.sentence_index}: {snippet}")
        for tok in entry.tokens:
            text = docs[tok.doc_id][tok.char_start:tok.char_end]
            click.echo(f"      {tok.weight:.3f} {text!r}")


@main.command("serve")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True,
              envvar="ONCOABSTRACT_CORPUS")
@click.option("--vocab", "vocab_path", type=click.Path(), required=True,
              envvar="ONCOABSTRACT_VOCAB")
@click.option("--checkpoints", "ckpt_dir", type=click.Path(), default=None,
              envvar="ONCOABSTRACT_CHECKPOINTS")
@click.option("--predictions", "pred_path", type=click.Path(), default=None,
              envvar="ONCOABSTRACT_PREDICTIONS")
@click.option("--log", "log_path", type=click.Path(), required=True,
              envvar="ONCOABSTRACT_LOG")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="ONCOABSTRACT_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="ONCOABSTRACT_PORT")
@click.option("--ui-dir", type=click.Path(), default=None, envvar="ONCOABSTRACT_UI_DIR")
@pipeline_command
def serve(corpus_dir, vocab_path, ckpt_dir, pred_path, log_path, host, port, ui_dir):
    """Run the assisted-curation HTTP service."""
    import uvicorn

    from .service import CurationStore, create_app, load_predictions, run_inference
    from .service.inference import checkpoint_models, validate_rationale_spans
    bundle = load_corpus_dir(corpus_dir)
    vocab = load_vocab_file(vocab_path)
    reinfer_fn = None
    if pred_path:
        records = load_predictions(need(pred_path, "oncoabstract infer"))
    elif ckpt_dir:
        models = checkpoint_models(ckpt_dir, vocab.content_hash())
        if not models:
            raise ValidationFailure(f"no usable checkpoints in {ckpt_dir!r}")
        records = run_inference(bundle, vocab, models)
        reinfer_fn = lambda: run_inference(  # noqa: E731
            bundle, vocab, checkpoint_models(ckpt_dir, vocab.content_hash()))
    else:
        raise ValidationFailure("provide --predictions or --checkpoints")
    validate_rationale_spans(bundle, records)
    store = CurationStore(bundle, records, log_path)
    app = create_app(store, reinfer_fn=reinfer_fn, ui_dir=ui_dir)
    click.echo(f"serving {len(store.items)} extractions on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("report")
@click.option("--metrics", "metric_paths", multiple=True, required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@pipeline_command
def report(metric_paths, out_path):
    """Render metrics files as aligned text tables (pure function of inputs)."""
    sections: dict[str, list[dict]] = {"abstraction": [], "casefinding": [], "ablation": []}
    for path in metric_paths:
        with open(need(path, "oncoabstract eval"), encoding="utf-8") as fh:
            payload = json.load(fh)
        kind = payload.get("kind", "abstraction")
        if kind not in sections:
            raise ValidationFailure(f"{path}: unknown metrics kind {kind!r}")
        payload["_path"] = os.path.basename(path)
        sections[kind].append(payload)
    lines = []
    if sections["abstraction"]:
        lines.append("ABSTRACTION (macro one-vs-rest)")
        lines.append(f"{'attribute':<14}{'AUROC':>8}{'AUPRC':>8}{'acc':>8}{'n':>7}  source")
        for row in sorted(sections["abstraction"], key=lambda r: (r['attribute'], r['_path'])):
            lines.append(f"{row['attribute']:<14}{row['auroc']:>8.3f}{row['auprc']:>8.3f}"
                         f"{row['accuracy']:>8.3f}{row['n_instances']:>7}  {row['_path']}")
        lines.append("")
    if sections["casefinding"]:
        lines.append("CASE FINDING (patient-level, first positive in [-7, +30])")
        lines.append(f"{'model':<28}{'F1':>8}{'prec':>8}{'recall':>8}  source")
        for row in sorted(sections["casefinding"], key=lambda r: r['_path']):
            lines.append(f"{row['checkpoint']:<28}{row['f1']:>8.3f}{row['precision']:>8.3f}"
                         f"{row['recall']:>8.3f}  {row['_path']}")
        lines.append("")
    if sections["ablation"]:
        for row in sorted(sections["ablation"], key=lambda r: r['_path']):
            lines.append(f"ABLATION ({row['attribute']}, {row['_path']})")
            for name, rep in row["variants"].items():
                lines.append(f"  {name:<22}AUPRC {rep['auprc']:.3f}  AUROC {rep['auroc']:.3f}")
            for d in row["deltas"]:
                lines.append(f"  {d['from']} -> {d['to']}: {d['auprc_delta']:+.3f} AUPRC")
            lines.append("")
    text = "\n".join(lines).rstrip() + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
