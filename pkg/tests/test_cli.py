import hashlib
import json
import os

import pytest
from click.testing import CliRunner

from oncoabstract.cli import main, parse_folds, parse_kinds, parse_window


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, runner):
    """A small end-to-end pipeline: corpus -> vocab -> model -> eval."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus = str(root / "corpus")
    vocab = str(root / "vocab.json")
    model_dir = str(root / "model")
    r = runner.invoke(main, ["gen-corpus", "--seed", "7", "--cancer", "60", "--control", "20",
                             "--out", corpus])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["build-vocab", "--corpus", corpus, "--target-size", "420",
                             "--out", vocab])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, [
        "train", "--attribute", "site", "--corpus", corpus, "--vocab", vocab,
        "--out", model_dir, "--epochs", "2", "--batch-size", "8", "--seed", "1",
        "--n-folds", "5", "--train-folds", "1-3", "--dev-folds", "4",
        "--embed-dim", "16", "--gru-hidden", "12", "--word-attn-dim", "8",
        "--sent-attn-dim", "8"])
    assert r.exit_code == 0, r.output
    return {"root": root, "corpus": corpus, "vocab": vocab, "model_dir": model_dir,
            "ckpt": os.path.join(model_dir, "site.context-free.ckpt")}


def dir_hashes(path):
    out = {}
    for name in sorted(os.listdir(path)):
        if name == "manifest.json":
            continue
        with open(os.path.join(path, name), "rb") as fh:
            out[name] = hashlib.sha256(fh.read()).hexdigest()
    return out


def test_parse_helpers():
    assert parse_window("-30:30") == (30, 30)
    assert parse_window("-30:90") == (30, 90)
    assert parse_kinds("path,rad") == ("Pathology", "Radiology")
    assert parse_folds("1-3") == (1, 2, 3)
    assert parse_folds("7,8") == (7, 8)


def test_gen_corpus_deterministic_artifacts(runner, tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        r = runner.invoke(main, ["gen-corpus", "--seed", "11", "--cancer", "15",
                                 "--control", "5", "--out", out])
        assert r.exit_code == 0, r.output
    assert dir_hashes(a) == dir_hashes(b)


def test_gen_corpus_writes_manifest(runner, tmp_path):
    out = str(tmp_path / "c")
    r = runner.invoke(main, ["gen-corpus", "--seed", "3", "--cancer", "10", "--control", "4",
                             "--out", out])
    assert r.exit_code == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["subcommand"] == "gen-corpus"
    assert manifest["seed"] == 3
    assert "wall_clock_seconds" in manifest


def test_invalid_config_exits_1(runner, tmp_path):
    r = runner.invoke(main, ["gen-corpus", "--seed", "1", "--cancer", "0",
                             "--out", str(tmp_path / "x")])
    assert r.exit_code == 1


def test_train_without_vocab_names_producer(runner, workspace, tmp_path):
    r = runner.invoke(main, ["train", "--attribute", "site", "--corpus", workspace["corpus"],
                             "--vocab", str(tmp_path / "missing.json"),
                             "--out", str(tmp_path / "m")])
    assert r.exit_code == 1
    assert "build-vocab" in r.output


def test_train_unknown_attribute_exits_1(runner, workspace, tmp_path):
    r = runner.invoke(main, ["train", "--attribute", "bogus", "--corpus", workspace["corpus"],
                             "--vocab", workspace["vocab"], "--out", str(tmp_path / "m")])
    assert r.exit_code == 1


def test_train_produced_checkpoint_and_history(workspace):
    assert os.path.exists(workspace["ckpt"])
    history = json.load(open(os.path.join(workspace["model_dir"], "history.json")))
    assert len(history["history"]) >= 1
    manifest = json.load(open(os.path.join(workspace["model_dir"], "manifest.json")))
    assert manifest["subcommand"] == "train"
    assert manifest["config"]["attribute"] == "site"


def test_eval_writes_metrics(runner, workspace, tmp_path):
    out = str(tmp_path / "metrics.json")
    r = runner.invoke(main, ["eval", "--corpus", workspace["corpus"], "--vocab",
                             workspace["vocab"], "--checkpoint", workspace["ckpt"],
                             "--folds", "5", "--n-folds", "5", "--out", out])
    assert r.exit_code == 0, r.output
    payload = json.load(open(out))
    assert payload["kind"] == "abstraction"
    assert 0.0 <= payload["auprc"] <= 1.0
    assert payload["attribute"] == "site"


def test_infer_and_explain(runner, workspace, tmp_path):
    preds = str(tmp_path / "preds.jsonl")
    r = runner.invoke(main, ["infer", "--corpus", workspace["corpus"], "--vocab",
                             workspace["vocab"], "--checkpoints", workspace["model_dir"],
                             "--out", preds])
    assert r.exit_code == 0, r.output
    lines = open(preds).read().splitlines()
    assert len(lines) == 60  # one site extraction per cancer patient
    first = json.loads(lines[0])
    r = runner.invoke(main, ["explain", "--corpus", workspace["corpus"], "--vocab",
                             workspace["vocab"], "--checkpoint", workspace["ckpt"],
                             "--patient", first["patient_id"], "--k", "2"])
    assert r.exit_code == 0, r.output
    assert "predicted" in r.output


def test_report_renders_tables(runner, workspace, tmp_path):
    metrics = str(tmp_path / "metrics.json")
    r = runner.invoke(main, ["eval", "--corpus", workspace["corpus"], "--vocab",
                             workspace["vocab"], "--checkpoint", workspace["ckpt"],
                             "--folds", "5", "--n-folds", "5", "--out", metrics])
    assert r.exit_code == 0
    out = str(tmp_path / "report.txt")
    r = runner.invoke(main, ["report", "--metrics", metrics, "--out", out])
    assert r.exit_code == 0, r.output
    text = open(out).read()
    assert "ABSTRACTION" in text and "site" in text
    # pure function of inputs: second render is identical
    r2 = runner.invoke(main, ["report", "--metrics", metrics])
    assert r2.output.rstrip("\n") == text.rstrip("\n")


def test_report_missing_metrics_exits_1(runner, tmp_path):
    r = runner.invoke(main, ["report", "--metrics", str(tmp_path / "none.json")])
    assert r.exit_code == 1


def test_case_find_train_and_eval(runner, workspace, tmp_path):
    out_dir = str(tmp_path / "cf")
    r = runner.invoke(main, [
        "case-find", "train", "--scheme", "hard-negatives", "--corpus", workspace["corpus"],
        "--vocab", workspace["vocab"], "--out", out_dir, "--epochs", "2",
        "--batch-size", "8", "--n-folds", "5", "--train-folds", "1-3", "--dev-folds", "4",
        "--embed-dim", "16", "--gru-hidden", "12", "--word-attn-dim", "8",
        "--sent-attn-dim", "8"])
    assert r.exit_code == 0, r.output
    ckpt = os.path.join(out_dir, "casefinding.hard-negatives.ckpt")
    assert os.path.exists(ckpt)
    metrics = str(tmp_path / "cf_metrics.json")
    r = runner.invoke(main, [
        "case-find", "eval", "--checkpoint", ckpt, "--corpus", workspace["corpus"],
        "--vocab", workspace["vocab"], "--folds", "5", "--n-folds", "5",
        "--threshold", "0.5", "--out", metrics])
    assert r.exit_code == 0, r.output
    payload = json.load(open(metrics))
    assert payload["kind"] == "casefinding"
    assert {"f1", "precision", "recall", "tp", "fp", "fn", "tn"} <= set(payload)
    # report renders the patient-level F1 line
    r = runner.invoke(main, ["report", "--metrics", metrics])
    assert r.exit_code == 0
    assert "CASE FINDING" in r.output and "[-7, +30]" in r.output


def test_ablate_two_variants(runner, workspace, tmp_path):
    out_dir = str(tmp_path / "abl")
    r = runner.invoke(main, [
        "ablate", "--attribute", "site", "--corpus", workspace["corpus"],
        "--vocab", workspace["vocab"], "--out", out_dir,
        "--variant", "path@-30:30", "--variant", "path,rad@-30:30",
        "--epochs", "1", "--batch-size", "8", "--embed-dim", "16", "--gru-hidden", "12",
        "--word-attn-dim", "8", "--sent-attn-dim", "8"])
    assert r.exit_code == 0, r.output
    tsv = open(os.path.join(out_dir, "ablation.tsv")).read()
    assert tsv.startswith("variant\tauroc\tauprc")
    assert "auprc_delta" in tsv


def test_ablate_single_variant_exits_1(runner, workspace, tmp_path):
    r = runner.invoke(main, [
        "ablate", "--attribute", "site", "--corpus", workspace["corpus"],
        "--vocab", workspace["vocab"], "--out", str(tmp_path / "a"),
        "--variant", "path@-30:30"])
    assert r.exit_code == 1


def test_train_uses_dataset_cache_on_second_run(runner, workspace, tmp_path):
    out2 = str(tmp_path / "m2")
    args = ["train", "--attribute", "site", "--corpus", workspace["corpus"],
            "--vocab", workspace["vocab"], "--out", out2, "--epochs", "1",
            "--batch-size", "8", "--n-folds", "5", "--train-folds", "1-3",
            "--dev-folds", "4", "--embed-dim", "16", "--gru-hidden", "12",
            "--word-attn-dim", "8", "--sent-attn-dim", "8"]
    r = runner.invoke(main, args)
    assert r.exit_code == 0, r.output
    cache_dir = os.path.join(workspace["corpus"], "cache")
    assert os.listdir(cache_dir)
    r2 = runner.invoke(main, args)
    assert r2.exit_code == 0
    assert "cache hit" in r2.output
