import json
import subprocess
import sys

import pytest

from tpol.cli import ExperimentConfig, run
from tpol.corpus import save_corpus
from tpol.errors import ConfigError
from tpol.toygeo import CONSTANTS, generate_geo


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def geo_files(tmp_path):
    save_corpus(generate_geo(240, seed=1), tmp_path / "geo.jsonl")
    (tmp_path / "lex.txt").write_text("\n".join(sorted(CONSTANTS)) + "\n")
    return tmp_path


def pipeline(capsys, base, out, align="gold"):
    steps = [
        ["split", "--corpus", base / "geo.jsonl", "--split", "question", "--ratios", "0.8,0.1,0.1", "--seed", 3],
        ["train", "--corpus", out / "split/train.jsonl", "--constants", base / "lex.txt", "--align", align],
        ["parse", "--corpus", out / "split/test.jsonl", "--dump-tags"],
        ["eval", "--corpus", out / "split/test.jsonl", "--label", align],
    ]
    for step in steps:
        code, stdout, err = call(capsys, *step, "--out", out)
        assert code == 0, err
    return json.loads(stdout)


def test_gold_pipeline(capsys, geo_files):
    out = geo_files / "run"
    result = pipeline(capsys, geo_files, out)
    assert result["exact_match"] > 0.5
    for name in ("split/meta.json", "models/tagger.json", "models/rules.json", "models/reorderer.json",
                 "predictions.jsonl", "tags.tsv", "eval.json", "eval.csv", "train.run.json"):
        assert (out / name).exists(), name
    meta = json.loads((out / "eval.run.json").read_text())
    assert meta["subcommand"] == "eval" and len(meta["config_hash"]) == 64
    assert (out / "tags.tsv").read_text().startswith("id\tposition\ttoken\ttag\tlevel\n")

    code, stdout, _ = call(capsys, "report", "--reports", out / "eval.json", "--out", out / "rep")
    assert code == 0
    assert (out / "rep/report.csv").read_text().startswith("config,partition,language,metric,value,count\n")
    assert (out / "rep/report.svg").exists()


def test_reruns_are_byte_identical(capsys, geo_files):
    pipeline(capsys, geo_files, geo_files / "a")
    pipeline(capsys, geo_files, geo_files / "b")
    for name in ("split/test.jsonl", "models/tagger.json", "models/rules.json", "models/reorderer.json",
                 "predictions.jsonl", "eval.json"):
        assert (geo_files / "a" / name).read_bytes() == (geo_files / "b" / name).read_bytes(), name


def test_scan_pipeline_with_ibm(capsys, tmp_path):
    out = tmp_path / "scan"
    steps = [
        ["scan-gen", "--limit", 400, "--seed", 1],
        ["split", "--corpus", out / "corpus.jsonl", "--split", "scan-iid", "--remove-brackets"],
        ["align", "--corpus", out / "split/train.jsonl", "--align", "ibm2", "--iters", 5],
        ["train", "--corpus", out / "alignments.jsonl"],
        ["parse", "--corpus", out / "split/test.jsonl"],
        ["eval", "--corpus", out / "split/test.jsonl"],
    ]
    for step in steps:
        code, stdout, err = call(capsys, *step, "--out", out)
        assert code == 0, (step[0], err)
    ibm = json.loads((out / "ibm_model.json").read_text())
    # model 1 warm-up, model 2 iterations, then the final value
    assert ibm["model"] == "model2" and len(ibm["loglik"]) == 5 + 5 + 1
    assert 0.0 <= json.loads(stdout)["exact_match"] <= 1.0


def test_config_file_and_flag_precedence(capsys, geo_files, monkeypatch):
    cfg = geo_files / "cfg.json"
    cfg.write_text(json.dumps({"corpus": str(geo_files / "geo.jsonl"), "split": "length", "seed": 9,
                               "out": str(geo_files / "from_config")}))
    code, _, err = call(capsys, "split", "--config", cfg, "--seed", 4)
    assert code == 0, err
    meta = json.loads((geo_files / "from_config/split/meta.json").read_text())
    assert meta["strategy"] == "length" and meta["seed"] == 4

    monkeypatch.setenv("TPOL_OUT", str(geo_files / "from_env"))
    assert call(capsys, "split", "--config", cfg)[0] == 0
    assert (geo_files / "from_env/split/meta.json").exists()


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus": "x", "learning_rate": 0.1}))
    code, _, err = call(capsys, "split", "--config", cfg, "--out", tmp_path)
    assert code == 2
    doc = json.loads(err)
    assert doc["error"] == "ConfigError" and "learning_rate" in doc["message"]
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"ratios": [0.5, 0.5, 0.5]})


def test_silver_without_translator(capsys, geo_files):
    out = geo_files / "silver"
    call(capsys, "split", "--corpus", geo_files / "geo.jsonl", "--out", out)
    code, _, err = call(capsys, "train", "--component", "reorderer", "--reorderer-mode", "silver",
                        "--corpus", out / "split/train.jsonl", "--out", out)
    assert code == 1
    assert json.loads(err)["error"] == "MissingArtifact"


def test_silver_after_translator(capsys, geo_files):
    out = geo_files / "silver2"
    call(capsys, "split", "--corpus", geo_files / "geo.jsonl", "--out", out)
    code, stdout, err = call(capsys, "train", "--reorderer-mode", "silver", "--corpus", out / "split/train.jsonl",
                             "--out", out)
    assert code == 0, err
    assert 0.0 <= json.loads(stdout)["silver_skip_rate"] <= 1.0


def test_malformed_corpus_reports_module(capsys, tmp_path):
    (tmp_path / "bad.jsonl").write_text('{"id": "z", "nl": "a", "mr": "A", "bisymbols": [[0, 3]]}\n')
    code, _, err = call(capsys, "split", "--corpus", tmp_path / "bad.jsonl", "--out", tmp_path)
    assert code == 1
    doc = json.loads(err)
    assert doc["error"] == "IndexOutOfRange" and doc["module"] == "corpus"


def test_unaligned_training_needs_ibm(capsys, tmp_path):
    out = tmp_path / "s"
    call(capsys, "scan-gen", "--limit", 50, "--out", out)
    code, _, err = call(capsys, "train", "--corpus", out / "corpus.jsonl", "--out", out)
    assert code == 1 and json.loads(err)["error"] == "MissingArtifact"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tpol", "scan-gen", "--limit", "5", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["count"] == 5
