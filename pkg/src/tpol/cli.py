"""Command-line driver: every stage reads and writes artifacts under one output directory.

    tpol scan-gen --out runs/scan
    tpol split    --corpus runs/scan/corpus.jsonl --split scan-iid --remove-brackets --out runs/scan
    tpol align    --corpus runs/scan/split/train.jsonl --align ibm2 --iters 15 --out runs/scan
    tpol train    --corpus runs/scan/alignments.jsonl --out runs/scan
    tpol parse    --corpus runs/scan/split/test.jsonl --out runs/scan
    tpol eval     --corpus runs/scan/split/test.jsonl --out runs/scan
    tpol report   --reports runs/scan/eval.json --out runs/scan

Failures exit non-zero and print a JSON object with ``error``, ``module``
and ``message`` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpus_mod
from .align import corpus_alignment_error, derive_corpus
from .errors import ConfigError, MissingArtifact, TPolError
from .evaluation import (AlignmentErrorPoint, EvalReport, emit_report, evaluate, load_predictions, report_csv,
                         save_predictions)
from .ibm import IBMModel, align_corpus, train_ibm
from .reorderer import ReordererModel, train_reorderer
from .scan import CONSTANTS as SCAN_CONSTANTS, generate_scan
from .translator import Translator, dump_tags, train_translator

log = logging.getLogger("tpol")

SPLITS = ("question", "query", "length", "scan-iid", "scan-right", "scan-around-right")
SUBCOMMANDS = ("scan-gen", "split", "align", "train", "parse", "eval", "report")


@dataclass
class ExperimentConfig:
    corpus: str | None = None
    format: str = "jsonl"
    split: str = "question"
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    align: str = "gold"
    iters: int = 10
    k: int = 3
    min_support: int = 3
    min_precision: float = 0.7
    reorderer_mode: str = "gold"
    remove_brackets: bool = False
    lowercase: bool = False
    constants: str | None = None
    out: str = "tpol-out"
    limit: int | None = None
    label: str = "tpol"

    def __post_init__(self):
        self.ratios = tuple(float(r) for r in self.ratios)
        checks = {"format": ("jsonl", "tsv"), "split": SPLITS, "align": ("gold", "ibm1", "ibm2"),
                  "reorderer_mode": ("gold", "silver")}
        for key, allowed in checks.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {allowed}, got {getattr(self, key)!r}")
        if len(self.ratios) != 3 or abs(sum(self.ratios) - 1) > 1e-9:
            raise ConfigError(f"ratios must be three numbers summing to 1, got {self.ratios}")
        if self.iters < 1:
            raise ConfigError("iters must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["ratios"] = list(self.ratios)
        return doc

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config; flags override it")
    common.add_argument("--corpus")
    common.add_argument("--format", choices=("jsonl", "tsv"))
    common.add_argument("--split", choices=SPLITS)
    common.add_argument("--ratios", type=lambda s: tuple(float(x) for x in s.split(",")),
                        help="train,dev,test e.g. 0.8,0.1,0.1")
    common.add_argument("--seed", type=int)
    common.add_argument("--align", "--model", dest="align", choices=("gold", "ibm1", "ibm2"))
    common.add_argument("--iters", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--min-support", type=int)
    common.add_argument("--min-precision", type=float)
    common.add_argument("--reorderer-mode", choices=("gold", "silver"))
    common.add_argument("--remove-brackets", action="store_const", const=True)
    common.add_argument("--lowercase", action="store_const", const=True)
    common.add_argument("--constants", help="constant lexicon, one token per line")
    common.add_argument("--out")
    common.add_argument("--label", help="config name used in reports")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tpol", description="Translate-then-reorder semantic parsing toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("scan-gen", parents=[common], help="generate SCAN commands with programs")
    g.add_argument("--limit", type=int)
    sub.add_parser("split", parents=[common], help="write train/dev/test split manifests")
    sub.add_parser("align", parents=[common], help="train IBM model 1/2 and align a corpus")
    t = sub.add_parser("train", parents=[common], help="train translator and reorderer")
    t.add_argument("--component", choices=("all", "translator", "reorderer"), default="all")
    pp = sub.add_parser("parse", parents=[common], help="parse a corpus with trained models")
    pp.add_argument("--dump-tags", action="store_true", help="also write per-token tag decisions as TSV")
    e = sub.add_parser("eval", parents=[common], help="score predictions against gold MRs")
    e.add_argument("--predictions")
    r = sub.add_parser("report", parents=[common], help="collect eval reports into CSV/SVG")
    r.add_argument("--reports", nargs="*", default=[])
    r.add_argument("--points", help="JSON list of {config, partition, language, alignment_error, accuracy_drop}")
    r.add_argument("--formats", default="csv,svg")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if os.environ.get("TPOL_OUT"):
        doc["out"] = os.environ["TPOL_OUT"]
    try:
        return ExperimentConfig.from_dict(doc)
    except TypeError as err:
        raise ConfigError(str(err)) from None


# ---------------------------------------------------------------------------


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise MissingArtifact(f"{what} not found at {path}")
    return path


def _load(cfg: ExperimentConfig, path=None):
    path = path or cfg.corpus
    if path is None:
        raise ConfigError("--corpus is required")
    _require(Path(path), "corpus")
    return corpus_mod.load_corpus(path, cfg.format, cfg.remove_brackets, cfg.lowercase)


def _constants(cfg: ExperimentConfig, examples=()) -> frozenset[str]:
    if cfg.constants:
        return corpus_mod.load_constants(_require(Path(cfg.constants), "constant lexicon"))
    if any(e.language == "synthetic" for e in examples):
        return SCAN_CONSTANTS
    return frozenset()


def _ibm_name(cfg):
    return {"ibm1": "model1", "ibm2": "model2"}[cfg.align]


def _models_dir(out: Path) -> Path:
    return out / "models"


def cmd_scan_gen(cfg, args, out):
    data = generate_scan(args.limit if args.limit is not None else cfg.limit, cfg.seed)
    path = out / "corpus.jsonl"
    corpus_mod.save_corpus([e.to_aligned(cfg.remove_brackets) for e in data], path)
    return {"corpus": str(path), "count": len(data)}


def cmd_split(cfg, args, out):
    data = _load(cfg)
    split = corpus_mod.make_split(data, cfg.split.replace("-", "_"), cfg.ratios, cfg.seed, _constants(cfg, data))
    corpus_mod.write_split(split, out / "split")
    return {"split": str(out / "split"), **split.counts()}


def cmd_align(cfg, args, out):
    if cfg.align == "gold":
        raise ConfigError("align needs --align ibm1 or ibm2")
    data = _load(cfg)
    model = train_ibm([(e.nl, e.mr) for e in data], _ibm_name(cfg), cfg.iters, cfg.seed)
    model.save(out / "ibm_model.json")
    aligned = align_corpus(model, data)
    corpus_mod.save_corpus(aligned, out / "alignments.jsonl")
    result = {"model": str(out / "ibm_model.json"), "alignments": str(out / "alignments.jsonl"),
              "final_loglik": model.final_loglik}
    if all(e.aligned for e in data):
        result["alignment_error"] = corpus_alignment_error(aligned, data)
    return result


def _ensure_aligned(cfg, data, out):
    if all(e.aligned for e in data) and cfg.align == "gold":
        return data
    if cfg.align == "gold":
        missing = next(e.id for e in data if not e.aligned)
        raise MissingArtifact(f"record {missing!r} has no gold alignment; use --align ibm1/ibm2")
    model_path = out / "ibm_model.json"
    if model_path.exists():
        model = IBMModel.load(model_path)
    else:
        model = train_ibm([(e.nl, e.mr) for e in data], _ibm_name(cfg), cfg.iters, cfg.seed)
        model.save(model_path)
    return align_corpus(model, data)


def cmd_train(cfg, args, out):
    data = _ensure_aligned(cfg, _load(cfg), out)
    tpairs, rpairs = derive_corpus(data)
    models = _models_dir(out)
    models.mkdir(parents=True, exist_ok=True)
    written = {}
    translator = None
    if args.component in ("all", "translator"):
        translator = train_translator(tpairs, cfg.k, cfg.min_support, cfg.min_precision)
        translator.save(models)
        written["translator"] = str(models)
    if args.component in ("all", "reorderer"):
        if cfg.reorderer_mode == "silver" and translator is None:
            _require(models / "tagger.json", "trained translator (silver reorderer mode)")
            _require(models / "rules.json", "trained translator (silver reorderer mode)")
            translator = Translator.load(models)
        reorderer = train_reorderer(rpairs, cfg.reorderer_mode, translator, _constants(cfg, data))
        reorderer.save(models / "reorderer.json")
        written["reorderer"] = str(models / "reorderer.json")
        written["silver_skip_rate"] = reorderer.silver_skip_rate
    return written


def _load_models(out):
    models = _models_dir(out)
    for name in ("tagger.json", "rules.json", "reorderer.json"):
        _require(models / name, f"trained model {name}")
    return Translator.load(models), ReordererModel.load(models / "reorderer.json")


def cmd_parse(cfg, args, out):
    data = _load(cfg)
    translator, reorderer = _load_models(out)
    preds = [reorderer.reorder(translator.translate(e.nl)) for e in data]
    save_predictions(data, preds, out / "predictions.jsonl")
    result = {"predictions": str(out / "predictions.jsonl"), "count": len(preds)}
    if args.dump_tags:
        with (out / "tags.tsv").open("w", encoding="utf-8") as fh:
            fh.write("id\tposition\ttoken\ttag\tlevel\n")
            for e in data:
                for pos, tok, tag, level in dump_tags(e.nl, translator):
                    fh.write(f"{e.id}\t{pos}\t{tok}\t{tag}\t{level}\n")
        result["tags"] = str(out / "tags.tsv")
    return result


def cmd_eval(cfg, args, out):
    data = _load(cfg)
    if not all(e.aligned for e in data):
        _require(out / "ibm_model.json", "IBM model for aligning the evaluation corpus")
        data = align_corpus(IBMModel.load(out / "ibm_model.json"), data)
    translator, reorderer = _load_models(out)
    pred_path = Path(args.predictions) if args.predictions else out / "predictions.jsonl"
    by_id = load_predictions(_require(pred_path, "predictions"))
    missing = [e.id for e in data if e.id not in by_id]
    if missing:
        raise MissingArtifact(f"no prediction for record {missing[0]!r}")
    partition = Path(cfg.corpus).stem
    report = evaluate(data, translator, reorderer, [by_id[e.id] for e in data], cfg.label, partition)
    (out / "eval.json").write_text(json.dumps(report.to_json(), ensure_ascii=False, sort_keys=True) + "\n",
                                   encoding="utf-8")
    (out / "eval.csv").write_text(report_csv([report]), encoding="utf-8")
    return {"eval": str(out / "eval.json"), "exact_match": report.overall_exact_match,
            "mn_accuracy": report.mn_accuracy, "nmn_accuracy": report.nmn_accuracy,
            "translator_accuracy": report.translator_accuracy, "reorderer_accuracy": report.reorderer_accuracy}


def cmd_report(cfg, args, out):
    reports = [EvalReport.from_json(json.loads(_require(Path(p), "eval report").read_text(encoding="utf-8")))
               for p in args.reports]
    points = []
    if args.points:
        points = [AlignmentErrorPoint(**p) for p in json.loads(_require(Path(args.points), "points").read_text())]
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    written = emit_report(reports, out, formats, points)
    return {"files": [str(p) for p in written]}


COMMANDS = {"scan-gen": cmd_scan_gen, "split": cmd_split, "align": cmd_align, "train": cmd_train,
            "parse": cmd_parse, "eval": cmd_eval, "report": cmd_report}


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command](cfg, args, out)
        meta = {"subcommand": args.command, "config": cfg.to_dict(), "config_hash": cfg.digest(),
                "seed": cfg.seed, "outputs": result}
        (out / f"{args.command}.run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                                      encoding="utf-8")
    except TPolError as err:
        json.dump({"error": type(err).__name__, "module": err.module, "message": str(err)}, sys.stderr)
        sys.stderr.write("\n")
        return 2 if isinstance(err, ConfigError) else 1
    except ValueError as err:
        json.dump({"error": type(err).__name__, "module": "tpol", "message": str(err)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
