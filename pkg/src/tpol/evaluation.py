"""End-to-end parsing, exact-match metrics, breakdowns and report files."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .align import crossing_count, monotonicize
from .corpus import AlignedExample
from .errors import LengthMismatch, MissingAlignment
from .reorderer import ReordererModel, reorder
from .translator import InsertionRuleSet, TaggerModel, translate

CSV_HEADER = ("config", "partition", "language", "metric", "value", "count")
METRICS = ("exact_match", "mn_accuracy", "nmn_accuracy", "translator_accuracy", "reorderer_accuracy")


class MonotonicTranslator(Protocol):
    def translate(self, x: Sequence[str]) -> list[str]: ...


class Reorderer(Protocol):
    def reorder(self, z: Sequence[str]) -> list[str]: ...


def parse(x: Sequence[str], tagger: TaggerModel, rules: InsertionRuleSet, reorderer: ReordererModel) -> list[str]:
    return reorder(translate(x, tagger, rules), reorderer)


def parse_with(x: Sequence[str], translator: MonotonicTranslator, reorderer: Reorderer) -> list[str]:
    """Two-step parse through any translator/reorderer pair."""
    return list(reorderer.reorder(translator.translate(x)))


def exact_match(predictions: Sequence[Sequence[str]], golds: Sequence[Sequence[str]]) -> float:
    if len(predictions) != len(golds):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(golds)} gold MRs")
    if not golds:
        return 0.0
    return sum(tuple(p) == tuple(g) for p, g in zip(predictions, golds)) / len(golds)


@dataclass
class ClassAccuracy:
    correct: int
    count: int

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.count if self.count else None


def _gold_alignment(ex: AlignedExample):
    if ex.bisymbols is None:
        raise MissingAlignment(ex.id)
    return ex.bisymbols


def breakdown_monotonic(predictions: Sequence[Sequence[str]],
                        examples: Sequence[AlignedExample]) -> tuple[ClassAccuracy, ClassAccuracy]:
    """Accuracy on examples whose gold alignment has no crossings (MN) and on the rest (NMN)."""
    if len(predictions) != len(examples):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(examples)} examples")
    mn, nmn = ClassAccuracy(0, 0), ClassAccuracy(0, 0)
    for pred, ex in zip(predictions, examples):
        cls = mn if crossing_count(_gold_alignment(ex)) == 0 else nmn
        cls.count += 1
        cls.correct += tuple(pred) == ex.mr
    return mn, nmn


def module_breakdown(examples: Sequence[AlignedExample], translator: MonotonicTranslator,
                     reorderer: Reorderer) -> tuple[float, float]:
    """(translator accuracy against gold z, reorderer accuracy when fed gold z)."""
    gold_z = [monotonicize(ex).z if _gold_alignment(ex) else () for ex in examples]
    t_acc = exact_match([translator.translate(ex.nl) for ex in examples], gold_z)
    r_acc = exact_match([reorderer.reorder(z) for z in gold_z], [ex.mr for ex in examples])
    return t_acc, r_acc


@dataclass
class EvalReport:
    overall_exact_match: float
    correct: int
    count: int
    mn: ClassAccuracy
    nmn: ClassAccuracy
    translator_accuracy: float | None = None
    reorderer_accuracy: float | None = None
    per_example: list[dict] = field(default_factory=list)
    config: str = "tpol"
    partition: str = "test"
    language: str = "en"

    @property
    def mn_accuracy(self) -> float | None:
        return self.mn.accuracy

    @property
    def nmn_accuracy(self) -> float | None:
        return self.nmn.accuracy

    @property
    def exact_match(self) -> float:
        return self.overall_exact_match

    def metric_rows(self, metrics: Sequence[str] = METRICS) -> list[tuple]:
        counts = {"exact_match": self.count, "mn_accuracy": self.mn.count, "nmn_accuracy": self.nmn.count,
                  "translator_accuracy": self.count, "reorderer_accuracy": self.count}
        rows = []
        for metric in metrics:
            value = getattr(self, metric)
            if value is None and metric in ("translator_accuracy", "reorderer_accuracy"):
                continue
            rows.append((self.config, self.partition, self.language, metric, value, counts[metric]))
        return rows

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["mn_accuracy"], doc["nmn_accuracy"] = self.mn_accuracy, self.nmn_accuracy
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "EvalReport":
        doc = {k: v for k, v in doc.items() if k not in ("mn_accuracy", "nmn_accuracy")}
        doc["mn"], doc["nmn"] = ClassAccuracy(**doc["mn"]), ClassAccuracy(**doc["nmn"])
        return cls(**doc)


def evaluate(examples: Sequence[AlignedExample], translator: MonotonicTranslator, reorderer: Reorderer,
             predictions: Sequence[Sequence[str]] | None = None, config: str = "tpol",
             partition: str = "test", modules: bool = True) -> EvalReport:
    """Score a test set; runs the parser unless ``predictions`` are supplied.

    MN/NMN and module breakdowns need gold alignments on every example.
    """
    if predictions is None:
        predictions = [parse_with(ex.nl, translator, reorderer) for ex in examples]
    if len(predictions) != len(examples):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(examples)} examples")
    mn, nmn = breakdown_monotonic(predictions, examples)
    correct = mn.correct + nmn.correct
    count = mn.count + nmn.count
    t_acc = r_acc = None
    if modules:
        t_acc, r_acc = module_breakdown(examples, translator, reorderer)
    per_example = [{"id": ex.id, "prediction": list(p), "correct": tuple(p) == ex.mr,
                    "monotonic": crossing_count(ex.bisymbols) == 0}
                   for ex, p in zip(examples, predictions)]
    language = examples[0].language if examples else "en"
    return EvalReport(correct / count if count else 0.0, correct, count, mn, nmn, t_acc, r_acc, per_example,
                      config, partition, language)


@dataclass(frozen=True)
class AlignmentErrorPoint:
    config: str
    partition: str
    language: str
    alignment_error: float
    accuracy_drop: float


def accuracy_drop(gold_report: EvalReport, auto_report: EvalReport, metric: str = "exact_match") -> float:
    """Metric with gold alignments minus the same metric with automatic alignments."""
    return getattr(gold_report, metric) - getattr(auto_report, metric)


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def report_csv(reports: Sequence[EvalReport], metrics: Sequence[str] = METRICS,
               points: Sequence[AlignmentErrorPoint] = ()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in reports:
        for row in rep.metric_rows(metrics):
            writer.writerow([_fmt(v) for v in row])
    for p in points:
        writer.writerow([p.config, p.partition, p.language, "alignment_error", _fmt(p.alignment_error), 1])
        writer.writerow([p.config, p.partition, p.language, "accuracy_drop", _fmt(p.accuracy_drop), 1])
    return buf.getvalue()


def _svg(width, height, body: list[str]) -> str:
    return "\n".join([f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
                      f'viewBox="0 0 {width} {height}">',
                      f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>', *body, "</svg>", ""])


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def bar_chart_svg(reports: Sequence[EvalReport], metrics: Sequence[str] = METRICS) -> str:
    rows = [r for rep in reports for r in rep.metric_rows(metrics) if r[4] is not None]
    bar, gap, left, top = 18, 6, 260, 20
    height = top * 2 + max(len(rows), 1) * (bar + gap)
    width = left + 320
    body = []
    for k, (config, partition, language, metric, value, _) in enumerate(rows):
        y = top + k * (bar + gap)
        body.append(f'<text x="{left - 6}" y="{y + bar - 5}" font-size="11" text-anchor="end">'
                    f'{_esc(f"{config}/{partition}/{language} {metric}")}</text>')
        body.append(f'<rect class="bar" x="{left}" y="{y}" width="{300 * value:.2f}" height="{bar}" fill="#4477aa"/>')
        body.append(f'<text x="{left + 300 * value + 4:.2f}" y="{y + bar - 5}" font-size="11">{value:.3f}</text>')
    return _svg(width, height, body)


def scatter_svg(points: Sequence[AlignmentErrorPoint]) -> str:
    """Alignment error (x) against accuracy drop (y), one circle per point."""
    width, height, pad = 420, 320, 50
    xs = [p.alignment_error for p in points] or [0.0]
    ys = [p.accuracy_drop for p in points] or [0.0]
    x_hi = max(max(xs), 1e-9)
    y_lo, y_hi = min(min(ys), 0.0), max(max(ys), 1e-9)

    def sx(v):
        return pad + (width - 2 * pad) * v / x_hi

    def sy(v):
        return height - pad - (height - 2 * pad) * (v - y_lo) / (y_hi - y_lo)

    body = [f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
            f'<text x="{width / 2}" y="{height - 12}" font-size="12" text-anchor="middle">alignment error</text>',
            f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})" '
            f'text-anchor="middle">accuracy drop</text>']
    for p in points:
        body.append(f'<circle class="point" cx="{sx(p.alignment_error):.2f}" cy="{sy(p.accuracy_drop):.2f}" r="4" '
                    f'fill="#cc6677"><title>{_esc(f"{p.config}/{p.partition}/{p.language}")}</title></circle>')
    return _svg(width, height, body)


def emit_report(reports: Sequence[EvalReport], out_dir, formats: Sequence[str] = ("csv",),
                points: Sequence[AlignmentErrorPoint] = (), metrics: Sequence[str] = METRICS) -> list[Path]:
    """Write ``report.csv`` and, with ``svg`` in formats, ``report.svg`` / ``alignment_error.svg``.

    Output bytes depend only on the inputs.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out_dir / "report.csv"
        path.write_text(report_csv(reports, metrics, points), encoding="utf-8")
        written.append(path)
    if "svg" in formats:
        path = out_dir / "report.svg"
        path.write_text(bar_chart_svg(reports, metrics), encoding="utf-8")
        written.append(path)
        if points:
            path = out_dir / "alignment_error.svg"
            path.write_text(scatter_svg(points), encoding="utf-8")
            written.append(path)
    return written


def save_predictions(examples: Sequence[AlignedExample], predictions: Sequence[Sequence[str]], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for ex, pred in zip(examples, predictions):
            fh.write(json.dumps({"id": ex.id, "nl": list(ex.nl), "prediction": list(pred)}, ensure_ascii=False) + "\n")


def load_predictions(path) -> dict[str, list[str]]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out[rec["id"]] = rec["prediction"]
    return out
