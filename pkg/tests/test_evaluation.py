import csv
import io
import random
from fractions import Fraction

import pytest

from tpol.align import derive_corpus
from tpol.corpus import AlignedExample, BiSymbol
from tpol.errors import LengthMismatch, MissingAlignment
from tpol.evaluation import (AlignmentErrorPoint, CSV_HEADER, EvalReport, accuracy_drop, breakdown_monotonic,
                             emit_report, evaluate, exact_match, load_predictions, module_breakdown, parse,
                             parse_with, save_predictions)
from tpol.reorderer import train_reorderer
from tpol.translator import train_translator

from conftest import make_example


class Lookup:
    """Stub module answering from a table (identity when absent)."""

    def __init__(self, table=None):
        self.table = table or {}

    def translate(self, x):
        return list(self.table.get(tuple(x), x))

    def reorder(self, z):
        return list(self.table.get(tuple(z), z))


def test_parse_worked_example(geo_example):
    tpairs, rpairs = derive_corpus([geo_example] * 3)
    translator, reorderer = train_translator(tpairs), train_reorderer(rpairs)
    assert parse(list(geo_example.nl), translator.tagger, translator.rules, reorderer) == list(geo_example.mr)
    assert parse_with(list(geo_example.nl), translator, reorderer) == list(geo_example.mr)


def test_exact_match_values():
    gold = [["a", "b"], ["c"], ["d"], ["e"]]
    assert exact_match(gold, gold) == 1.0
    assert exact_match([["a", "b"], ["c"], ["d"], ["x"]], gold) == 0.75
    assert exact_match([["b", "a"], ["c"], ["d"], ["e"]], gold) == 0.75
    with pytest.raises(LengthMismatch):
        exact_match(gold[:3], gold)


def mono(i):
    return AlignedExample(f"m{i}", ("a", "b"), ("A", "B"), (BiSymbol(0, 0), BiSymbol(1, 1)))


def cross(i):
    return AlignedExample(f"n{i}", ("a", "b"), ("B", "A"), (BiSymbol(0, 1), BiSymbol(1, 0)))


def test_all_monotonic_has_no_nmn():
    examples = [mono(i) for i in range(3)]
    mn, nmn = breakdown_monotonic([list(e.mr) for e in examples], examples)
    assert mn.accuracy == 1.0 and nmn.count == 0 and nmn.accuracy is None
    report = evaluate(examples, Lookup(), Lookup(), modules=False)
    rows = {r[3]: r for r in report.metric_rows()}
    assert rows["nmn_accuracy"][4] is None and rows["nmn_accuracy"][5] == 0


def test_breakdown_hand_tally():
    examples = [mono(0), mono(1), cross(0), cross(1)]
    preds = [["A", "B"], ["B", "A"], ["B", "A"], ["A", "B"]]
    mn, nmn = breakdown_monotonic(preds, examples)
    assert (mn.correct, mn.count, nmn.correct, nmn.count) == (1, 2, 1, 2)


def test_overall_is_weighted_mean_of_classes():
    rng = random.Random(8)
    examples = [make_example(rng, rng.randint(1, 5), rng.randint(1, 5), ident=f"e{i}") for i in range(200)]
    preds = [list(e.mr) if rng.random() < 0.6 else ["wrong"] for e in examples]
    report = evaluate(examples, Lookup(), Lookup(), predictions=preds, modules=False)
    mn, nmn = report.mn, report.nmn
    weighted = (Fraction(mn.correct, mn.count) * mn.count + Fraction(nmn.correct, nmn.count) * nmn.count) \
        / (mn.count + nmn.count)
    assert Fraction(report.correct, report.count) == weighted
    assert report.overall_exact_match == pytest.approx(float(weighted), abs=1e-15)


def test_module_breakdown_isolates_modules():
    examples = [cross(0), cross(1)]
    # translator perfect (gold z = "A B" after monotonicizing), reorderer broken
    t_acc, r_acc = module_breakdown(examples, Lookup({("a", "b"): ("A", "B")}), Lookup())
    assert (t_acc, r_acc) == (1.0, 0.0)
    # reorderer perfect on gold z, translator broken
    t_acc, r_acc = module_breakdown(examples, Lookup(), Lookup({("A", "B"): ("B", "A")}))
    assert (t_acc, r_acc) == (0.0, 1.0)


def test_missing_alignment():
    ex = AlignedExample("u", ("a",), ("A",))
    with pytest.raises(MissingAlignment) as info:
        evaluate([ex], Lookup(), Lookup())
    assert info.value.record_id == "u"


def test_accuracy_drop():
    gold = evaluate([mono(0), mono(1)], Lookup(), Lookup(), predictions=[["A", "B"]] * 2, modules=False)
    auto = evaluate([mono(0), mono(1)], Lookup(), Lookup(), predictions=[["A", "B"], ["x"]], modules=False)
    assert accuracy_drop(gold, auto) == 0.5


def test_empty_report_is_header_only(tmp_path):
    (path,) = emit_report([], tmp_path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def small_reports():
    out = []
    for cfg in ("gold", "auto"):
        preds = [["A", "B"], ["B", "A"]] if cfg == "gold" else [["A", "B"], ["A", "B"]]
        out.append(evaluate([mono(0), cross(0)], Lookup(), Lookup(), predictions=preds, config=cfg, modules=False))
    return out


def test_csv_rows_per_config_and_metric(tmp_path):
    metrics = ("exact_match", "mn_accuracy", "nmn_accuracy")
    emit_report(small_reports(), tmp_path, metrics=metrics)
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert len(rows) == 6
    assert {(r["config"], r["metric"]) for r in rows} == {(c, m) for c in ("gold", "auto") for m in metrics}
    auto_em = next(r for r in rows if r["config"] == "auto" and r["metric"] == "exact_match")
    assert auto_em["value"] == "0.500000" and auto_em["count"] == "2"


def test_svg_points_and_determinism(tmp_path):
    points = [AlignmentErrorPoint("ibm2", "question", "en", 0.31, 0.22),
              AlignmentErrorPoint("ibm2", "query", "en", 0.35, 0.18)]
    a, b = tmp_path / "a", tmp_path / "b"
    emit_report(small_reports(), a, formats=("csv", "svg"), points=points)
    emit_report(small_reports(), b, formats=("csv", "svg"), points=points)
    scatter = (a / "alignment_error.svg").read_text()
    assert scatter.count('<circle class="point"') == 2
    for name in ("report.csv", "report.svg", "alignment_error.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_report_json_roundtrip():
    rep = small_reports()[1]
    assert EvalReport.from_json(rep.to_json()) == rep


def test_predictions_roundtrip(tmp_path):
    examples = [mono(0), cross(0)]
    save_predictions(examples, [["A", "B"], ["B"]], tmp_path / "p.jsonl")
    assert load_predictions(tmp_path / "p.jsonl") == {"m0": ["A", "B"], "n0": ["B"]}
