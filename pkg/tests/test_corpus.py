import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings

from tpol.corpus import (AlignedExample, BiSymbol, extract_template, load_corpus, load_constants, make_split,
                         read_split, remove_brackets, save_corpus, to_record, validate, write_split)
from tpol.errors import AlignmentViolation, IndexOutOfRange, InsufficientData, MalformedRecord
from tpol.toygeo import CONSTANTS as GEO_CONSTANTS, generate_geo

from conftest import aligned_examples


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path


BRACKETED = {
    "id": "b1",
    "nl": "which city has the highest population density ?",
    "mr": "answer ( largest ( density ( city ( all ) ) ) )",
    # answer=0 (=1 largest=2 (=3 density=4 (=5 city=6 (=7 all=8 )=9..12
    "bisymbols": [[0, 0], [1, 6], [2, None], [3, None], [4, 2], [5, None], [6, 4], [7, None],
                  [None, 8], [None, 1], [None, 3], [None, 5], [None, 7],
                  [None, 9], [None, 10], [None, 11], [None, 12]],
}


def test_remove_brackets_on_load(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [BRACKETED])
    (ex,) = load_corpus(path, remove_brackets=True)
    assert ex.mr == ("answer", "largest", "density", "city", "all")
    assert ex.bisymbols == (BiSymbol(0, 0), BiSymbol(1, 3), BiSymbol(2, None), BiSymbol(3, None),
                            BiSymbol(4, 1), BiSymbol(5, None), BiSymbol(6, 2), BiSymbol(7, None),
                            BiSymbol(None, 4))


def test_empty_sentence_is_malformed(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "e", "nl": [], "mr": [], "bisymbols": []}])
    with pytest.raises(MalformedRecord) as info:
        load_corpus(path)
    assert info.value.record_id == "e"


def test_repeated_source_index(tmp_path):
    rec = {"id": "dup", "nl": "a b c", "mr": "A B C", "bisymbols": [[0, 0], [2, 1], [2, 2], [1, None]]}
    with pytest.raises(AlignmentViolation) as info:
        load_corpus(write_jsonl(tmp_path / "c.jsonl", [rec]))
    assert "one-to-one" in info.value.which and info.value.record_id == "dup"


@pytest.mark.parametrize("bisymbols, error", [
    ([[0, 0], [1, 5]], IndexOutOfRange),
    ([[0, 0], [None, None], [1, 1]], AlignmentViolation),
    ([[0, 0]], AlignmentViolation),  # NL word 1 and MR word 1 uncovered
    ([[1, 1], [0, 0]], AlignmentViolation),  # sources out of order
])
def test_invariant_violations(tmp_path, bisymbols, error):
    rec = {"id": "x", "nl": "a b", "mr": "A B", "bisymbols": bisymbols}
    with pytest.raises(error):
        load_corpus(write_jsonl(tmp_path / "c.jsonl", [rec]))


def test_missing_field_and_bad_json(tmp_path):
    with pytest.raises(MalformedRecord):
        load_corpus(write_jsonl(tmp_path / "a.jsonl", [{"id": "m", "nl": "a"}]))
    (tmp_path / "b.jsonl").write_text("{not json\n")
    with pytest.raises(MalformedRecord):
        load_corpus(tmp_path / "b.jsonl")


def test_unaligned_records_load(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "u", "nl": "jump twice", "mr": "answer twice jump"}])
    (ex,) = load_corpus(path)
    assert ex.bisymbols is None and not ex.aligned


def test_tsv_format(tmp_path):
    path = tmp_path / "c.tsv"
    path.write_text("t1\ta b\tA\t0-0 1-_\tde\n")
    (ex,) = load_corpus(path, format="tsv", lowercase=True)
    assert ex.bisymbols == (BiSymbol(0, 0), BiSymbol(1, None)) and ex.language == "de"


@settings(max_examples=100, deadline=None)
@given(aligned_examples())
def test_serialize_roundtrip(tmp_path_factory, ex):
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    save_corpus([ex], path)
    assert load_corpus(path) == [ex]


@settings(max_examples=200, deadline=None)
@given(aligned_examples())
def test_bracket_removal_preserves_order(ex):
    rng = random.Random(len(ex.mr))
    mr = list(ex.mr)
    # sprinkle brackets into the MR and shift target indexes to match
    new_mr, remap = [], {}
    for j, tok in enumerate(mr):
        if rng.random() < 0.5:
            new_mr.append(rng.choice("()"))
        remap[j] = len(new_mr)
        new_mr.append(tok)
    new_mr.append(")")
    bis = [BiSymbol(s, None if t is None else remap[t]) for s, t in ex.bisymbols]
    bis += [BiSymbol(None, j) for j, tok in enumerate(new_mr) if tok in "()"]
    bracketed = validate(AlignedExample(ex.id, ex.nl, tuple(new_mr), tuple(bis), ex.language))
    stripped = validate(remove_brackets(bracketed))
    assert stripped == ex


def test_template_extraction():
    assert extract_template(["answer", "largest", "density", "city", "all"], set()).arity == 0
    t = extract_template(["answer", "population", "cityid", "austin"], {"austin"})
    assert t.tokens == ("answer", "population", "cityid", "CONST_1") and t.arity == 1
    t = extract_template(["answer", "len", "riverid", "colorado", "colorado"], {"colorado"})
    assert t.tokens[-2:] == ("CONST_1", "CONST_2") and t.arity == 2


def test_load_constants(tmp_path):
    (tmp_path / "lex.txt").write_text("austin\n# comment\n\ntexas\n")
    assert load_constants(tmp_path / "lex.txt") == {"austin", "texas"}


def _ex(i, mr, nl="q"):
    return AlignedExample(f"e{i:02d}", tuple(nl.split()), tuple(mr.split()))


def test_query_split_greedy_groups():
    data = [_ex(i, "answer city loc_2 c%d" % i) for i in range(7)] + [_ex(7 + i, "answer river c%d" % i) for i in range(3)]
    constants = {f"c{i}" for i in range(7)}
    split = make_split(data, "query", (0.7, 0.0, 0.3), seed=1, constants=constants)
    assert {e.id for e in split.test} == {"e07", "e08", "e09"}
    assert len(split.train) == 7 and split.dev == []


def test_length_split_takes_longest():
    data = [_ex(0, " ".join(["x"] * 9)), _ex(1, "a b c d e"), _ex(2, "a b c d f"), _ex(3, "a b c")]
    split = make_split(data, "length", (0.75, 0.0, 0.25), seed=0)
    assert [e.id for e in split.test] == ["e00"]


def test_question_split_deterministic():
    data = generate_geo(100, seed=3)
    a = make_split(data, "question", (0.8, 0.1, 0.1), seed=11)
    b = make_split(list(reversed(data)), "question", (0.8, 0.1, 0.1), seed=11)
    assert [e.id for e in a.test] == [e.id for e in b.test]
    assert [e.id for e in a.train] == [e.id for e in b.train]


@pytest.mark.parametrize("strategy", ["question", "query", "length"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_split_partitions_dataset(strategy, seed):
    data = generate_geo(300, seed=seed)
    split = make_split(data, strategy, (0.7, 0.1, 0.2), seed, GEO_CONSTANTS)
    ids = [e.id for part in (split.train, split.dev, split.test) for e in part]
    assert Counter(ids) == Counter(e.id for e in data)
    if strategy == "query":
        train_t = {extract_template(e.mr, GEO_CONSTANTS) for e in split.train}
        test_t = {extract_template(e.mr, GEO_CONSTANTS) for e in split.test}
        assert not train_t & test_t
    if strategy == "length":
        assert min(len(e.mr) for e in split.test) >= max(len(e.mr) for e in split.train + split.dev)


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        make_split([], "question", (0.8, 0.1, 0.1))
    with pytest.raises(InsufficientData):
        make_split([_ex(0, "a")], "question", (0.5, 0.0, 0.5))


def test_split_manifest_roundtrip(tmp_path):
    data = generate_geo(60)
    split = make_split(data, "question", (0.8, 0.1, 0.1), seed=5)
    write_split(split, tmp_path)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta == {"strategy": "question", "seed": 5, "ratios": [0.8, 0.1, 0.1],
                    "counts": {"train": 48, "dev": 6, "test": 6}}
    back = read_split(tmp_path)
    assert [e.id for e in back.test] == [e.id for e in split.test]


def test_record_shape(geo_example):
    rec = to_record(geo_example)
    assert set(rec) == {"id", "nl", "mr", "bisymbols", "language"}
    assert rec["bisymbols"][-1] == [None, 4]
