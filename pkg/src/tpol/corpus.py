"""Aligned corpora: data model, JSONL/TSV loading, MR templates and splits.

A corpus record pairs an NL sentence with its MR and an ordered list of
bi-symbols.  Each bi-symbol is a pair of token indexes ``(src, tgt)`` where
either side may be ``None`` (an epsilon): ``(i, None)`` deletes NL word ``i``
and ``(None, j)`` inserts MR word ``j``.
"""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import AlignmentViolation, IndexOutOfRange, InsufficientData, MalformedRecord

LANGUAGES = ("en", "it", "de", "synthetic")
BRACKETS = frozenset({"(", ")"})
STRATEGIES = ("question", "query", "length", "scan_iid", "scan_right", "scan_around_right")


class BiSymbol(NamedTuple):
    src: int | None
    tgt: int | None


@dataclass(frozen=True)
class AlignedExample:
    id: str
    nl: tuple[str, ...]
    mr: tuple[str, ...]
    bisymbols: tuple[BiSymbol, ...] | None = None
    language: str = "en"

    @property
    def aligned(self) -> bool:
        return self.bisymbols is not None

    def with_alignment(self, bisymbols: Iterable[BiSymbol]) -> "AlignedExample":
        ex = AlignedExample(self.id, self.nl, self.mr, tuple(BiSymbol(*b) for b in bisymbols), self.language)
        validate(ex)
        return ex


@dataclass(frozen=True)
class Template:
    tokens: tuple[str, ...]
    arity: int


@dataclass
class SplitDataset:
    train: list[AlignedExample]
    dev: list[AlignedExample]
    test: list[AlignedExample]
    strategy: str
    seed: int
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    meta: dict = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {"train": len(self.train), "dev": len(self.dev), "test": len(self.test)}


# ---------------------------------------------------------------------------
# validation and normalization


def validate(ex: AlignedExample) -> AlignedExample:
    """Check the one-to-one, total-coverage and ordering invariants.

    Raises MalformedRecord, AlignmentViolation or IndexOutOfRange; returns the
    example unchanged so it can be used inline.
    """
    if not ex.nl or not ex.mr:
        raise MalformedRecord(ex.id, "empty sentence" if not ex.nl else "empty meaning representation")
    if ex.language not in LANGUAGES:
        raise MalformedRecord(ex.id, f"unknown language tag {ex.language!r}")
    if ex.bisymbols is None:
        return ex
    n, m = len(ex.nl), len(ex.mr)
    seen_src, seen_tgt = set(), set()
    last_src = -1
    for s, t in ex.bisymbols:
        if s is None and t is None:
            raise AlignmentViolation(ex.id, "no (eps, eps) bi-symbol")
        if s is not None:
            if not 0 <= s < n:
                raise IndexOutOfRange(ex.id, f"source {s} not in [0, {n})")
            if s in seen_src:
                raise AlignmentViolation(ex.id, "one-to-one (source index repeated)")
            if s <= last_src:
                raise AlignmentViolation(ex.id, "increasing source order")
            seen_src.add(s)
            last_src = s
        if t is not None:
            if not 0 <= t < m:
                raise IndexOutOfRange(ex.id, f"target {t} not in [0, {m})")
            if t in seen_tgt:
                raise AlignmentViolation(ex.id, "one-to-one (target index repeated)")
            seen_tgt.add(t)
    if len(seen_src) != n:
        raise AlignmentViolation(ex.id, "source coverage")
    if len(seen_tgt) != m:
        raise AlignmentViolation(ex.id, "target coverage")
    return ex


def remove_brackets(ex: AlignedExample) -> AlignedExample:
    """Drop ``(``/``)`` MR tokens and remap bi-symbol targets onto the compacted MR."""
    keep = [j for j, tok in enumerate(ex.mr) if tok not in BRACKETS]
    if len(keep) == len(ex.mr):
        return ex
    remap = {old: new for new, old in enumerate(keep)}
    bisymbols = None
    if ex.bisymbols is not None:
        bisymbols = []
        for s, t in ex.bisymbols:
            if t is not None and t not in remap:
                if s is None:
                    continue
                bisymbols.append(BiSymbol(s, None))
            else:
                bisymbols.append(BiSymbol(s, None if t is None else remap[t]))
        bisymbols = tuple(bisymbols)
    return AlignedExample(ex.id, ex.nl, tuple(ex.mr[j] for j in keep), bisymbols, ex.language)


def normalize(ex: AlignedExample, remove_brackets_: bool = False, lowercase: bool = False) -> AlignedExample:
    if lowercase:
        ex = AlignedExample(ex.id, tuple(t.lower() for t in ex.nl), ex.mr, ex.bisymbols, ex.language)
    if remove_brackets_:
        ex = remove_brackets(ex)
    return ex


# ---------------------------------------------------------------------------
# serialization


def _tokens(value, rid, name) -> tuple[str, ...]:
    if isinstance(value, str):
        return tuple(value.split())
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise MalformedRecord(rid, f"field {name!r} must be a string or list of strings")


def from_record(rec: dict, lineno: int | None = None) -> AlignedExample:
    """Build (but do not validate) an example from a decoded JSON record."""
    if not isinstance(rec, dict):
        raise MalformedRecord(lineno, "record is not an object")
    rid = rec.get("id", lineno)
    for key in ("nl", "mr"):
        if key not in rec:
            raise MalformedRecord(rid, f"missing field {key!r}")
    raw = rec.get("bisymbols")
    bisymbols = None
    if raw:
        try:
            bisymbols = tuple(BiSymbol(s, t) for s, t in raw)
        except (TypeError, ValueError):
            raise MalformedRecord(rid, "bisymbols must be [src|null, tgt|null] pairs") from None
        for b in bisymbols:
            if any(v is not None and (not isinstance(v, int) or isinstance(v, bool)) for v in b):
                raise MalformedRecord(rid, "bi-symbol indexes must be integers or null")
    return AlignedExample(
        id=str(rid),
        nl=_tokens(rec["nl"], rid, "nl"),
        mr=_tokens(rec["mr"], rid, "mr"),
        bisymbols=bisymbols,
        language=rec.get("language", "en"),
    )


def to_record(ex: AlignedExample) -> dict:
    return {
        "id": ex.id,
        "nl": list(ex.nl),
        "mr": list(ex.mr),
        "bisymbols": None if ex.bisymbols is None else [[s, t] for s, t in ex.bisymbols],
        "language": ex.language,
    }


def _parse_tsv_line(line: str, lineno: int) -> dict:
    # id <TAB> nl <TAB> mr [<TAB> bisymbols [<TAB> language]]; bisymbols as "s-t" with "_" for eps
    cols = line.split("\t")
    if len(cols) < 3:
        raise MalformedRecord(lineno, "expected at least 3 tab-separated columns")
    rec = {"id": cols[0], "nl": cols[1], "mr": cols[2]}
    if len(cols) > 3 and cols[3].strip():
        pairs = []
        for item in cols[3].split():
            try:
                s, t = item.split("-")
                pairs.append([None if s == "_" else int(s), None if t == "_" else int(t)])
            except ValueError:
                raise MalformedRecord(cols[0], f"bad bi-symbol {item!r}") from None
        rec["bisymbols"] = pairs
    if len(cols) > 4 and cols[4].strip():
        rec["language"] = cols[4].strip()
    return rec


def load_corpus(path, format: str = "jsonl", remove_brackets: bool = False,
                lowercase: bool = False) -> list[AlignedExample]:
    """Read, normalize and validate a corpus file.

    Validation failures abort with the offending record id.
    """
    path = Path(path)
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown corpus format {format!r}")
    examples = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if format == "jsonl":
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as err:
                    raise MalformedRecord(lineno, f"invalid JSON: {err.msg}") from None
            else:
                rec = _parse_tsv_line(line, lineno)
            ex = from_record(rec, lineno)
            if ex.bisymbols is not None:
                validate(ex)
            ex = normalize(ex, remove_brackets, lowercase)
            examples.append(validate(ex))
    return examples


def save_corpus(examples: Iterable[AlignedExample], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(to_record(ex), ensure_ascii=False) + "\n")


def load_constants(path) -> frozenset[str]:
    """Constant lexicon: one token per line, blank lines and ``#`` comments skipped."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(ln.strip() for ln in fh if ln.strip() and not ln.startswith("#"))


# ---------------------------------------------------------------------------
# templates and splits


def extract_template(mr: Sequence[str], constants: Iterable[str] = ()) -> Template:
    constants = constants if isinstance(constants, (set, frozenset)) else frozenset(constants)
    out, k = [], 0
    for tok in mr:
        if tok in constants:
            k += 1
            out.append(f"CONST_{k}")
        else:
            out.append(tok)
    return Template(tuple(out), k)


def _cut(n: int, ratio: float) -> int:
    return int(math.floor(n * ratio + 0.5))


def _check_ratios(ratios) -> tuple[float, float, float]:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    return ratios


def _finish(train, dev, test, strategy, seed, ratios) -> SplitDataset:
    names = ("train", "dev", "test")
    for name, part, r in zip(names, (train, dev, test), ratios):
        if not part and (r > 0 or name != "dev"):
            raise InsufficientData(f"{strategy} split leaves {name} empty")
    return SplitDataset(list(train), list(dev), list(test), strategy, seed, ratios)


def _shuffled(items, seed):
    items = sorted(items, key=lambda e: e.id)
    random.Random(seed).shuffle(items)
    return items


def _by_ratio(items, ratios, seed, strategy):
    items = _shuffled(items, seed)
    n = len(items)
    n_test, n_dev = _cut(n, ratios[2]), _cut(n, ratios[1])
    test, dev, train = items[:n_test], items[n_test:n_test + n_dev], items[n_test + n_dev:]
    return _finish(train, dev, test, strategy, seed, ratios)


def _greedy_groups(groups, target):
    """Pick whole groups, largest first, while they still fit under ``target``."""
    chosen, total = [], 0
    for key in sorted(groups, key=lambda k: (-len(groups[k]), k)):
        if total >= target:
            break
        if total + len(groups[key]) <= target:
            chosen.append(key)
            total += len(groups[key])
    if not chosen and target > 0 and groups:
        chosen.append(min(groups, key=lambda k: (len(groups[k]), k)))
    return chosen


def make_split(dataset: Sequence[AlignedExample], strategy: str, ratios=(0.8, 0.1, 0.1),
               seed: int = 0, constants: Iterable[str] = ()) -> SplitDataset:
    """Partition ``dataset`` into train/dev/test.

    ``question``/``scan_iid`` shuffle then cut; ``query`` keeps every MR
    template on one side of the train/test boundary; ``length`` puts the
    longest MRs in test; the ``scan_*`` compositional strategies route by the
    command predicate in :mod:`tpol.scan`.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown split strategy {strategy!r}")
    ratios = _check_ratios(ratios)
    if not dataset:
        raise InsufficientData("empty dataset")
    ids = [e.id for e in dataset]
    if len(set(ids)) != len(ids):
        raise MalformedRecord(next(i for i in ids if ids.count(i) > 1), "duplicate id")
    n = len(dataset)

    if strategy in ("question", "scan_iid"):
        return _by_ratio(dataset, ratios, seed, strategy)

    if strategy == "query":
        constants = frozenset(constants)
        groups = defaultdict(list)
        for ex in dataset:
            groups[extract_template(ex.mr, constants).tokens].append(ex)
        test_keys = _greedy_groups(groups, _cut(n, ratios[2]))
        rest = {k: v for k, v in groups.items() if k not in set(test_keys)}
        dev_keys = _greedy_groups(rest, _cut(n, ratios[1])) if ratios[1] > 0 else []
        test = [e for k in test_keys for e in groups[k]]
        dev = [e for k in dev_keys for e in rest[k]]
        taken = set(test_keys) | set(dev_keys)
        train = [e for e in dataset if extract_template(e.mr, constants).tokens not in taken]
        split = _finish(train, dev, test, strategy, seed, ratios)
        split.meta["test_templates"] = len(test_keys)
        return split

    if strategy == "length":
        ordered = sorted(dataset, key=lambda e: (-len(e.mr), -len(e.nl), e.id))
        n_test = _cut(n, ratios[2])
        test, rest = ordered[:n_test], ordered[n_test:]
        rest = _shuffled(rest, seed)
        n_dev = _cut(n, ratios[1])
        return _finish(rest[n_dev:], rest[:n_dev], test, strategy, seed, ratios)

    from .scan import split_predicate

    pred = split_predicate(strategy.removeprefix("scan_"))
    test = [e for e in dataset if pred(e.nl)]
    rest = _shuffled([e for e in dataset if not pred(e.nl)], seed)
    train_share = ratios[0] + ratios[1]
    n_dev = _cut(len(rest), ratios[1] / train_share) if train_share > 0 else 0
    return _finish(rest[n_dev:], rest[:n_dev], test, strategy, seed, ratios)


def write_split(split: SplitDataset, out_dir) -> None:
    """Write ``train/dev/test.jsonl`` plus a ``meta.json`` sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("train", "dev", "test"):
        save_corpus(getattr(split, name), out_dir / f"{name}.jsonl")
    meta = {"strategy": split.strategy, "seed": split.seed, "ratios": list(split.ratios),
            "counts": split.counts(), **split.meta}
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_split(out_dir) -> SplitDataset:
    out_dir = Path(out_dir)
    meta = json.loads((out_dir / "meta.json").read_text(encoding="utf-8"))
    parts = {name: load_corpus(out_dir / f"{name}.jsonl") for name in ("train", "dev", "test")}
    return SplitDataset(parts["train"], parts["dev"], parts["test"], meta["strategy"], meta["seed"],
                        tuple(meta["ratios"]))
