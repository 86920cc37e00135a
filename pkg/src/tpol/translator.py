"""Monotonic translator: epsilon-slot insertion followed by per-token tagging.

The translator turns an NL sentence ``x`` into the monotone MR ``z``.  It
first inserts epsilon slots where MR words without an NL counterpart are
expected (prefix rules mined from training data), then tags every position
of the padded sentence with one MR token or epsilon, and finally drops the
epsilons.  Any object with a ``translate(x) -> list[str]`` method can stand
in for :class:`Translator` in the pipeline.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .align import EPS, TranslatorPair
from .errors import LengthMismatch

BOS = "<s>"
EOS = "</s>"
FORMAT_VERSION = 1

DEFAULT_K = 3
DEFAULT_MIN_SUPPORT = 3
DEFAULT_MIN_PRECISION = 0.7


@dataclass
class InsertionRule:
    pattern: tuple[str, ...]
    support: int
    occurrences: int

    @property
    def precision(self) -> float:
        return self.support / self.occurrences


@dataclass
class InsertionRuleSet:
    rules: dict[tuple[str, ...], InsertionRule] = field(default_factory=dict)
    k: int = DEFAULT_K
    min_support: int = DEFAULT_MIN_SUPPORT
    min_precision: float = DEFAULT_MIN_PRECISION

    def __len__(self):
        return len(self.rules)

    def match(self, context: Sequence[str], pos: int) -> InsertionRule | None:
        """Longest retained pattern ending at ``context[pos]``."""
        for length in range(min(self.k, pos + 1), 0, -1):
            rule = self.rules.get(tuple(context[pos - length + 1:pos + 1]))
            if rule is not None:
                return rule
        return None

    def to_json(self) -> dict:
        rules = sorted(self.rules.values(), key=lambda r: (-len(r.pattern), r.pattern))
        return {"format_version": FORMAT_VERSION, "k": self.k, "min_support": self.min_support,
                "min_precision": self.min_precision,
                "rules": [{"pattern": list(r.pattern), "support": r.support, "occurrences": r.occurrences}
                          for r in rules]}

    @classmethod
    def from_json(cls, doc: dict) -> "InsertionRuleSet":
        rules = {tuple(r["pattern"]): InsertionRule(tuple(r["pattern"]), r["support"], r["occurrences"])
                 for r in doc["rules"]}
        return cls(rules, doc["k"], doc["min_support"], doc["min_precision"])


def _context(x_pad: Sequence[str]) -> tuple[list[str], list[bool]]:
    """Non-epsilon tokens after a BOS marker, and whether an epsilon follows each."""
    ctx, followed = [BOS], [False]
    for tok in x_pad:
        if tok == EPS:
            followed[-1] = True
        else:
            ctx.append(tok)
            followed.append(False)
    return ctx, followed


def learn_insertion_rules(x_pads: Iterable[Sequence[str]], k: int = DEFAULT_K,
                          min_support: int = DEFAULT_MIN_SUPPORT,
                          min_precision: float = DEFAULT_MIN_PRECISION) -> InsertionRuleSet:
    """Mine prefix patterns (up to ``k`` tokens) that are followed by an epsilon slot."""
    hits, occ = Counter(), Counter()
    for x_pad in x_pads:
        ctx, followed = _context(x_pad)
        for pos in range(len(ctx)):
            for length in range(1, min(k, pos + 1) + 1):
                pat = tuple(ctx[pos - length + 1:pos + 1])
                occ[pat] += 1
                if followed[pos]:
                    hits[pat] += 1
    rules = {}
    for pat, h in hits.items():
        if h >= min_support and h / occ[pat] >= min_precision:
            rules[pat] = InsertionRule(pat, h, occ[pat])
    return InsertionRuleSet(rules, k, min_support, min_precision)


def apply_insertions(x: Sequence[str], rules: InsertionRuleSet) -> list[str]:
    ctx = [BOS, *x]
    out = []
    for pos, tok in enumerate(ctx):
        if pos:
            out.append(tok)
        if rules.rules and rules.match(ctx, pos) is not None:
            out.append(EPS)
    return out


@dataclass
class TaggerModel:
    """Count-based tagger backing off from (token, prev, next) to (token, prev) to token to a prior."""

    trigram: dict[tuple[str, str, str], Counter] = field(default_factory=dict)
    bigram: dict[tuple[str, str], Counter] = field(default_factory=dict)
    unigram: dict[str, Counter] = field(default_factory=dict)
    prior: Counter = field(default_factory=Counter)

    def _argmax(self, dist: Counter) -> str:
        return min(dist, key=lambda tag: (-dist[tag], -self.prior[tag], tag))

    def tag_one(self, tok: str, prev: str, nxt: str) -> tuple[str, str]:
        """Return ``(tag, level)`` where level names the table that answered."""
        for level, table, key in (("trigram", self.trigram, (tok, prev, nxt)),
                                  ("bigram", self.bigram, (tok, prev)),
                                  ("unigram", self.unigram, tok)):
            dist = table.get(key)
            if dist:
                return self._argmax(dist), level
        return self._argmax(self.prior), "prior"

    def tag(self, x_pad: Sequence[str]) -> list[str]:
        return [t for t, _ in self.tag_trace(x_pad)]

    def tag_trace(self, x_pad: Sequence[str]) -> list[tuple[str, str]]:
        if not self.prior:
            raise ValueError("tagger has not been trained")
        padded = [BOS, *x_pad, EOS]
        return [self.tag_one(padded[i], padded[i - 1], padded[i + 1]) for i in range(1, len(padded) - 1)]

    def to_json(self) -> dict:
        def rows(table):
            return [[*(key if isinstance(key, tuple) else (key,)), dict(sorted(dist.items()))]
                    for key, dist in sorted(table.items())]
        return {"format_version": FORMAT_VERSION, "trigram": rows(self.trigram), "bigram": rows(self.bigram),
                "unigram": rows(self.unigram), "prior": dict(sorted(self.prior.items()))}

    @classmethod
    def from_json(cls, doc: dict) -> "TaggerModel":
        return cls(
            trigram={tuple(r[:3]): Counter(r[3]) for r in doc["trigram"]},
            bigram={tuple(r[:2]): Counter(r[2]) for r in doc["bigram"]},
            unigram={r[0]: Counter(r[1]) for r in doc["unigram"]},
            prior=Counter(doc["prior"]),
        )


def train_tagger(pairs: Iterable[TranslatorPair | tuple]) -> TaggerModel:
    tri, bi, uni = defaultdict(Counter), defaultdict(Counter), defaultdict(Counter)
    prior = Counter()
    for pair in pairs:
        x_pad, z_pad = (pair.x_pad, pair.z_pad) if isinstance(pair, TranslatorPair) else pair
        if len(x_pad) != len(z_pad):
            raise LengthMismatch(f"pair {getattr(pair, 'id', '')!r}: |x_pad|={len(x_pad)} != |z_pad|={len(z_pad)}")
        padded = [BOS, *x_pad, EOS]
        for i, tag in enumerate(z_pad, 1):
            tok, prev, nxt = padded[i], padded[i - 1], padded[i + 1]
            tri[tok, prev, nxt][tag] += 1
            bi[tok, prev][tag] += 1
            uni[tok][tag] += 1
            prior[tag] += 1
    return TaggerModel(dict(tri), dict(bi), dict(uni), prior)


@dataclass
class Translator:
    tagger: TaggerModel
    rules: InsertionRuleSet

    def translate(self, x: Sequence[str]) -> list[str]:
        return translate(x, self.tagger, self.rules)

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        _dump(self.tagger.to_json(), directory / "tagger.json")
        _dump(self.rules.to_json(), directory / "rules.json")

    @classmethod
    def load(cls, directory) -> "Translator":
        directory = Path(directory)
        tagger = TaggerModel.from_json(_read(directory / "tagger.json"))
        rules = InsertionRuleSet.from_json(_read(directory / "rules.json"))
        return cls(tagger, rules)


def train_translator(pairs: Sequence[TranslatorPair], k: int = DEFAULT_K, min_support: int = DEFAULT_MIN_SUPPORT,
                     min_precision: float = DEFAULT_MIN_PRECISION) -> Translator:
    rules = learn_insertion_rules((p.x_pad for p in pairs), k, min_support, min_precision)
    return Translator(train_tagger(pairs), rules)


def translate(x: Sequence[str], tagger: TaggerModel, rules: InsertionRuleSet) -> list[str]:
    return [tag for tag in tagger.tag(apply_insertions(x, rules)) if tag != EPS]


def dump_tags(x: Sequence[str], translator: Translator) -> list[tuple[int, str, str, str]]:
    """Per-position decisions ``(position, padded token, tag, backoff level)``."""
    x_pad = apply_insertions(x, translator.rules)
    return [(i, tok, tag, level) for i, (tok, (tag, level)) in enumerate(zip(x_pad, translator.tagger.tag_trace(x_pad)))]


def _dump(doc, path):
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")


def _read(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {doc.get('format_version')!r}")
    return doc
