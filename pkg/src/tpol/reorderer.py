"""Reorderer: permute the monotone MR ``z`` back into MR order.

Permutations are memorised per template of ``z``.  Unseen templates fall
back to a pairwise precedence model searched by adjacent-swap hill climbing.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .align import ReordererPair, apply_permutation
from .corpus import extract_template
from .errors import SilverWithoutTranslator

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
CONST_TYPE = "<const>"


@dataclass
class ReordererModel:
    template_memory: dict[tuple[str, ...], tuple[int, ...]] = field(default_factory=dict)
    support: dict[tuple[str, ...], int] = field(default_factory=dict)
    pair_counts: Counter = field(default_factory=Counter)
    constants: frozenset[str] = frozenset()
    mode: str = "gold"
    silver_skipped: int = 0
    silver_total: int = 0

    @property
    def silver_skip_rate(self) -> float:
        return self.silver_skipped / self.silver_total if self.silver_total else 0.0

    def symbol_type(self, tok: str) -> str:
        return CONST_TYPE if tok in self.constants else tok

    def precedence(self, a: str, b: str) -> float:
        """Probability that symbol type ``a`` precedes ``b`` (add-one smoothed; unseen pairs 0.5)."""
        ab, ba = self.pair_counts.get((a, b), 0), self.pair_counts.get((b, a), 0)
        return (ab + 1) / (ab + ba + 2)

    def score(self, tokens: Sequence[str]) -> float:
        types = [self.symbol_type(t) for t in tokens]
        return sum(math.log(self.precedence(types[i], types[j]))
                   for i in range(len(types)) for j in range(i + 1, len(types)))

    def lookup(self, z: Sequence[str]) -> tuple[int, ...] | None:
        perm = self.template_memory.get(extract_template(z, self.constants).tokens)
        return perm if perm is not None and len(perm) == len(z) else None

    def reorder(self, z: Sequence[str]) -> list[str]:
        return reorder(z, self)

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "mode": self.mode,
            "constants": sorted(self.constants),
            "template_memory": [{"template": list(k), "perm": list(v), "support": self.support.get(k, 0)}
                                for k, v in sorted(self.template_memory.items())],
            "precedence": [[a, b, c] for (a, b), c in sorted(self.pair_counts.items())],
            "silver_skipped": self.silver_skipped,
            "silver_total": self.silver_total,
            "silver_skip_rate": self.silver_skip_rate,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ReordererModel":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported reorderer format {doc.get('format_version')!r}")
        memory = {tuple(e["template"]): tuple(e["perm"]) for e in doc["template_memory"]}
        support = {tuple(e["template"]): e["support"] for e in doc["template_memory"]}
        return cls(memory, support, Counter({(a, b): c for a, b, c in doc["precedence"]}),
                   frozenset(doc["constants"]), doc["mode"], doc["silver_skipped"], doc["silver_total"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ReordererModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def leftmost_permutation(z: Sequence[str], y: Sequence[str]) -> tuple[int, ...] | None:
    """Map each ``z`` token to the leftmost unused equal token of ``y``; None if not a permutation."""
    if Counter(z) != Counter(y):
        return None
    used = [False] * len(y)
    perm = []
    for tok in z:
        j = next(j for j, (u, w) in enumerate(zip(used, y)) if not u and w == tok)
        used[j] = True
        perm.append(j)
    return tuple(perm)


def train_reorderer(pairs: Iterable[ReordererPair], mode: str = "gold", translator=None,
                    constants: Iterable[str] = ()) -> ReordererModel:
    """Fit template memory and precedence counts.

    In ``silver`` mode each ``z`` is replaced by ``translator.translate(nl)``;
    pairs whose prediction is not a rearrangement of ``y`` are skipped and
    counted in ``silver_skipped``.
    """
    if mode not in ("gold", "silver"):
        raise ValueError(f"unknown reorderer mode {mode!r}")
    if mode == "silver" and translator is None:
        raise SilverWithoutTranslator("silver mode needs a trained translator")
    model = ReordererModel(constants=frozenset(constants), mode=mode)
    votes: dict[tuple[str, ...], Counter] = {}
    order: dict[tuple[str, ...], list[tuple[int, ...]]] = {}
    for pair in pairs:
        y = tuple(pair.y)
        types = [model.symbol_type(t) for t in y]
        for i in range(len(types)):
            for j in range(i + 1, len(types)):
                if types[i] != types[j]:
                    model.pair_counts[types[i], types[j]] += 1
        z, perm = tuple(pair.z), tuple(pair.perm)
        if mode == "silver":
            model.silver_total += 1
            z = tuple(translator.translate(pair.nl))
            perm = leftmost_permutation(z, y)
            if perm is None:
                model.silver_skipped += 1
                continue
        key = extract_template(z, model.constants).tokens
        votes.setdefault(key, Counter())[perm] += 1
        seen = order.setdefault(key, [])
        if perm not in seen:
            seen.append(perm)
    for key, counter in votes.items():
        # majority; ties go to the permutation seen first
        best = max(order[key], key=lambda p: (counter[p], -order[key].index(p)))
        model.template_memory[key] = best
        model.support[key] = counter[best]
    if mode == "silver":
        log.info("silver reorderer: skipped %d of %d pairs (%.1f%%)", model.silver_skipped,
                 model.silver_total, 100 * model.silver_skip_rate)
    return model


def hill_climb(z: Sequence[str], model: ReordererModel) -> list[str]:
    """Adjacent-swap hill climbing from the identity order; swaps only on strict gain."""
    tokens = list(z)
    n = len(tokens)
    for _ in range(max(n * n, 1)):
        changed = False
        for k in range(n - 1):
            a, b = model.symbol_type(tokens[k]), model.symbol_type(tokens[k + 1])
            if math.log(model.precedence(b, a)) > math.log(model.precedence(a, b)):
                tokens[k], tokens[k + 1] = tokens[k + 1], tokens[k]
                changed = True
        if not changed:
            break
    return tokens


def reorder(z: Sequence[str], model: ReordererModel) -> list[str]:
    perm = model.lookup(z)
    if perm is not None:
        return apply_permutation(z, perm)
    return hill_climb(z, model)
