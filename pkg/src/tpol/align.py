"""Crossings, monotonic derivations, training pairs and alignment error."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import AlignedExample, BiSymbol
from .errors import MismatchedSentence

EPS = "<eps>"


@dataclass(frozen=True)
class MonotonicDerivation:
    x_pad: tuple[str, ...]
    z_pad: tuple[str, ...]
    z: tuple[str, ...]
    perm: tuple[int, ...]  # perm[k] = index in y of z[k]

    def induced_alignment(self) -> list[BiSymbol]:
        """Bi-symbols between ``x_pad`` positions and ``z`` positions."""
        out, k = [], 0
        for pos, tok in enumerate(self.z_pad):
            if tok == EPS:
                out.append(BiSymbol(pos, None))
            else:
                out.append(BiSymbol(pos, k))
                k += 1
        return out


@dataclass(frozen=True)
class AlignmentErrorScore:
    error: float
    matched: int
    pred_size: int
    gold_size: int


@dataclass(frozen=True)
class TranslatorPair:
    x_pad: tuple[str, ...]
    z_pad: tuple[str, ...]
    id: str = ""


@dataclass(frozen=True)
class ReordererPair:
    z: tuple[str, ...]
    y: tuple[str, ...]
    perm: tuple[int, ...]
    nl: tuple[str, ...] = ()
    id: str = ""


def apply_permutation(z: Sequence[str], perm: Sequence[int]) -> list[str]:
    """Place ``z[k]`` at position ``perm[k]`` of the output."""
    out = [None] * len(z)
    for k, dest in enumerate(perm):
        out[dest] = z[k]
    return out


def _count_inversions(seq: list[int]) -> int:
    # merge sort; strict inversions only (ties in seq cannot occur for one-to-one targets)
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _count_inversions(left) + _count_inversions(right)
    i = j = 0
    merged = []
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            inv += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return inv


def crossing_count(bisymbols: Iterable[BiSymbol]) -> int:
    """Number of fully non-epsilon bi-symbol pairs whose source and target orders disagree."""
    full = sorted((s, t) for s, t in bisymbols if s is not None and t is not None)
    return _count_inversions([t for _, t in full])


def is_monotonic(ex: AlignedExample) -> bool:
    return crossing_count(ex.bisymbols) == 0


def monotonicize(ex: AlignedExample) -> MonotonicDerivation:
    """Reorder the MR so that it aligns to the NL without crossings.

    Bi-symbol lists already keep non-epsilon sources in increasing order, and
    an insertion stays where it was annotated (after the preceding source), so
    reading the list front to back gives the padded parallel sequences.
    """
    if ex.bisymbols is None:
        raise ValueError(f"example {ex.id!r} has no alignment")
    x_pad, z_pad, perm = [], [], []
    for s, t in ex.bisymbols:
        x_pad.append(EPS if s is None else ex.nl[s])
        z_pad.append(EPS if t is None else ex.mr[t])
        if t is not None:
            perm.append(t)
    z = tuple(tok for tok in z_pad if tok != EPS)
    return MonotonicDerivation(tuple(x_pad), tuple(z_pad), z, tuple(perm))


def derive_training_pairs(ex: AlignedExample) -> tuple[TranslatorPair, ReordererPair]:
    d = monotonicize(ex)
    return (TranslatorPair(d.x_pad, d.z_pad, ex.id),
            ReordererPair(d.z, ex.mr, d.perm, ex.nl, ex.id))


def derive_corpus(examples: Iterable[AlignedExample]) -> tuple[list[TranslatorPair], list[ReordererPair]]:
    tpairs, rpairs = [], []
    for ex in examples:
        t, r = derive_training_pairs(ex)
        tpairs.append(t)
        rpairs.append(r)
    return tpairs, rpairs


def alignment_error(pred: Iterable[BiSymbol], gold: Iterable[BiSymbol],
                    lengths: tuple[tuple[int, int], tuple[int, int]] | None = None) -> AlignmentErrorScore:
    """Share of bi-symbols that differ between two alignments of one sentence pair.

    ``lengths`` optionally gives ``((n_pred, m_pred), (n_gold, m_gold))`` so a
    comparison across different sentence pairs is refused.
    """
    if lengths is not None and lengths[0] != lengths[1]:
        raise MismatchedSentence(f"sentence lengths differ: {lengths[0]} vs {lengths[1]}")
    p = {tuple(b) for b in pred}
    g = {tuple(b) for b in gold}
    matched = len(p & g)
    denom = max(len(p), len(g))
    error = 0.0 if denom == 0 else 1.0 - matched / denom
    return AlignmentErrorScore(error, matched, len(p), len(g))


def example_alignment_error(pred: AlignedExample, gold: AlignedExample) -> AlignmentErrorScore:
    return alignment_error(pred.bisymbols, gold.bisymbols,
                           ((len(pred.nl), len(pred.mr)), (len(gold.nl), len(gold.mr))))


def corpus_alignment_error(preds: Sequence[AlignedExample], golds: Sequence[AlignedExample]) -> float:
    """Mean per-example alignment error over id-matched examples."""
    if len(preds) != len(golds):
        raise MismatchedSentence("prediction and gold corpora differ in size")
    if not preds:
        return 0.0
    return sum(example_alignment_error(p, g).error for p, g in zip(preds, golds)) / len(preds)


def save_derivations(examples: Iterable[AlignedExample], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for ex in examples:
            d = monotonicize(ex)
            rec = {"id": ex.id, "x_pad": list(d.x_pad), "z_pad": list(d.z_pad),
                   "z": list(d.z), "perm": list(d.perm)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
