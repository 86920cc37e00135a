"""IBM Models 1 and 2 trained by EM, and bi-symbol extraction from them.

Alignment direction is MR -> NL: every MR token is generated by one NL
token or by the NULL word, so ``t[s, y]`` is ``p(MR token y | NL token s)``
and rows of the table sum to one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import AlignedExample, BiSymbol
from .errors import EmptyCorpus, NonFiniteLikelihood, UntrainedModel

NULL = "<null>"
LENGTH_CAP = 40
DECODE_SMOOTHING = 1e-12
FORMAT_VERSION = 1


@dataclass
class TranslationTable:
    src_vocab: list[str]  # index 0 is NULL
    tgt_vocab: list[str]
    probs: np.ndarray
    smoothing: float = DECODE_SMOOTHING

    def __post_init__(self):
        self.src_index = {w: i for i, w in enumerate(self.src_vocab)}
        self.tgt_index = {w: i for i, w in enumerate(self.tgt_vocab)}

    def prob(self, tgt: str, src: str) -> float:
        s, t = self.src_index.get(src), self.tgt_index.get(tgt)
        if s is None or t is None:
            return 0.0
        return float(self.probs[s, t])

    def best(self, src: str) -> str:
        """Most probable MR token for an NL token (ties go to the earlier vocabulary entry)."""
        return self.tgt_vocab[int(np.argmax(self.probs[self.src_index[src]]))]


@dataclass
class DistortionTable:
    """``q(j | i, n, m)`` over NL positions ``j`` (0 = NULL) with capped length buckets."""

    table: dict[tuple[int, int, int], np.ndarray] = field(default_factory=dict)
    cap: int = LENGTH_CAP

    def key(self, i: int, n: int, m: int) -> tuple[int, int, int]:
        return min(i, self.cap), min(n, self.cap), min(m, self.cap)

    def buckets(self, n: int) -> np.ndarray:
        return np.minimum(np.arange(n + 1), self.cap)

    def weights(self, i: int, n: int, m: int) -> np.ndarray:
        """Per-position probabilities for target position ``i`` (1-based), summing to one."""
        key = self.key(i, n, m)
        nb = key[1]
        dist = self.table.get(key)
        if dist is None:
            dist = np.full(nb + 1, 1.0 / (nb + 1))
        b = self.buckets(n)
        share = np.bincount(b, minlength=nb + 1)
        return dist[b] / share[b]


@dataclass
class IBMModel:
    model: str
    t: TranslationTable
    q: DistortionTable | None
    iterations: int
    seed: int
    loglik: list[float]

    @property
    def final_loglik(self) -> float:
        return self.loglik[-1]

    def save(self, path) -> None:
        t = self.t
        rows = {}
        for s, src in enumerate(t.src_vocab):
            nz = np.nonzero(t.probs[s])[0]
            rows[src] = {t.tgt_vocab[j]: float(t.probs[s, j]) for j in nz}
        q = None
        if self.q is not None:
            q = {"cap": self.q.cap,
                 "table": [[i, n, m, [float(v) for v in dist]] for (i, n, m), dist in sorted(self.q.table.items())]}
        doc = {"format_version": FORMAT_VERSION, "model": self.model,
               "vocabularies": {"nl": t.src_vocab, "mr": t.tgt_vocab},
               "t": rows, "q": q, "iterations": self.iterations, "seed": self.seed,
               "loglik": self.loglik, "final_loglik": self.final_loglik}
        Path(path).write_text(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "IBMModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported IBM model format {doc.get('format_version')!r}")
        src, tgt = doc["vocabularies"]["nl"], doc["vocabularies"]["mr"]
        tgt_index = {w: j for j, w in enumerate(tgt)}
        probs = np.zeros((len(src), len(tgt)))
        for s, word in enumerate(src):
            for y, p in doc["t"][word].items():
                probs[s, tgt_index[y]] = p
        q = None
        if doc["q"] is not None:
            q = DistortionTable({(i, n, m): np.array(d) for i, n, m, d in doc["q"]["table"]}, doc["q"]["cap"])
        return cls(doc["model"], TranslationTable(src, tgt, probs), q, doc["iterations"], doc["seed"], doc["loglik"])


def _encode(corpus, src_index, tgt_index):
    return [(np.array([0] + [src_index[w] for w in nl]), np.array([tgt_index[w] for w in mr])) for nl, mr in corpus]


def _em(encoded, probs, q: DistortionTable | None, iterations: int, loglik: list[float]):
    n_src, n_tgt = probs.shape
    for _ in range(iterations):
        counts = np.zeros((n_src, n_tgt))
        qcounts: dict[tuple[int, int, int], np.ndarray] = {}
        total = 0.0
        for src, tgt in encoded:
            n, m = len(src) - 1, len(tgt)
            scores = probs[np.ix_(src, tgt)]  # (n+1, m)
            if q is None:
                align = np.full((n + 1, m), 1.0 / (n + 1))
            else:
                align = np.stack([q.weights(i + 1, n, m) for i in range(m)], axis=1)
            joint = scores * align
            denom = joint.sum(axis=0)
            total += float(np.log(denom).sum())
            post = joint / denom
            np.add.at(counts, (src[:, None], tgt[None, :]), post)
            if q is not None:
                b = q.buckets(n)
                for i in range(m):
                    key = q.key(i + 1, n, m)
                    acc = qcounts.setdefault(key, np.zeros(key[1] + 1))
                    np.add.at(acc, b, post[:, i])
        if not math.isfinite(total):
            raise NonFiniteLikelihood(f"corpus log-likelihood is {total}")
        loglik.append(total)
        probs = counts / counts.sum(axis=1, keepdims=True)
        if q is not None:
            q = DistortionTable({k: v / v.sum() for k, v in qcounts.items()}, q.cap)
    return probs, q


def _corpus_loglik(encoded, probs, q) -> float:
    total = 0.0
    for src, tgt in encoded:
        n, m = len(src) - 1, len(tgt)
        scores = probs[np.ix_(src, tgt)]
        if q is None:
            denom = scores.sum(axis=0) / (n + 1)
        else:
            align = np.stack([q.weights(i + 1, n, m) for i in range(m)], axis=1)
            denom = (scores * align).sum(axis=0)
        total += float(np.log(denom).sum())
    if not math.isfinite(total):
        raise NonFiniteLikelihood(f"corpus log-likelihood is {total}")
    return total


def train_ibm(corpus: Sequence[tuple[Sequence[str], Sequence[str]]], model: str = "model1",
              iterations: int = 10, seed: int = 0, model1_iterations: int | None = None,
              length_cap: int = LENGTH_CAP) -> IBMModel:
    """Estimate an IBM alignment model on ``(nl, mr)`` token pairs.

    Model 2 first runs Model 1 (``model1_iterations``, defaulting to
    ``iterations``) and starts from its translation table with uniform
    distortion.  ``loglik`` holds the corpus log-likelihood before every EM
    iteration followed by the value at the final parameters, so it is
    non-decreasing from start to end.
    """
    if model not in ("model1", "model2"):
        raise ValueError(f"unknown IBM model {model!r}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    corpus = [(tuple(nl), tuple(mr)) for nl, mr in corpus]
    if not corpus or any(not nl or not mr for nl, mr in corpus):
        raise EmptyCorpus("IBM training needs a non-empty corpus of non-empty sentence pairs")

    src_vocab = [NULL] + sorted({w for nl, _ in corpus for w in nl})
    tgt_vocab = sorted({w for _, mr in corpus for w in mr})
    src_index = {w: i for i, w in enumerate(src_vocab)}
    tgt_index = {w: i for i, w in enumerate(tgt_vocab)}
    encoded = _encode(corpus, src_index, tgt_index)

    loglik: list[float] = []
    probs = np.full((len(src_vocab), len(tgt_vocab)), 1.0 / len(tgt_vocab))
    q = None
    m1_iters = iterations if model == "model1" else (model1_iterations or iterations)
    probs, _ = _em(encoded, probs, None, m1_iters, loglik)
    if model == "model2":
        q = DistortionTable(cap=length_cap)
        probs, q = _em(encoded, probs, q, iterations, loglik)
    loglik.append(_corpus_loglik(encoded, probs, q))
    table = TranslationTable(src_vocab, tgt_vocab, probs)
    return IBMModel(model, table, q, iterations, seed, loglik)


def _scores(model: IBMModel, nl: Sequence[str], mr: Sequence[str]) -> np.ndarray:
    t = model.t
    n, m = len(nl), len(mr)
    scores = np.zeros((n + 1, m))
    rows = [0] + [t.src_index.get(w, -1) for w in nl]
    for i, y in enumerate(mr):
        col = t.tgt_index.get(y)
        for j, s in enumerate(rows):
            p = t.probs[s, col] if (s >= 0 and col is not None) else 0.0
            scores[j, i] = p + t.smoothing
    if model.q is not None:
        for i in range(m):
            scores[:, i] *= model.q.weights(i + 1, n, m)
    return scores


def viterbi_bisymbolize(model: IBMModel | None, nl: Sequence[str], mr: Sequence[str]) -> list[BiSymbol]:
    """Best one-to-one bi-symbol alignment of ``mr`` onto ``nl``.

    Every MR token picks its most probable NL position (NULL counts as the
    leftmost).  When several MR tokens pick the same NL word the most
    probable one keeps it and the rest become insertions right after it;
    NULL-aligned tokens are inserted after the bi-symbols of the nearest
    preceding MR token that did align, or at the front.
    """
    if model is None or not isinstance(model, IBMModel):
        raise UntrainedModel("viterbi_bisymbolize needs a trained IBM model")
    if not nl or not mr:
        raise ValueError("sentences must be non-empty")
    scores = _scores(model, nl, mr)
    choice = [int(np.argmax(scores[:, i])) for i in range(len(mr))]  # argmax returns the first maximum
    best = [float(scores[choice[i], i]) for i in range(len(mr))]

    heads, extra = {}, {}
    for i, j in enumerate(choice):
        if j == 0:
            continue
        h = heads.get(j)
        if h is None or best[i] > best[h]:
            heads[j] = i
    for i, j in enumerate(choice):
        if j and heads[j] != i:
            extra.setdefault(j, []).append(i)

    anchored: dict[int, list[int]] = {}
    last = 0
    for i, j in enumerate(choice):
        if j == 0:
            anchored.setdefault(last, []).append(i)
        else:
            last = j

    out = [BiSymbol(None, i) for i in anchored.get(0, [])]
    for j in range(1, len(nl) + 1):
        out.append(BiSymbol(j - 1, heads.get(j)))
        out.extend(BiSymbol(None, i) for i in extra.get(j, []))
        out.extend(BiSymbol(None, i) for i in anchored.get(j, []))
    return out


def align_corpus(model: IBMModel, examples: Sequence[AlignedExample]) -> list[AlignedExample]:
    """Replace each example's alignment with the model's bi-symbols."""
    return [ex.with_alignment(viterbi_bisymbolize(model, ex.nl, ex.mr)) for ex in examples]
