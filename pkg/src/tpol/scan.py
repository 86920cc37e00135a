"""SCAN command generator with action sequences and program-style MRs.

The command grammar::

    C -> S | S and S | S after S
    S -> V | V twice | V thrice
    V -> D | U | W opposite DIR | W around DIR      (W is U or "turn")
    D -> U DIR | turn DIR
    U -> walk | look | run | jump
    DIR -> left | right

Programs are prefix terms, one function symbol per construct, wrapped in
``answer``: "jump around right twice and walk" becomes
``answer ( and ( twice ( around ( right ( jump ) ) ) walk ) )``.  Arities are
fixed, so the bracket-free token sequence stays unambiguous.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import AlignedExample, SplitDataset, make_split, remove_brackets as _strip

PRIMITIVES = ("walk", "look", "run", "jump")
DIRECTIONS = ("left", "right")
ACTION = {"walk": "I_WALK", "look": "I_LOOK", "run": "I_RUN", "jump": "I_JUMP"}
TURN = {"left": "I_TURN_LEFT", "right": "I_TURN_RIGHT"}
# lexical fillers that never change the shape of a program
CONSTANTS = frozenset(PRIMITIVES + DIRECTIONS + ("turn",))
FULL_SIZE = 20910


@dataclass(frozen=True)
class ScanExample:
    id: str
    command: tuple[str, ...]
    actions: tuple[str, ...]
    program: tuple[str, ...]

    def to_aligned(self, remove_brackets: bool = False) -> AlignedExample:
        ex = AlignedExample(self.id, self.command, self.program, None, "synthetic")
        return _strip(ex) if remove_brackets else ex


# Terms are nested tuples (symbol, *args); they drive both programs and actions.

def _verb_phrases() -> list[tuple[tuple[str, ...], tuple]]:
    out = [((u,), (u,)) for u in PRIMITIVES]
    for w in PRIMITIVES + ("turn",):
        for d in DIRECTIONS:
            out.append(((w, d), (d, (w,))))
    for mod in ("opposite", "around"):
        for w in PRIMITIVES + ("turn",):
            for d in DIRECTIONS:
                out.append(((w, mod, d), (mod, (d, (w,)))))
    return out


def _sentences() -> list[tuple[tuple[str, ...], tuple]]:
    out = []
    for words, term in _verb_phrases():
        out.append((words, term))
        out.append((words + ("twice",), ("twice", term)))
        out.append((words + ("thrice",), ("thrice", term)))
    return out


def _commands():
    sentences = _sentences()
    for s in sentences:
        yield s
    for conj in ("and", "after"):
        for w1, t1 in sentences:
            for w2, t2 in sentences:
                yield w1 + (conj,) + w2, (conj, t1, t2)


def term_to_program(term: tuple) -> tuple[str, ...]:
    def walk(t):
        head, *args = t
        if not args:
            return [head]
        out = [head, "("]
        for a in args:
            out.extend(walk(a))
        out.append(")")
        return out

    return ("answer", "(", *walk(term), ")")


def interpret_command(command: Sequence[str]) -> list[str]:
    """Action sequence for a command, read straight off the surface grammar."""
    words = list(command)
    for conj in ("and", "after"):
        if conj in words:
            k = words.index(conj)
            left, right = interpret_command(words[:k]), interpret_command(words[k + 1:])
            return left + right if conj == "and" else right + left
    if words[-1] == "twice":
        return interpret_command(words[:-1]) * 2
    if words[-1] == "thrice":
        return interpret_command(words[:-1]) * 3
    if len(words) == 1:
        return [ACTION[words[0]]]
    base = [] if words[0] == "turn" else [ACTION[words[0]]]
    turn = TURN[words[-1]]
    if len(words) == 2:
        return [turn] + base
    if words[1] == "opposite":
        return [turn, turn] + base
    if words[1] == "around":
        return ([turn] + base) * 4
    raise ValueError(f"not a SCAN command: {' '.join(command)}")


def parse_program(tokens: Sequence[str]) -> tuple:
    """Inverse of :func:`term_to_program`; accepts bracketed or bracket-free tokens."""
    toks = [t for t in tokens if t not in ("(", ")")]
    if not toks or toks[0] != "answer":
        raise ValueError("program must start with 'answer'")
    arity = {"and": 2, "after": 2, "twice": 1, "thrice": 1, "opposite": 1, "around": 1,
             "left": 1, "right": 1}
    pos = 1

    def term():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("truncated program")
        head = toks[pos]
        pos += 1
        return (head, *(term() for _ in range(arity.get(head, 0))))

    t = term()
    if pos != len(toks):
        raise ValueError("trailing tokens in program")
    return t


def execute_program(tokens: Sequence[str]) -> list[str]:
    """Action sequence denoted by a program, evaluated from its own term structure."""

    def run(t):
        head, *args = t
        if head in ACTION:
            return [ACTION[head]]
        if head == "turn":
            return []
        if head in TURN:
            return [TURN[head]] + run(args[0])
        if head in ("opposite", "around"):
            inner_head, inner_arg = args[0]
            turn, base = TURN[inner_head], run(inner_arg)
            return [turn, turn] + base if head == "opposite" else ([turn] + base) * 4
        if head == "twice":
            return run(args[0]) * 2
        if head == "thrice":
            return run(args[0]) * 3
        if head == "and":
            return run(args[0]) + run(args[1])
        if head == "after":
            return run(args[1]) + run(args[0])
        raise ValueError(f"unknown program symbol {head!r}")

    return run(parse_program(tokens))


def generate_scan(limit: int | None = None, seed: int = 0) -> list[ScanExample]:
    """Enumerate every SCAN command in a fixed order; ``limit`` draws a seeded subsample."""
    examples = [
        ScanExample(f"scan-{i:05d}", words, tuple(interpret_command(words)), term_to_program(term))
        for i, (words, term) in enumerate(_commands())
    ]
    if limit is not None and limit < len(examples):
        keep = sorted(random.Random(seed).sample(range(len(examples)), limit))
        examples = [examples[i] for i in keep]
    return examples


def split_predicate(kind: str) -> Callable[[Sequence[str]], bool]:
    """Which commands belong in the test set of a compositional SCAN split."""
    if kind == "right":
        return lambda words: "right" in words
    if kind == "around_right":
        return lambda words: any(a == "around" and b == "right" for a, b in zip(words, words[1:]))
    if kind == "iid":
        return lambda words: False
    raise ValueError(f"unknown SCAN split {kind!r}")


def scan_split(dataset: Iterable[ScanExample | AlignedExample], kind: str = "iid",
               ratios=(0.8, 0.1, 0.1), seed: int = 0, remove_brackets: bool = True) -> SplitDataset:
    data = [e.to_aligned(remove_brackets) if isinstance(e, ScanExample) else e for e in dataset]
    return make_split(data, "scan_" + kind, ratios, seed)
