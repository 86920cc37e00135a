import random

import pytest
from hypothesis import strategies as st

from tpol.corpus import AlignedExample, BiSymbol

GEO_NL = tuple("which city has the highest population density ?".split())
GEO_MR = tuple("answer largest density city all".split())
# (which,answer) (city,city) (has,e) (the,e) (highest,largest) (population,e) (density,density) (?,e) (e,all)
GEO_A = (BiSymbol(0, 0), BiSymbol(1, 3), BiSymbol(2, None), BiSymbol(3, None), BiSymbol(4, 1),
         BiSymbol(5, None), BiSymbol(6, 2), BiSymbol(7, None), BiSymbol(None, 4))


@pytest.fixture
def geo_example():
    return AlignedExample("geo-s3", GEO_NL, GEO_MR, GEO_A, "en")


def make_alignment(rng: random.Random, n: int, m: int, p_link: float = 0.7) -> list[BiSymbol]:
    """Random legal alignment of an n-word NL to an m-word MR."""
    targets = list(range(m))
    rng.shuffle(targets)
    out = []
    for s in range(n):
        if targets and rng.random() < p_link:
            out.append(BiSymbol(s, targets.pop()))
        else:
            out.append(BiSymbol(s, None))
    for t in targets:
        out.insert(rng.randrange(len(out) + 1), BiSymbol(None, t))
    return out


def make_example(rng: random.Random, n: int, m: int, ident: str = "r", vocab: int = 6) -> AlignedExample:
    nl = tuple(f"w{rng.randrange(vocab)}" for _ in range(n))
    mr = tuple(f"P{rng.randrange(vocab)}" for _ in range(m))
    return AlignedExample(ident, nl, mr, tuple(make_alignment(rng, n, m)), "synthetic")


@st.composite
def aligned_examples(draw, max_len=9):
    n = draw(st.integers(1, max_len))
    m = draw(st.integers(1, max_len))
    seed = draw(st.integers(0, 2**32 - 1))
    return make_example(random.Random(seed), n, m)
