"""Small Geo-style question generator with hand-written gold alignments.

The real aligned Geo corpus is not bundled, so tests and demos use this
stand-in.  MRs are FunQL-like with brackets already removed; questions come
from a handful of phrase patterns whose alignments cross and leave words
unaligned on both sides, as real annotations do.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import AlignedExample, BiSymbol, validate

CITIES = ("austin", "dallas", "houston", "boston", "seattle", "denver", "chicago", "atlanta", "portland",
          "miami", "phoenix", "detroit", "albany", "tucson", "fresno", "omaha")
STATES = ("texas", "ohio", "utah", "oregon", "alaska", "maine", "iowa", "nevada", "kansas", "idaho",
          "georgia", "montana", "vermont", "arizona", "florida", "michigan", "wyoming", "delaware")
RIVERS = ("mississippi", "colorado", "missouri", "ohio_river", "red", "rio_grande", "snake", "platte")
CONSTANTS = frozenset(CITIES + STATES + RIVERS)


@dataclass(eq=False)
class Leaf:
    word: str | None
    tok: str | None


@dataclass(eq=False)
class Frag:
    items: list  # NL order: Leaf | Frag
    order: list  # MR order: Leaf | Frag


def L(word, tok=None):
    return Leaf(word, tok)


def _flatten(frag: Frag) -> AlignedExample:
    mr_index, mr = {}, []

    def assign(node):
        if isinstance(node, Leaf):
            mr_index[id(node)] = len(mr)
            mr.append(node.tok)
        else:
            for child in node.order:
                assign(child)

    assign(frag)
    nl, links = [], []

    def emit(node):
        if isinstance(node, Leaf):
            src = None
            if node.word is not None:
                src = len(nl)
                nl.append(node.word)
            links.append(BiSymbol(src, mr_index.get(id(node)) if node.tok is not None else None))
        else:
            for child in node.items:
                emit(child)

    emit(frag)
    return AlignedExample("", tuple(nl), tuple(mr), tuple(links), "en")


def _frag(items, *order_refs):
    """``items`` in NL order; MR order is the listed refs (default: NL order of MR-bearing nodes)."""
    order = list(order_refs) or [n for n in items if isinstance(n, Frag) or n.tok is not None]
    return Frag(items, order)


# noun phrases -------------------------------------------------------------

def _named(rng, names, pred):
    # "austin" -> cityid austin; the id predicate is inserted after the name (crossing)
    name = rng.choice(names)
    ident, n = L(None, pred), L(name, name)
    return _frag([n, ident], ident, n)


def city(rng):
    return _named(rng, CITIES, "cityid")


def state(rng):
    return _named(rng, STATES, "stateid")


def river(rng):
    name = rng.choice(RIVERS)
    rid, n = L("river", "riverid"), L(name, name)
    return _frag([L("the"), n, rid], rid, n)


def largest_city_in(rng, depth):
    return _frag([L("the"), L("largest", "largest"), L("city", "city"), L("in", "loc_2"), place(rng, depth)])


def capital_of(rng, depth):
    return _frag([L("the"), L("capital", "capital"), L("of", "loc_2"), place(rng, depth)])


def possessive_capital(rng, depth):
    # "texas 's capital" -> capital loc_2 stateid texas (crossing)
    s = place(rng, depth)
    cap, of = L("capital", "capital"), L("'s", "loc_2")
    return _frag([s, of, cap], cap, of, s)


def most_populous_state(rng, depth):
    # "the state with the largest population" -> largest_one population state all (crossing)
    lo, pop, st, al = L("largest", "largest_one"), L("population", "population"), L("state", "state"), L(None, "all")
    return _frag([L("the"), st, L("with"), L("the"), lo, pop, al], lo, pop, st, al)


def smallest_state(rng):
    return _frag([L("the"), L("smallest", "smallest"), L("state", "state"), L(None, "all")])


def state_bordering(rng, depth):
    return _frag([L("the"), L("state", "state"), L("that"), L("borders", "next_to_2"), place(rng, depth)])


def place(rng, depth):
    options = [state, state, state, state]
    if depth > 0:
        options += [lambda r: most_populous_state(r, depth - 1), smallest_state,
                    lambda r: state_bordering(r, depth - 1)]
    return rng.choice(options)(rng)


def entity(rng, depth=1):
    options = [city, city, lambda r: place(r, depth)]
    if depth > 0:
        options += [lambda r: largest_city_in(r, depth - 1), lambda r: capital_of(r, depth - 1),
                    lambda r: possessive_capital(r, depth - 1)]
    return rng.choice(options)(rng)


def plural(rng, depth=1):
    kind = rng.randrange(3)
    if kind == 0:
        return _frag([L("cities", "city"), L("in", "loc_2"), place(rng, depth)])
    if kind == 1:
        return _frag([L("rivers", "river"), L("that"), L("flow"), L("through", "traverse_2"), place(rng, depth)])
    return _frag([L("states", "state"), L("bordering", "next_to_2"), place(rng, depth)])


# questions ---------------------------------------------------------------

def q_attribute(rng):
    attr = rng.choice(("population", "area", "density"))
    return _frag([L("what", "answer"), L("is"), L("the"), L(attr, attr), L("of"), entity(rng, 2), L("?")])


def q_how_big(rng):
    return _frag([L("how", "answer"), L("big", "size"), L("is"), entity(rng, 2), L("?")])


def q_people(rng):
    return _frag([L("how", "answer"), L("many"), L("people", "population"), L("live"), L("in"), entity(rng, 2),
                  L("?")])


def q_border(rng):
    return _frag([L("what", "answer"), L("states", "state"), L("border", "next_to_2"), place(rng, 2), L("?")])


def q_count(rng):
    return _frag([L("how", "answer"), L("many", "count"), plural(rng), L("are"), L("there"), L("?")])


def q_list(rng):
    return _frag([L("name", "answer"), L("the"), plural(rng)])


def q_highest_point(rng):
    return _frag([L("what", "answer"), L("is"), L("the"), L("highest", "highest"), L("point", "place"),
                  L("in", "loc_2"), place(rng, 1), L("?")])


def q_density(rng):
    # the worked example: which city has the highest population density ?
    ans, cty, hi, dens, al = (L("which", "answer"), L("city", "city"), L("highest", "largest"),
                              L("density", "density"), L(None, "all"))
    return _frag([ans, cty, L("has"), L("the"), hi, L("population"), dens, L("?"), al], ans, hi, dens, cty, al)


def q_most_rivers(rng):
    # what state has the most rivers ? -> answer most state loc_1 river all
    ans, st, has, most, riv, al = (L("what", "answer"), L("state", "state"), L("has", "loc_1"),
                                   L("most", "most"), L("rivers", "river"), L(None, "all"))
    return _frag([ans, st, has, L("the"), most, riv, L("?"), al], ans, most, st, has, riv, al)


def q_river_length(rng):
    return _frag([L("how", "answer"), L("long", "len"), L("is"), river(rng), L("?")])


QUESTIONS = (q_attribute, q_attribute, q_how_big, q_people, q_border, q_count, q_count, q_list,
             q_highest_point, q_density, q_most_rivers, q_river_length)


def generate_geo(n: int = 880, seed: int = 0) -> list[AlignedExample]:
    """``n`` distinct gold-aligned examples (deduplicated on the NL sentence)."""
    rng = random.Random(seed)
    seen, out = set(), []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError(f"could only generate {len(out)} distinct examples")
        ex = _flatten(rng.choice(QUESTIONS)(rng))
        if ex.nl in seen:
            continue
        seen.add(ex.nl)
        out.append(validate(AlignedExample(f"geo-{len(out):04d}", ex.nl, ex.mr, ex.bisymbols, "en")))
    return out
