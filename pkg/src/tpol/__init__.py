"""Two-step semantic parsing: monotonic translation, then reordering.

Typical use::

    from tpol import derive_corpus, train_translator, train_reorderer, parse_with
    tpairs, rpairs = derive_corpus(train_examples)
    translator = train_translator(tpairs)
    reorderer = train_reorderer(rpairs, constants=lexicon)
    y_hat = parse_with(sentence, translator, reorderer)
"""

from .align import (AlignmentErrorScore, MonotonicDerivation, alignment_error, apply_permutation, crossing_count,
                    derive_corpus, derive_training_pairs, monotonicize)
from .corpus import (AlignedExample, BiSymbol, SplitDataset, Template, extract_template, load_corpus, make_split,
                     save_corpus)
from .evaluation import EvalReport, emit_report, evaluate, exact_match, parse, parse_with
from .ibm import IBMModel, align_corpus, train_ibm, viterbi_bisymbolize
from .reorderer import ReordererModel, reorder, train_reorderer
from .scan import ScanExample, generate_scan, scan_split
from .translator import Translator, apply_insertions, learn_insertion_rules, train_tagger, train_translator, translate

__version__ = "0.1.0"

__all__ = [
    "AlignmentErrorScore", "MonotonicDerivation", "alignment_error", "apply_permutation", "crossing_count",
    "derive_corpus", "derive_training_pairs", "monotonicize",
    "AlignedExample", "BiSymbol", "SplitDataset", "Template", "extract_template", "load_corpus", "make_split",
    "save_corpus",
    "EvalReport", "emit_report", "evaluate", "exact_match", "parse", "parse_with",
    "IBMModel", "align_corpus", "train_ibm", "viterbi_bisymbolize",
    "ReordererModel", "reorder", "train_reorderer",
    "ScanExample", "generate_scan", "scan_split",
    "Translator", "apply_insertions", "learn_insertion_rules", "train_tagger", "train_translator", "translate",
]
