# coding: utf-8

# # Toy Geo: gold alignments vs IBM alignments
#
# The same pipeline trained twice per split, once on hand alignments and once
# on IBM Model 2 output.  The gap in accuracy is plotted against the alignment
# error of the automatic alignments.  Files land in demos/out/.

# In[1]:

from pathlib import Path

from tpol import derive_corpus, emit_report, evaluate, make_split, train_ibm, train_reorderer, train_translator
from tpol.align import corpus_alignment_error
from tpol.evaluation import AlignmentErrorPoint, accuracy_drop
from tpol.ibm import align_corpus
from tpol.toygeo import CONSTANTS, generate_geo

data = generate_geo(880, seed=0)
print(len(data), "questions")
print(" ".join(data[0].nl), "=>", " ".join(data[0].mr))

out = Path(__file__).parent / "out"


# In[2]:

def fit(train):
    tpairs, rpairs = derive_corpus(train)
    return train_translator(tpairs), train_reorderer(rpairs, constants=CONSTANTS)


reports, points = [], []
for strategy in ("question", "query", "length"):
    split = make_split(data, strategy, (0.8, 0.0, 0.2), seed=0, constants=CONSTANTS)
    gold = evaluate(split.test, *fit(split.train), config="gold", partition=strategy)

    ibm = train_ibm([(e.nl, e.mr) for e in split.train], "model2", 15)
    auto_train = align_corpus(ibm, split.train)
    auto = evaluate(split.test, *fit(auto_train), config="ibm2", partition=strategy)

    aer = corpus_alignment_error(auto_train, split.train)
    drop = accuracy_drop(gold, auto)
    points.append(AlignmentErrorPoint("ibm2", strategy, "en", aer, drop))
    reports += [gold, auto]
    print(f"{strategy:>9}: gold {gold.overall_exact_match:.3f}  ibm2 {auto.overall_exact_match:.3f}  "
          f"alignment error {aer:.3f}")


# In[3]:

# MN = gold alignment has no crossings, NMN = it does
for rep in reports:
    mn = "n/a" if rep.mn_accuracy is None else f"{rep.mn_accuracy:.3f}"
    nmn = "n/a" if rep.nmn_accuracy is None else f"{rep.nmn_accuracy:.3f}"
    print(f"{rep.config:>5} {rep.partition:>9}  MN {mn} ({rep.mn.count})  NMN {nmn} ({rep.nmn.count})")


# In[4]:

for path in emit_report(reports, out, ("csv", "svg"), points):
    print("wrote", path)
