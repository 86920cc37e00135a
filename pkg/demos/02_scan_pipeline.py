# coding: utf-8

# # SCAN with automatic alignments
#
# No gold alignments here: IBM Model 2 aligns commands to programs, and the
# translator and reorderer are trained on what falls out.

# In[1]:

import time

from tpol import derive_corpus, evaluate, generate_scan, scan_split, train_ibm, train_reorderer, train_translator
from tpol.ibm import align_corpus
from tpol.scan import CONSTANTS, execute_program

t0 = time.perf_counter()
full = generate_scan()
print(len(full), "commands in the grammar")
ex = full[5000]
print(" ".join(ex.command), "=>", " ".join(ex.program))
print(" ".join(execute_program(ex.program)))


# In[2]:

sample = generate_scan(2000, seed=0)
split = scan_split(sample, "iid", (0.8, 0.1, 0.1), seed=0)   # brackets stripped
print(split.counts())

ibm = train_ibm([(e.nl, e.mr) for e in split.train], "model2", 15)
print("log-likelihood, first/last:", round(ibm.loglik[0], 1), round(ibm.final_loglik, 1))


# In[3]:

train, test = align_corpus(ibm, split.train), align_corpus(ibm, split.test)
print(train[0].bisymbols)

tpairs, rpairs = derive_corpus(train)
translator = train_translator(tpairs)
reorderer = train_reorderer(rpairs, constants=CONSTANTS)
print(len(translator.rules), "insertion rules,", len(reorderer.template_memory), "templates")


# In[4]:

rep = evaluate(test, translator, reorderer, config="scan-ibm2")
print(f"exact match      {rep.overall_exact_match:.3f}  ({rep.correct}/{rep.count})")
print(f"translator only  {rep.translator_accuracy:.3f}")
print(f"reorderer only   {rep.reorderer_accuracy:.3f}")
print(f"{time.perf_counter() - t0:.1f}s")

for row in rep.per_example:
    if not row["correct"]:
        gold = next(e for e in test if e.id == row["id"])
        print(" ".join(gold.nl))
        print("  gold:", " ".join(gold.mr))
        print("  got :", " ".join(row["prediction"]))
