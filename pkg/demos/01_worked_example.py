# coding: utf-8

# # One sentence, start to finish
#
# A question, its MR, and the bi-symbol alignment between them.  Reading the
# bi-symbols off in order gives a monotone MR `z`; the permutation puts it back.

# In[1]:

from tpol.align import EPS, crossing_count, derive_training_pairs, monotonicize
from tpol.corpus import AlignedExample, BiSymbol

nl = "which city has the highest population density ?".split()
mr = "answer largest density city all".split()
bis = [(0, 0), (1, 3), (2, None), (3, None), (4, 1), (5, None), (6, 2), (7, None), (None, 4)]
ex = AlignedExample("demo", tuple(nl), tuple(mr), tuple(BiSymbol(*b) for b in bis))


# In[2]:

# city comes before largest/density in the question but after them in the MR
print("crossings in gold alignment:", crossing_count(ex.bisymbols))

d = monotonicize(ex)
print("z    :", " ".join(d.z))
print("perm :", d.perm)
print("crossings after monotonicizing:", crossing_count(d.induced_alignment()))


# In[3]:

# what the two modules are trained on
tpair, rpair = derive_training_pairs(ex)
for x, z in zip(tpair.x_pad, tpair.z_pad):
    print(f"{x:>12}  ->  {'' if z == EPS else z}")
print()
print(" ".join(rpair.z), " => ", " ".join(rpair.y))
