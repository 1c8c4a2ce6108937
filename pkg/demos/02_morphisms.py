"""
Morphisms between quadratic spaces
==================================

A morphism V -> W is stored as a pair (A, K): a linear map and a subspace of
V on which the defect of A vanishes. Its rank is dim K.
"""
import numpy as np

from fquad.quad import parse_space
from fquad.tq import classify_generator, compose, compose_batch, compose_realized, hom_set, realize

h0, h1 = parse_space("H0"), parse_space("H1")

hs = hom_set(h0, h0)
print("Hom(H0, H0) by rank:", hs.rank_counts())
# morphisms out of a plane are one of t, A, B, C or D
kinds = [classify_generator(t)[0] for t in hs]
print({k: kinds.count(k) for k in "tABCD"})

#%%
# each morphism is a cospan V -> X <- W; composing the cospans agrees with
# the (A, K) rule
f = hs.morphism(20)
g = hom_set(h0, parse_space("H0+H1")).morphism(123)
print("f =", f.label(), " g =", g.label())
print("g f =", compose(g, f).label())
assert compose_realized(g, f) == compose(g, f)
emb, section = realize(f)
print("realised through an apex of dim", emb.target.dim)

#%%
# whole hom sets compose as numpy batches
a, b = parse_space("H0+H0"), parse_space("H0+H1")
h_ab, h_ba = hom_set(a, b), hom_set(b, a)
print(f"|Hom({a.name},{b.name})| = {len(h_ab)}, by rank {h_ab.rank_counts()}")
rng = np.random.default_rng(0)
x = h_ab.take(rng.integers(0, len(h_ab), 5000))
y = h_ba.take(rng.integers(0, len(h_ba), 5000))
c = compose_batch(y, x)
# K is stored as a membership mask, so its size gives the rank
ranks = np.log2(c.kin.sum(axis=1)).astype(int)
print("rank histogram of 5000 random composites:", np.bincount(ranks, minlength=5))
