"""
Functors on quadratic spaces
============================

Evaluating the shipped functors, their matrices on morphisms, and the
difference functors.
"""
from fquad.decomp import delta_dims, site_spaces
from fquad.functors import delta, functor_by_name
from fquad.quad import parse_space
from fquad.tq import hom_set

site = site_spaces(4)
print("site:", [S.name for S in site])
for name in ["const", "iota:Lambda1", "Mix01", "Mix11", "iso:H0", "P:H0"]:
    F = functor_by_name(name)
    print(f"{name:13s}", [F.dim(S) for S in site])

#%%
# Mix01(H0) has a basis of labelled pairs of vectors
val = functor_by_name("Mix01").value(parse_space("H0"))
print(val.labels)

h0 = parse_space("H0")
t = hom_set(h0, h0).morphism(20)
print(t.label(), "acts on Mix01(H0) as")
print(functor_by_name("Mix01").act(t))

#%%
# the difference functor: kernel of F(V+H) -> F(V)
F = functor_by_name("iota:Lambda1")
print("Delta0 Lambda1 at 0:", delta(0, F).dim(parse_space("0")))
for name in ["const", "iota:Lambda1", "iso:x1"]:
    G = functor_by_name(name)
    print(f"{name:13s} delta0 {delta_dims(G, 0, site)}  delta1 {delta_dims(G, 1, site)}")
