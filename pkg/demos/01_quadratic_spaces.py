"""
Quadratic spaces over GF(2)
===========================

The two hyperbolic planes, their Arf invariants and orthogonal groups, and
the isometry between H0+H0 and H1+H1.
"""
from fquad.quad import arf, is_isometric, orthogonal_group_order, parse_space

h0, h1 = parse_space("H0"), parse_space("H1")

# q on all four vectors of each plane
for S in (h0, h1):
    print(S.name, [S.q(x) for x in range(4)], "arf", arf(S), "|O| =", orthogonal_group_order(S))

# the plane with Arf 0 takes the value 0 three times; H1 takes 1 three times
print("H0 ~ H1 ?", is_isometric(h0, h1))

#%%
# Arf is additive, so two copies of H1 look like two copies of H0
X, Y = parse_space("H0+H0"), parse_space("H1+H1")
iso = is_isometric(X, Y)
print("isometry H0+H0 -> H1+H1, columns:", iso.map.to_bitstrings())
assert all(Y.q(iso(v)) == X.q(v) for v in range(16))

for spec in ["H0+H0", "H0+H1", "H1+H1"]:
    S = parse_space(spec)
    print(f"{spec:6s} arf {arf(S)}  |O| = {orthogonal_group_order(S)}")
