from itertools import combinations

import numpy as np
import pytest

from fquad.decomp import site_spaces, swap
from fquad.functors import (NatTransform, check_naturality, functor_by_name, hom_space,
                            identity_transform, is_natural, yoneda)
from fquad.functors.nat import bch_syndromes
from fquad.gf2 import BitMat
from fquad.quad import parse_space
from fquad.tq import hom_set, identity

SMALL = site_spaces(2)


@pytest.mark.parametrize("n,t", [(7, 1), (15, 2), (20, 3), (40, 2)])
def test_syndromes_separate_light_vectors(n, t):
    s = [int(x) for x in bch_syndromes(n, t)[:n]]
    seen = {}
    # distinct sets of at most t positions have distinct syndromes
    for w in range(t + 1):
        for c in combinations(range(n), w):
            x = 0
            for i in c:
                x ^= s[i]
            assert x not in seen, (c, seen.get(x))
            seen[x] = c


def test_syndromes_unavailable_when_too_wide():
    assert bch_syndromes(5000, 8) is None


def perturbed(eta, space, i=0, j=0):
    comps = {S: eta.component(S) for S in SMALL}
    m = comps[space]
    rows = list(m.data)
    rows[i] ^= 1 << j
    comps[space] = BitMat(m.rows, m.cols, tuple(rows))
    return NatTransform(eta.source, eta.target, comps, name="bad")


@pytest.mark.parametrize("name", ["Mix01", "Mix11", "P:H0", "S:H1", "iso:x1",
                                  "tensor(iota:Lambda1,iso:x0)"])
def test_identity_is_natural_and_perturbation_is_caught(name):
    F = functor_by_name(name)
    ident = identity_transform(F)
    assert is_natural(ident, SMALL)
    space = next(S for S in SMALL if F.dim(S) > 0)
    rep = check_naturality(perturbed(ident, space), SMALL)
    assert not rep.ok
    assert rep.failure is not None


def test_swap_is_natural_and_squares_to_identity():
    tau = swap(0)
    assert is_natural(tau, site_spaces(4))
    assert tau.after(tau).equals_on(identity_transform(tau.source), site_spaces(4))
    assert not tau.equals_on(identity_transform(tau.source), SMALL)


def test_transform_algebra():
    F = functor_by_name("Mix01")
    ident = identity_transform(F)
    assert (ident + ident).is_zero_on(SMALL)
    with pytest.raises(ValueError):
        ident.after(identity_transform(functor_by_name("Mix11")))


def test_end_of_constant():
    assert len(hom_space(functor_by_name("const"), functor_by_name("const"), SMALL)) == 1


@pytest.mark.parametrize("name", ["Mix01", "Mix11", "iota:Lambda1", "iso:x0", "iso:H0"])
def test_maps_out_of_representable_match_values(name):
    F = functor_by_name(name)
    P = functor_by_name("P:H0")
    h0 = parse_space("H0")
    basis = hom_space(P, F, SMALL)
    assert len(basis) == F.dim(h0)
    # every solution is the Yoneda transform of its value at the identity
    pos = hom_set(h0, h0).index_of(identity(h0))
    for b in basis:
        x = b.component(h0).columns[pos]
        assert b.equals_on(yoneda(F, h0, x), SMALL)


@pytest.mark.parametrize("name", ["Mix01", "iso:x1"])
def test_yoneda_transforms_are_natural(name):
    F = functor_by_name(name)
    h0 = parse_space("H0")
    for x in range(1, 1 << F.dim(h0)):
        assert is_natural(yoneda(F, h0, x), SMALL)
    assert is_natural(yoneda(F, h0, 1), site_spaces(4))


def test_end_ring_dims():
    site = site_spaces(4)
    assert len(hom_space(functor_by_name("Mix01"), functor_by_name("Mix01"), site)) == 2
    # the solver finds the swap on Mix11 as well
    assert len(hom_space(functor_by_name("Mix11"), functor_by_name("Mix11"), site)) == 2
