import itertools
import random

import numpy as np
import pytest

from fquad.functors import (SHIPPED, FunctorValue, delta, direct_sum, drop_summand,
                            functor_by_name, iso_point, shipped_functors, tensor)
from fquad.gf2 import BitMat
from fquad.quad import parse_space
from fquad.tq import compose, compose_batch, from_diagram, hom_set, identity, orth_sum_morphism

import oracle

SITE = ["0", "H0", "H1", "H0+H0", "H0+H1"]
SMALL = ["0", "H0", "H1"]


def dims(name):
    F = functor_by_name(name)
    return [F.dim(parse_space(s)) for s in SITE]


def test_representable_dims_are_hom_counts():
    for v in ["H0", "H1"]:
        V = parse_space(v)
        expected = [sum(oracle.hom_rank_counts(V, parse_space(w))) for w in SITE]
        assert dims(f"P:{v}") == expected


def test_layer_dims_are_rank_counts():
    V = parse_space("H0")
    for i, mode in [(0, "sub0"), (1, "layer1")]:
        got = dims(f"P:H0:{mode}")
        expected = [oracle.hom_rank_counts(V, parse_space(w))[i] for w in SITE]
        assert got == expected
    assert dims("P:H0:top") == [oracle.hom_rank_counts(V, parse_space(w))[2] for w in SITE]


def test_top_layer_counts_embeddings():
    for v in ["H0", "H1"]:
        V = parse_space(v)
        assert dims(f"iso:{v}") == [oracle.count_embeddings(V, parse_space(w)) if w != "0" else 0
                                    for w in SITE]
        assert dims(f"P:{v}:top") == dims(f"iso:{v}")


def test_vector_space_functor_dims():
    assert dims("const") == [1] * 5
    assert dims("iota:Lambda1") == [0, 2, 2, 4, 4]
    assert dims("iota:Lambda2") == [0, 1, 1, 6, 6]
    assert dims("iota:PF2") == [1, 16, 16, 256, 256]


def test_mix_dims():
    # values at H0 are 4 and 2; the rest are frozen from brute-force enumeration
    assert dims("Mix01") == [0, 4, 0, 72, 40]
    assert dims("Mix11") == [0, 2, 6, 48, 80]
    assert dims("P:H0:layer1:A") == dims("P:H0:layer1:B") == dims("Mix01")
    assert dims("P:H0:layer1:C") == dims("Mix11")
    assert dims("P:H1:layer1") == [3 * d for d in dims("Mix11")]


def test_reconstructed_functor_dims():
    # frozen values for the functors built on degenerate spaces
    assert dims("iso:x0") == [0, 2, 0, 9, 5]
    assert dims("iso:x1") == [0, 1, 3, 6, 10]
    assert dims("R:H0") == [0, 1, 0, 18, 10]
    assert dims("R:H1") == [0, 0, 1, 2, 10]
    assert dims("S:H1") == [0, 0, 2, 4, 20]


def test_sums_and_tensors():
    assert dims("sum(Mix01,iso:x1)") == [a + b for a, b in zip(dims("Mix01"), dims("iso:x1"))]
    assert dims("tensor(iota:Lambda1,iso:x0)") == \
        [a * b for a, b in zip(dims("iota:Lambda1"), dims("iso:x0"))]
    assert direct_sum(functor_by_name("Mix01")).dim(parse_space("H0")) == 4
    assert tensor(functor_by_name("const"), functor_by_name("Mix11")).dim(parse_space("H0")) == 2


def test_values_and_labels():
    val = functor_by_name("Mix01").value(parse_space("H0"))
    assert isinstance(val, FunctorValue)
    assert val.dim == 4 and len(val.labels) == 4 and len(set(val.labels)) == 4
    j = val.to_json()
    assert j["dim"] == 4 and j["space"] == "H0"


def test_names():
    for name in SHIPPED:
        assert functor_by_name(name) is functor_by_name(name)
    for bad in ["Mix21", "P:H2", "nope", "tensor(const)"]:
        with pytest.raises(ValueError):
            functor_by_name(bad)
    assert functor_by_name("Delta0(const)").dim(parse_space("H0")) == 0


# --- functoriality -------------------------------------------------------------------

def test_identity_acts_as_identity():
    for F in shipped_functors():
        for s in SMALL + ["H0+H1"]:
            S = parse_space(s)
            assert F.act(identity(S)) == BitMat.identity(F.dim(S)), F.name


@pytest.mark.parametrize("name", SHIPPED)
def test_functoriality_exhaustive_small(name):
    F = functor_by_name(name)
    spaces = [parse_space(s) for s in SMALL]
    for U, V, W in itertools.product(spaces, repeat=3):
        acts1 = {t: F.act(t) for t in hom_set(U, V)}
        acts2 = {t: F.act(t) for t in hom_set(V, W)}
        for t1, m1 in acts1.items():
            for t2, m2 in acts2.items():
                assert F.act(compose(t2, t1)) == m2 @ m1


def _random_batches(rng, U, V, W, n):
    h1, h2 = hom_set(U, V), hom_set(V, W)
    return h1.take(rng.integers(0, len(h1), n)), h2.take(rng.integers(0, len(h2), n))


MONOMIAL = [n for n in SHIPPED if functor_by_name(n).monomial]
DENSE = [n for n in SHIPPED if not functor_by_name(n).monomial]


@pytest.mark.parametrize("name", MONOMIAL)
def test_functoriality_random_dim4_monomial(name):
    F = functor_by_name(name)
    rng = np.random.default_rng(5)
    A, B = parse_space("H0+H0"), parse_space("H0+H1")
    total = 0
    for U, V, W in [(A, B, A), (B, A, B), (A, A, B)]:
        b1, b2 = _random_batches(rng, U, V, W, 4000)
        i1, i2 = F.act_indices(b1), F.act_indices(b2)
        ic = F.act_indices(compose_batch(b2, b1))
        rows = np.arange(len(b1))[:, None]
        ext = np.concatenate([i2, np.full((len(b1), 1), -1, dtype=i2.dtype)], axis=1)
        chained = ext[rows, np.where(i1 < 0, i2.shape[1], i1)]
        assert (chained == ic).all()
        total += len(b1)
    assert total >= 10_000


@pytest.mark.parametrize("name", DENSE)
def test_functoriality_random_dim4_dense(name):
    F = functor_by_name(name)
    rng = random.Random(9)
    A, B = parse_space("H0+H0"), parse_space("H0+H1")
    for U, V, W in [(A, B, A), (B, A, B)]:
        h1, h2 = hom_set(U, V), hom_set(V, W)
        for _ in range(150):
            t1, t2 = h1.morphism(rng.randrange(len(h1))), h2.morphism(rng.randrange(len(h2)))
            assert F.act(compose(t2, t1)) == F.act(t2) @ F.act(t1)


# --- difference functors -------------------------------------------------------------

def test_drop_summand_is_the_cospan_projection():
    from fquad.quad import Isometry, orthogonal_sum
    for v in SMALL:
        V = parse_space(v)
        for eps in (0, 1):
            X = orthogonal_sum(V, parse_space(f"H{eps}"))
            t = from_diagram(Isometry(X, X, BitMat.identity(X.dim)),
                             Isometry(V, X, BitMat.from_columns([1 << i for i in range(V.dim)], X.dim)))
            assert drop_summand(V, eps) == t


def test_delta_examples():
    zero = parse_space("0")
    assert delta(0, functor_by_name("iota:Lambda1")).dim(zero) == 2
    assert delta(0, iso_point(1)).dim(zero) == 1
    for s in SITE:
        assert delta(0, functor_by_name("const")).dim(parse_space(s)) == 0
        assert delta(1, functor_by_name("const")).dim(parse_space(s)) == 0


def test_delta_is_additive():
    a, b = functor_by_name("Mix01"), functor_by_name("iso:x1")
    s = functor_by_name("sum(Mix01,iso:x1)")
    for eps in (0, 1):
        for w in SITE:
            W = parse_space(w)
            assert delta(eps, s).dim(W) == delta(eps, a).dim(W) + delta(eps, b).dim(W)


@pytest.mark.parametrize("name", ["iota:Lambda1", "Mix01", "Mix11", "iso:x1", "R:H0", "S:H1",
                                  "P:H0:top"])
def test_delta_functoriality(name):
    for eps in (0, 1):
        D = delta(eps, functor_by_name(name))
        spaces = [parse_space(s) for s in SMALL]
        for U, V, W in itertools.product(spaces, repeat=3):
            for t1 in hom_set(U, V):
                m1 = D.act(t1)
                for t2 in hom_set(V, W):
                    assert D.act(compose(t2, t1)) == D.act(t2) @ m1


def test_delta_action_is_restriction():
    from fquad.quad import hyperbolic
    F = functor_by_name("Mix11")
    D = delta(0, F)
    V, W = parse_space("H0"), parse_space("H1")
    for t in hom_set(V, W):
        big = F.act(orth_sum_morphism(t, identity(hyperbolic(0))))
        free_w, vecs_w = D.kernel(W)
        _, vecs_v = D.kernel(V)
        m = D.act(t)
        for k, v in enumerate(vecs_v):
            image = 0
            for j in range(len(vecs_w)):
                if (m.columns[k] >> j) & 1:
                    image ^= vecs_w[j]
            assert image == big.apply(v)
